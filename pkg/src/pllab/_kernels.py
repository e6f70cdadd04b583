"""Jitted inner loops for quadratic-structured problems.

Only the Monte-Carlo heavy solvers dispatch here (coordinate descent,
stochastic gradient, variance-reduced gradient, proximal coordinate
descent), and only when the smooth part is a quadratic form (or a finite
sum of quadratic forms). The RNG below is the same splitmix64-seeded
xoshiro256** as ``pllab.rng``; the integer update is transcribed
independently and cross-checked in tests so index streams match the pure
path bit for bit.

Kernels return raw objective values per iterate; callers convert to gaps.
"""

import numba as nb
import numpy as np

U64 = np.uint64

_MAXU = U64(0xFFFFFFFFFFFFFFFF)
_SM_GAMMA = U64(0x9E3779B97F4A7C15)
_SM_M1 = U64(0xBF58476D1CE4E5B9)
_SM_M2 = U64(0x94D049BB133111EB)
_ONE = U64(1)
_FIVE = U64(5)
_NINE = U64(9)
_S7 = U64(7)
_S11 = U64(11)
_S17 = U64(17)
_S19 = U64(19)
_S27 = U64(27)
_S30 = U64(30)
_S31 = U64(31)
_S45 = U64(45)
_S57 = U64(57)
_UNIT = 2.0 ** -53


@nb.njit(cache=True)
def _seed_state(seed):
    st = np.empty(4, dtype=np.uint64)
    s = seed
    for i in range(4):
        s = s + _SM_GAMMA
        z = s
        z = (z ^ (z >> _S30)) * _SM_M1
        z = (z ^ (z >> _S27)) * _SM_M2
        st[i] = z ^ (z >> _S31)
    return st


@nb.njit(cache=True)
def _next_u64(st):
    s1 = st[1]
    x = s1 * _FIVE
    result = ((x << _S7) | (x >> _S57)) * _NINE
    t = s1 << _S17
    st[2] ^= st[0]
    st[3] ^= s1
    st[1] ^= st[2]
    st[0] ^= st[3]
    st[2] ^= t
    s3 = st[3]
    st[3] = (s3 << _S45) | (s3 >> _S19)
    return result


@nb.njit(cache=True)
def _next_index(st, n):
    # rejection sampling: accept u <= 2**64 - (2**64 mod n) - 1
    un = U64(n)
    r = ((_MAXU % un) + _ONE) % un
    lim = _MAXU - r
    while True:
        u = _next_u64(st)
        if u <= lim:
            return np.int64(u % un)


@nb.njit(cache=True)
def _next_unit(st):
    return (_next_u64(st) >> _S11) * _UNIT


@nb.njit(cache=True)
def rng_u64_stream(seed, count):
    st = _seed_state(seed)
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = _next_u64(st)
    return out


@nb.njit(cache=True)
def rng_index_stream(seed, count, n):
    st = _seed_state(seed)
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        out[i] = _next_index(st, n)
    return out


@nb.njit(cache=True)
def rng_unit_stream(seed, count):
    st = _seed_state(seed)
    out = np.empty(count)
    for i in range(count):
        out[i] = _next_unit(st)
    return out


@nb.njit(cache=True)
def _quad_value(Q, c, r, x):
    d = x.shape[0]
    acc = r
    for i in range(d):
        qi = 0.0
        for j in range(d):
            qi += Q[i, j] * x[j]
        acc += x[i] * (0.5 * qi + c[i])
    return acc


@nb.njit(cache=True)
def _coord_grad(Q, c, x, i):
    g = c[i]
    for j in range(x.shape[0]):
        g += Q[i, j] * x[j]
    return g


@nb.njit(cache=True)
def _grad_into(Q, c, x, out):
    d = x.shape[0]
    for i in range(d):
        g = c[i]
        for j in range(d):
            g += Q[i, j] * x[j]
        out[i] = g


@nb.njit(cache=True)
def cd_uniform_quad(Q, c, r, x0, iters, L, seed):
    d = x0.shape[0]
    st = _seed_state(seed)
    x = x0.copy()
    values = np.empty(iters + 1)
    steps = np.zeros(iters + 1)
    idx = np.full(iters + 1, -1, dtype=np.int64)
    points = np.empty((iters + 1, d))
    values[0] = _quad_value(Q, c, r, x)
    points[0] = x
    for k in range(1, iters + 1):
        i = _next_index(st, d)
        gi = _coord_grad(Q, c, x, i)
        x[i] = x[i] - gi / L
        values[k] = _quad_value(Q, c, r, x)
        steps[k] = 1.0 / L
        idx[k] = i
        points[k] = x
    return values, steps, idx, points


@nb.njit(cache=True)
def cd_weighted_quad(Q, c, r, x0, iters, Li, cumw, seed):
    d = x0.shape[0]
    st = _seed_state(seed)
    x = x0.copy()
    total = cumw[d - 1]
    values = np.empty(iters + 1)
    steps = np.zeros(iters + 1)
    idx = np.full(iters + 1, -1, dtype=np.int64)
    points = np.empty((iters + 1, d))
    values[0] = _quad_value(Q, c, r, x)
    points[0] = x
    for k in range(1, iters + 1):
        v = _next_unit(st) * total
        i = 0
        while i < d - 1 and v >= cumw[i]:
            i += 1
        gi = _coord_grad(Q, c, x, i)
        x[i] = x[i] - gi / Li[i]
        values[k] = _quad_value(Q, c, r, x)
        steps[k] = 1.0 / Li[i]
        idx[k] = i
        points[k] = x
    return values, steps, idx, points


@nb.njit(cache=True)
def _quadsum_component_grad_into(Qs, cs, i, x, out):
    d = x.shape[0]
    for a in range(d):
        g = cs[i, a]
        for b in range(d):
            g += Qs[i, a, b] * x[b]
        out[a] = g


@nb.njit(cache=True)
def _quadsum_max_grad_sq(Qs, cs, x, buf):
    n = Qs.shape[0]
    best = 0.0
    for i in range(n):
        _quadsum_component_grad_into(Qs, cs, i, x, buf)
        acc = 0.0
        for a in range(buf.shape[0]):
            acc += buf[a] * buf[a]
        if acc > best:
            best = acc
    return best


@nb.njit(cache=True)
def sgd_quadsum(Qs, cs, rs, Qb, cb, rb, x0, iters, sched_kind, alpha, mu,
                seed, track_c2):
    # sched_kind: 0 decreasing (2k+1)/(2 mu (k+1)^2), 1 constant alpha
    n = Qs.shape[0]
    d = x0.shape[0]
    st = _seed_state(seed)
    x = x0.copy()
    buf = np.empty(d)
    values = np.empty(iters + 1)
    steps = np.zeros(iters + 1)
    idx = np.full(iters + 1, -1, dtype=np.int64)
    points = np.empty((iters + 1, d))
    values[0] = _quad_value(Qb, cb, rb, x)
    points[0] = x
    c2 = 0.0
    for k in range(iters):
        if track_c2 == 1:
            m = _quadsum_max_grad_sq(Qs, cs, x, buf)
            if m > c2:
                c2 = m
        if sched_kind == 0:
            a_k = (2.0 * k + 1.0) / (2.0 * mu * (k + 1.0) * (k + 1.0))
        else:
            a_k = alpha
        i = _next_index(st, n)
        _quadsum_component_grad_into(Qs, cs, i, x, buf)
        for a in range(d):
            x[a] = x[a] - a_k * buf[a]
        values[k + 1] = _quad_value(Qb, cb, rb, x)
        steps[k + 1] = a_k
        idx[k + 1] = i
        points[k + 1] = x
    if track_c2 == 1:
        m = _quadsum_max_grad_sq(Qs, cs, x, buf)
        if m > c2:
            c2 = m
    return values, steps, idx, points, c2


@nb.njit(cache=True)
def svrg_quadsum(Qs, cs, rs, Qb, cb, rb, x0, inner_m, alpha, outer, seed):
    n = Qs.shape[0]
    d = x0.shape[0]
    st = _seed_state(seed)
    snapshot = x0.copy()
    anchor = np.empty(d)
    _grad_into(Qb, cb, snapshot, anchor)
    gx = np.empty(d)
    gs = np.empty(d)
    inner = np.empty((inner_m, d))
    values = np.empty(outer + 1)
    idx = np.full(outer + 1, -1, dtype=np.int64)
    points = np.empty((outer + 1, d))
    values[0] = _quad_value(Qb, cb, rb, snapshot)
    points[0] = snapshot
    for s in range(1, outer + 1):
        x = snapshot.copy()
        for t in range(inner_m):
            i = _next_index(st, n)
            _quadsum_component_grad_into(Qs, cs, i, x, gx)
            _quadsum_component_grad_into(Qs, cs, i, snapshot, gs)
            for a in range(d):
                x[a] = x[a] - alpha * (gx[a] - gs[a] + anchor[a])
            inner[t] = x
        j = _next_index(st, inner_m)
        snapshot = inner[j].copy()
        _grad_into(Qb, cb, snapshot, anchor)
        values[s] = _quad_value(Qb, cb, rb, snapshot)
        idx[s] = j
        points[s] = snapshot
    return values, idx, points


@nb.njit(cache=True)
def _prox1(gkind, v, t, p1, p2):
    if gkind == 0:
        return v
    if gkind == 1:
        tl = t * p1
        if v > tl:
            return v - tl
        if v < -tl:
            return v + tl
        return 0.0
    if v < p1:
        return p1
    if v > p2:
        return p2
    return v


@nb.njit(cache=True)
def _reg_value(gkind, gp1, gp2, x):
    if gkind == 1:
        acc = 0.0
        for j in range(x.shape[0]):
            acc += gp1[j] * abs(x[j])
        return acc
    return 0.0  # zero reg, or feasible box iterate


@nb.njit(cache=True)
def proxcd_quad(Q, c, r, x0, iters, lam, gkind, gp1, gp2, seed):
    d = x0.shape[0]
    st = _seed_state(seed)
    x = x0.copy()
    values = np.empty(iters + 1)
    steps = np.zeros(iters + 1)
    idx = np.full(iters + 1, -1, dtype=np.int64)
    points = np.empty((iters + 1, d))
    values[0] = _quad_value(Q, c, r, x) + _reg_value(gkind, gp1, gp2, x)
    points[0] = x
    for k in range(1, iters + 1):
        i = _next_index(st, d)
        gi = _coord_grad(Q, c, x, i)
        x[i] = _prox1(gkind, x[i] - gi / lam, 1.0 / lam, gp1[i], gp2[i])
        values[k] = _quad_value(Q, c, r, x) + _reg_value(gkind, gp1, gp2, x)
        steps[k] = 1.0 / lam
        idx[k] = i
        points[k] = x
    return values, steps, idx, points
