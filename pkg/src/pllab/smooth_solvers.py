"""Smooth-case first-order methods, each emitting an IterateTrace.

Deterministic methods (full gradient, greedy coordinate, sign steps) always
run the generic numpy path; the Monte-Carlo ones (random/weighted
coordinate descent, stochastic gradient, variance-reduced gradient)
dispatch to the jitted kernels when the active backend is numba and the
problem is quadratic-structured. A run with a fixed seed, problem, and
config reproduces its trace bit for bit under a fixed backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConfigurationError
from .model import IterateTrace, SmoothObjective, make_trace
from .problems import QuadraticObjective, quad_terms, quadsum_terms
from .rng import MASK64, Xoshiro256, trial_seed


def _gaps_from_values(values, fstar):
    values = np.asarray(values, dtype=float)
    if fstar is None:
        return np.full_like(values, np.nan)
    return values - fstar


def _coordinate_L(obj: SmoothObjective) -> float:
    if obj.coord_lipschitz is not None:
        return float(np.max(obj.coord_lipschitz))
    return float(obj.lipschitz_L)


def _alloc(iters, d, store_points):
    values = np.empty(iters + 1)
    steps = np.zeros(iters + 1)
    idx = np.full(iters + 1, -1, dtype=np.int64)
    points = np.empty((iters + 1, d)) if store_points else None
    return values, steps, idx, points


def gradient_descent(obj: SmoothObjective, x0, iters: int,
                     exact_line_search: bool = False,
                     store_points: bool = False) -> IterateTrace:
    """Full-gradient descent with fixed step 1/L.

    ``exact_line_search=True`` replaces 1/L by the exact 1-D minimizer,
    available in closed form for quadratics only (g'g / g'Qg).
    """
    if exact_line_search and not isinstance(obj, QuadraticObjective):
        raise ConfigurationError("exact line search is supported for quadratics only")
    L = obj.lipschitz_L
    x = np.asarray(x0, dtype=float).copy()
    values, steps, idx, points = _alloc(iters, obj.d, store_points)
    values[0] = obj.value(x)
    if store_points:
        points[0] = x
    for k in range(1, iters + 1):
        g = obj.gradient(x)
        if exact_line_search:
            denom = float(g @ (obj.Q @ g))
            alpha = float(g @ g) / denom if denom > 0 else 1.0 / L
            x = x - alpha * g
            steps[k] = alpha
        else:
            x = x - g / L
            steps[k] = 1.0 / L
        values[k] = obj.value(x)
        if store_points:
            points[k] = x
    return make_trace(np.arange(iters + 1), _gaps_from_values(values, obj.optimum_value),
                      steps, idx, 0, "gd", obj.tag, values=values, points=points,
                      meta={"L": L, "d": obj.d})


def coordinate_descent_random(obj: SmoothObjective, x0, iters: int, seed: int,
                              store_points: bool = False) -> IterateTrace:
    """Uniform-random coordinate steps of size 1/L (coordinate-wise L)."""
    if obj.d < 1:
        raise ConfigurationError("need at least one coordinate")
    L = _coordinate_L(obj)
    x = np.asarray(x0, dtype=float).copy()
    kern = backend.kernels()
    qt = quad_terms(obj)
    if kern is not None and qt is not None:
        values, steps, idx, pts = kern.cd_uniform_quad(
            qt[0], qt[1], qt[2], x, iters, L, np.uint64(seed & MASK64))
    else:
        rng = Xoshiro256(seed)
        values, steps, idx, pts_buf = _alloc(iters, obj.d, True)
        values[0] = obj.value(x)
        pts_buf[0] = x
        for k in range(1, iters + 1):
            i = rng.next_index(obj.d)
            gi = obj.coord_gradient(x, i)
            x[i] = x[i] - gi / L
            values[k] = obj.value(x)
            steps[k] = 1.0 / L
            idx[k] = i
            pts_buf[k] = x
        pts = pts_buf
    return make_trace(np.arange(iters + 1), _gaps_from_values(values, obj.optimum_value),
                      steps, idx, seed, "cd-random", obj.tag, values=values,
                      points=pts if store_points else None,
                      meta={"L": L, "d": obj.d})


def coordinate_descent_lipschitz_sampled(obj: SmoothObjective, x0, iters: int,
                                         seed: int,
                                         store_points: bool = False) -> IterateTrace:
    """Coordinate steps with index sampled proportional to L_i, step 1/L_i."""
    Li = obj.coord_lipschitz
    if Li is None:
        raise ConfigurationError("per-coordinate Lipschitz constants required")
    Li = np.asarray(Li, dtype=float)
    if np.any(Li <= 0):
        raise ConfigurationError("all coordinate Lipschitz constants must be positive")
    cumw = np.cumsum(Li)
    x = np.asarray(x0, dtype=float).copy()
    kern = backend.kernels()
    qt = quad_terms(obj)
    if kern is not None and qt is not None:
        values, steps, idx, pts = kern.cd_weighted_quad(
            qt[0], qt[1], qt[2], x, iters, Li, cumw, np.uint64(seed & MASK64))
    else:
        rng = Xoshiro256(seed)
        total = cumw[-1]
        values, steps, idx, pts_buf = _alloc(iters, obj.d, True)
        values[0] = obj.value(x)
        pts_buf[0] = x
        for k in range(1, iters + 1):
            v = rng.next_unit() * total
            i = 0
            while i < obj.d - 1 and v >= cumw[i]:
                i += 1
            gi = obj.coord_gradient(x, i)
            x[i] = x[i] - gi / Li[i]
            values[k] = obj.value(x)
            steps[k] = 1.0 / Li[i]
            idx[k] = i
            pts_buf[k] = x
        pts = pts_buf
    Lbar = float(np.mean(Li))
    return make_trace(np.arange(iters + 1), _gaps_from_values(values, obj.optimum_value),
                      steps, idx, seed, "cd-lipschitz", obj.tag, values=values,
                      points=pts if store_points else None,
                      meta={"Lbar": Lbar, "d": obj.d})


def coordinate_descent_gs(obj: SmoothObjective, x0, iters: int,
                          store_points: bool = False) -> IterateTrace:
    """Greedy coordinate steps: i_k = argmax_j |grad_j|, ties to the lowest
    index, step 1/L."""
    L = _coordinate_L(obj)
    x = np.asarray(x0, dtype=float).copy()
    values, steps, idx, points = _alloc(iters, obj.d, store_points)
    values[0] = obj.value(x)
    if store_points:
        points[0] = x
    for k in range(1, iters + 1):
        g = obj.gradient(x)
        i = int(np.argmax(np.abs(g)))
        x[i] = x[i] - g[i] / L
        values[k] = obj.value(x)
        steps[k] = 1.0 / L
        idx[k] = i
        if store_points:
            points[k] = x
    return make_trace(np.arange(iters + 1), _gaps_from_values(values, obj.optimum_value),
                      steps, idx, 0, "cd-gs", obj.tag, values=values, points=points,
                      meta={"L": L, "d": obj.d})


def weighted_grad_norm(z, weights) -> float:
    """sum_i |z_i| / sqrt(w_i): the gradient-space norm of the sign method."""
    z = np.asarray(z, dtype=float)
    return float(np.sum(np.abs(z) / np.sqrt(np.asarray(weights, dtype=float))))


def resolve_sign_weights(obj: SmoothObjective, weights=None) -> np.ndarray:
    """Weights for the sign method: explicit argument, the objective's own
    ``sign_weights()`` when it has one, else d * coord_lipschitz (sufficient
    for separable objectives; verify with ``check_sign_weights``)."""
    if weights is None:
        sw = getattr(obj, "sign_weights", None)
        if callable(sw):
            weights = sw()
        elif obj.coord_lipschitz is not None:
            weights = obj.d * np.asarray(obj.coord_lipschitz, dtype=float)
        else:
            raise ConfigurationError("sign method needs per-coordinate weights")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (obj.d,) or np.any(weights <= 0):
        raise ConfigurationError("sign weights must be positive, one per coordinate")
    return weights


def check_sign_weights(obj: SmoothObjective, weights, pairs: int = 200,
                       seed: int = 0, lo=-5.0, hi=5.0) -> float:
    """Empirical check of the weighted-norm gradient contract: returns the
    worst positive excess of sum_i |dg_i|/sqrt(w_i) over max_i sqrt(w_i)|dx_i|
    across sampled pairs (<= 0 means no violation observed)."""
    weights = resolve_sign_weights(obj, weights)
    rt = np.sqrt(weights)
    rng = Xoshiro256(seed)
    worst = -np.inf
    for _ in range(pairs):
        x = rng.uniform_vector(lo, hi, obj.d)
        y = rng.uniform_vector(lo, hi, obj.d)
        lhs = weighted_grad_norm(obj.gradient(y) - obj.gradient(x), weights)
        rhs = float(np.max(rt * np.abs(y - x)))
        worst = max(worst, lhs - rhs)
    return worst


def sign_gradient_descent(obj: SmoothObjective, x0, iters: int, weights=None,
                          store_points: bool = False) -> IterateTrace:
    """Sign-based steps x_i -= (nu / sqrt(w_i)) * sign(grad_i) with
    nu = sum_j |grad_j| / sqrt(w_j). Stops early at a zero gradient (the
    step has length zero there). The trace records nu as the step size."""
    weights = resolve_sign_weights(obj, weights)
    rt = np.sqrt(weights)
    x = np.asarray(x0, dtype=float).copy()
    values, steps, idx, points = _alloc(iters, obj.d, store_points)
    values[0] = obj.value(x)
    if store_points:
        points[0] = x
    stop = iters
    for k in range(1, iters + 1):
        g = obj.gradient(x)
        nu = weighted_grad_norm(g, weights)
        if nu == 0.0:
            stop = k - 1
            break
        x = x - (nu / rt) * np.sign(g)
        values[k] = obj.value(x)
        steps[k] = nu
        if store_points:
            points[k] = x
    n = stop + 1
    return make_trace(np.arange(n), _gaps_from_values(values[:n], obj.optimum_value),
                      steps[:n], idx[:n], 0, "sign-gd", obj.tag, values=values[:n],
                      points=None if points is None else points[:n],
                      meta={"weights": weights.tolist(), "d": obj.d})


@dataclass(frozen=True)
class SgdSchedule:
    """Step-size schedule for the stochastic gradient method.

    'decreasing' uses alpha_k = (2k+1) / (2 mu (k+1)^2), so alpha_0 =
    1/(2 mu) and the sequence strictly decreases; 'constant' uses a fixed
    alpha (certifiable when alpha < 1/(2 mu))."""

    kind: str
    alpha: float | None = None
    mu: float | None = None

    def __post_init__(self):
        if self.kind not in ("decreasing", "constant"):
            raise ConfigurationError("schedule kind must be 'decreasing' or 'constant'")
        if self.kind == "decreasing" and (self.mu is None or self.mu <= 0):
            raise ConfigurationError("decreasing schedule needs mu > 0")
        if self.kind == "constant" and (self.alpha is None or self.alpha <= 0):
            raise ConfigurationError("constant schedule needs alpha > 0")

    def alpha_at(self, k: int) -> float:
        if self.kind == "decreasing":
            return (2.0 * k + 1.0) / (2.0 * self.mu * (k + 1.0) * (k + 1.0))
        return self.alpha


def sgd(obj: SmoothObjective, x0, iters: int, schedule: SgdSchedule, seed: int,
        trials: int = 1, store_points: bool = False,
        track_c2: bool = True) -> list[IterateTrace]:
    """Stochastic gradient on a finite sum: x -= alpha_k * grad f_i(x) with i
    uniform. Returns one trace per independent seeded trial (seed + t).

    Each trace's meta carries ``c2_visited``: the max over visited iterates
    and components of ||grad f_i(x)||^2, the variance-bound estimate the
    stochastic certificates consume."""
    comps = obj.components
    if not comps:
        raise ConfigurationError("stochastic gradient needs finite-sum components")
    n = len(comps)
    x0 = np.asarray(x0, dtype=float)
    kern = backend.kernels()
    qst = quadsum_terms(obj)
    qt = quad_terms(obj)
    traces = []
    for t in range(trials):
        seed_t = trial_seed(seed, t)
        if kern is not None and qst is not None and qt is not None:
            sk = 0 if schedule.kind == "decreasing" else 1
            values, steps, idx, pts, c2 = kern.sgd_quadsum(
                qst[0], qst[1], qst[2], qt[0], qt[1], qt[2], x0.copy(), iters,
                sk, float(schedule.alpha or 0.0), float(schedule.mu or 0.0),
                np.uint64(seed_t), 1 if track_c2 else 0)
        else:
            rng = Xoshiro256(seed_t)
            x = x0.copy()
            values, steps, idx, pts = _alloc(iters, obj.d, True)
            values[0] = obj.value(x)
            pts[0] = x
            c2 = 0.0
            for k in range(iters):
                if track_c2:
                    c2 = max(c2, max(float(np.sum(f.gradient(x) ** 2)) for f in comps))
                a_k = schedule.alpha_at(k)
                i = rng.next_index(n)
                x = x - a_k * comps[i].gradient(x)
                values[k + 1] = obj.value(x)
                steps[k + 1] = a_k
                idx[k + 1] = i
                pts[k + 1] = x
            if track_c2:
                c2 = max(c2, max(float(np.sum(f.gradient(x) ** 2)) for f in comps))
        meta = {"schedule": schedule.kind, "alpha": schedule.alpha,
                "mu": schedule.mu, "n_components": n, "d": obj.d}
        if track_c2:
            meta["c2_visited"] = float(c2)
        if schedule.kind == "constant" and schedule.mu and \
                schedule.alpha >= 1.0 / (2.0 * schedule.mu):
            meta["warning"] = "constant step >= 1/(2 mu): plateau bound vacuous"
        traces.append(make_trace(
            np.arange(iters + 1), _gaps_from_values(values, obj.optimum_value),
            steps, idx, seed_t, "sgd", obj.tag, values=values,
            points=pts if store_points else None, meta=meta))
    return traces


@dataclass(frozen=True)
class SvrgConfig:
    """Variance-reduced run shape: m inner steps per outer round, fixed
    inner step alpha (constraint alpha < 2/L with L the largest component
    constant), and the number of outer rounds. Supplying mu lets the run
    pre-compute its certified contraction factor and warn when it is >= 1."""

    inner_m: int
    alpha: float
    outer: int
    mu: float | None = None

    def __post_init__(self):
        if self.inner_m < 1 or self.outer < 1:
            raise ConfigurationError("inner_m and outer must be >= 1")
        if self.alpha <= 0:
            raise ConfigurationError("alpha must be positive")


def svrg_rate_factor(mu: float, L: float, alpha: float, m: int) -> float:
    """Certified per-outer-round contraction factor
    (1/(1-2 alpha L)) * (1/(m mu alpha) + 2 L alpha); meaningful < 1."""
    return (1.0 / (1.0 - 2.0 * alpha * L)) * (1.0 / (m * mu * alpha) + 2.0 * L * alpha)


def svrg(obj: SmoothObjective, x0, config: SvrgConfig, seed: int,
         store_points: bool = False) -> IterateTrace:
    """Variance-reduced stochastic gradient over a finite sum.

    Inner update x <- x - alpha*(grad f_i(x) - grad f_i(snapshot) + anchor)
    with the anchor the full gradient at the snapshot; after m inner steps
    the next snapshot is drawn uniformly from the round's m inner iterates.
    The trace records one row per outer round (the drawn offset lands in the
    index column)."""
    comps = obj.components
    if not comps:
        raise ConfigurationError("variance reduction needs finite-sum components")
    n = len(comps)
    comp_L = max(f.lipschitz_L for f in comps)
    if config.alpha * 2.0 * comp_L >= 2.0:
        raise ConfigurationError("need alpha < 2/L for the largest component constant")
    meta = {"alpha": config.alpha, "m": config.inner_m, "component_L": comp_L,
            "n_components": n, "d": obj.d}
    if config.mu is not None:
        rho = svrg_rate_factor(config.mu, comp_L, config.alpha, config.inner_m)
        meta["rate_factor"] = rho
        if not (0.0 < rho < 1.0) or config.alpha * 2.0 * comp_L >= 1.0:
            meta["warning"] = "contraction factor >= 1: rate not certifiable"
    x0 = np.asarray(x0, dtype=float)
    kern = backend.kernels()
    qst = quadsum_terms(obj)
    qt = quad_terms(obj)
    if kern is not None and qst is not None and qt is not None:
        values, idx, pts = kern.svrg_quadsum(
            qst[0], qst[1], qst[2], qt[0], qt[1], qt[2], x0.copy(),
            config.inner_m, config.alpha, config.outer, np.uint64(seed & MASK64))
    else:
        rng = Xoshiro256(seed)
        snapshot = x0.copy()
        anchor = obj.gradient(snapshot)
        values = np.empty(config.outer + 1)
        idx = np.full(config.outer + 1, -1, dtype=np.int64)
        pts = np.empty((config.outer + 1, obj.d))
        values[0] = obj.value(snapshot)
        pts[0] = snapshot
        inner = np.empty((config.inner_m, obj.d))
        for s in range(1, config.outer + 1):
            x = snapshot.copy()
            for t in range(config.inner_m):
                i = rng.next_index(n)
                x = x - config.alpha * (comps[i].gradient(x)
                                        - comps[i].gradient(snapshot) + anchor)
                inner[t] = x
            j = rng.next_index(config.inner_m)
            snapshot = inner[j].copy()
            anchor = obj.gradient(snapshot)
            values[s] = obj.value(snapshot)
            idx[s] = j
            pts[s] = snapshot
    steps = np.full(config.outer + 1, config.alpha)
    steps[0] = 0.0
    return make_trace(np.arange(config.outer + 1),
                      _gaps_from_values(values, obj.optimum_value),
                      steps, idx, seed, "svrg", obj.tag, values=values,
                      points=pts if store_points else None, meta=meta)


def run_trials(runner, trials: int, base_seed: int) -> list[IterateTrace]:
    """Independent seeded repeats: trial t runs with seed base_seed + t."""
    return [runner(trial_seed(base_seed, t)) for t in range(trials)]
