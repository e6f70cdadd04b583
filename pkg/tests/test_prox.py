"""Proximal catalog exactness and the decrease-measure identities."""

import numpy as np
import pytest

from pllab import (CompositeProblem, ConfigurationError, DomainError,
                   L1LeastSquares, QuadraticObjective, box, fb_envelope,
                   forward_backward_step, l1, prox_decrease, prox_residual,
                   zero)
from pllab.rng import Xoshiro256


def _random_problem(rng, d=4, reg_kind="l1"):
    G = np.array([[rng.next_normal() for _ in range(d)] for _ in range(d + 2)])
    Q = G.T @ G / (d + 2)
    c = rng.normal_vector(d)
    smooth = QuadraticObjective(Q, c)
    if reg_kind == "l1":
        reg = l1(0.3 + rng.next_unit())
    elif reg_kind == "box":
        reg = box(-1.5, 1.5)
    else:
        reg = zero()
    return CompositeProblem(smooth, reg)


def test_l1_prox_formula_exact():
    reg = l1(2.0)
    v = np.array([3.0, -0.5, 0.1, -7.0])
    got = reg.prox(v, 0.5)
    want = np.sign(v) * np.maximum(np.abs(v) - 1.0, 0.0)
    assert np.array_equal(got, want)
    assert reg.prox_coord(3.0, 0.5, 0) == 2.0
    assert reg.prox_coord(-0.5, 0.5, 1) == 0.0


def test_box_prox_is_exact_clamp():
    reg = box(np.array([0.0, -1.0]), np.array([2.0, 1.0]))
    got = reg.prox(np.array([-5.0, 0.5]), 1.0)
    assert np.array_equal(got, np.array([0.0, 0.5]))
    assert reg.value(got) == 0.0
    assert reg.value(np.array([3.0, 0.0])) == np.inf


def test_zero_prox_identity():
    reg = zero()
    v = np.array([1.0, -2.0])
    out = reg.prox(v, 3.0)
    assert np.array_equal(out, v)
    out[0] = 99.0  # prox returns a fresh array
    assert v[0] == 1.0


def test_prox_firmly_nonexpansive_sampled():
    rng = Xoshiro256(51)
    for reg in (l1(0.7), box(-1.0, 2.0), zero()):
        for _ in range(300):
            u = rng.uniform_vector(-5, 5, 3)
            v = rng.uniform_vector(-5, 5, 3)
            t = 0.1 + 2.0 * rng.next_unit()
            pu, pv = reg.prox(u, t), reg.prox(v, t)
            assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-14


def test_separable_prox_matches_vector_prox_exactly():
    rng = Xoshiro256(53)
    for reg in (l1(0.7), box(np.array([-1.0, 0.0, -2.0]), np.array([1.0, 3.0, 0.5]))):
        for _ in range(200):
            v = rng.uniform_vector(-4, 4, 3)
            t = 0.1 + rng.next_unit()
            full = reg.prox(v, t)
            per = np.array([reg.prox_coord(v[i], t, i) for i in range(3)])
            assert np.array_equal(full, per)


def test_forward_backward_step_examples():
    # zero regularizer: plain gradient step
    smooth = QuadraticObjective(np.eye(2))
    prob = CompositeProblem(smooth, zero())
    x = np.array([2.0, -4.0])
    y = forward_backward_step(prob, x, 2.0)
    assert np.array_equal(y, x - smooth.gradient(x) / 2.0)
    # soft threshold at a stationary smooth point: f = 0.5||x-c||^2, x = c
    c = np.array([3.0])
    prob2 = CompositeProblem(QuadraticObjective(np.eye(1), -c), l1(1.0))
    y2 = forward_backward_step(prob2, c, 1.0)
    assert y2 == pytest.approx([2.0], abs=1e-15)
    # interior stationary point of a box problem is a fixed point
    prob3 = CompositeProblem(QuadraticObjective(np.eye(1), np.array([-1.0])),
                             box(0.0, 10.0))
    y3 = forward_backward_step(prob3, np.array([1.0]), 1.0)
    assert np.array_equal(y3, np.array([1.0]))


def test_forward_backward_step_requires_positive_curvature():
    prob = CompositeProblem(QuadraticObjective(np.eye(1)), zero())
    with pytest.raises(ConfigurationError):
        forward_backward_step(prob, [1.0], 0.0)


def test_prox_decrease_zero_reg_equals_grad_norm_sq():
    rng = Xoshiro256(59)
    smooth = QuadraticObjective(np.diag([1.0, 3.0]), np.array([0.5, -2.0]))
    prob = CompositeProblem(smooth, zero())
    for lam in (0.5, 1.0, 3.0, 17.0):
        for _ in range(50):
            x = rng.uniform_vector(-4, 4, 2)
            g = smooth.gradient(x)
            assert prox_decrease(prob, x, lam) == float(g @ g)


def test_prox_decrease_univariate_frozen_value():
    # f = 0.5 x^2, g = |.|, x = 3, lam = 1: enumeration oracle gives the
    # surrogate minimum -7.5 at y = 0, hence the measure is 15
    prob = CompositeProblem(QuadraticObjective(np.eye(1)), l1(1.0))
    x = np.array([3.0])
    ys = np.linspace(-8.0, 8.0, 1_600_001)
    surr = 3.0 * (ys - 3.0) + 0.5 * (ys - 3.0) ** 2 + np.abs(ys) - 3.0
    assert surr.min() == pytest.approx(-7.5, abs=1e-9)
    got = prox_decrease(prob, x, 1.0)
    assert got == pytest.approx(-2.0 * surr.min(), abs=1e-9)
    assert got == pytest.approx(15.0, abs=1e-12)


def test_prox_decrease_zero_at_stationary_point():
    easy = L1LeastSquares(np.eye(2), np.array([3.0, 0.0]), 1.0)
    assert prox_decrease(easy, easy.x_star, easy.smooth.lipschitz_L) \
        == pytest.approx(0.0, abs=1e-12)


def test_prox_decrease_infeasible_point_is_domain_error():
    prob = CompositeProblem(QuadraticObjective(np.eye(1)), box(0.0, 1.0))
    with pytest.raises(DomainError):
        prox_decrease(prob, np.array([2.0]), 1.0)


def test_prox_decrease_nonnegative_and_beats_random_candidates():
    rng = Xoshiro256(61)
    for kind in ("l1", "box", "zero"):
        prob = _random_problem(rng, reg_kind=kind)
        for _ in range(10):
            x = prob.reg.prox(rng.uniform_vector(-1.2, 1.2, 4), 1.0)
            lam = 0.3 + 4.0 * rng.next_unit()
            d = prox_decrease(prob, x, lam)
            assert d >= -1e-12
            g = prob.smooth.gradient(x)
            gx = prob.reg.value(x)
            best = -d / (2.0 * lam)
            for _ in range(1000):
                y = rng.uniform_vector(-3, 3, 4)
                cand = float(g @ (y - x) + 0.5 * lam * np.sum((y - x) ** 2)
                             + prob.reg.value(y) - gx)
                assert cand >= best - 1e-10


def test_residual_identity_and_reduction():
    rng = Xoshiro256(67)
    for kind in ("l1", "box"):
        prob = _random_problem(rng, reg_kind=kind)
        for _ in range(100):
            x = prob.reg.prox(rng.uniform_vector(-1.2, 1.2, 4), 1.0)
            lam = 0.2 + 3.0 * rng.next_unit()
            g = prob.smooth.gradient(x)
            lhs = float(g @ g) - prox_residual(prob.reg, lam, x, g)
            assert lhs == pytest.approx(prox_decrease(prob, x, lam),
                                        rel=1e-12, abs=1e-12)
    # zero regularizer: residual vanishes identically
    assert prox_residual(zero(), 2.0, np.array([1.0]), np.array([5.0])) == 0.0


def test_residual_monotone_decreasing_in_curvature():
    rng = Xoshiro256(71)
    for kind in ("l1", "box", "zero"):
        prob = _random_problem(rng, reg_kind=kind)
        for _ in range(100):
            x = prob.reg.prox(rng.uniform_vector(-1.2, 1.2, 4), 1.0)
            a = rng.normal_vector(4)
            l1_, l2_ = sorted((0.1 + 4 * rng.next_unit(), 0.1 + 4 * rng.next_unit()))
            r1 = prox_residual(prob.reg, l1_, x, a)
            r2 = prox_residual(prob.reg, l2_, x, a)
            assert r1 >= r2 - 1e-10 * (1.0 + abs(r1))


def test_decrease_monotone_in_curvature_1000_triples():
    rng = Xoshiro256(73)
    checked = 0
    while checked < 1000:
        prob = _random_problem(rng, reg_kind=("l1", "box", "zero")[checked % 3])
        x = prob.reg.prox(rng.uniform_vector(-1.2, 1.2, 4), 1.0)
        lo, hi = sorted((0.05 + 5 * rng.next_unit(), 0.05 + 5 * rng.next_unit()))
        d_lo = prox_decrease(prob, x, lo)
        d_hi = prox_decrease(prob, x, hi)
        assert d_hi >= d_lo - 1e-10 * (1.0 + abs(d_lo))
        checked += 1


def test_envelope_identity_and_stationary_case():
    rng = Xoshiro256(79)
    prob = _random_problem(rng, reg_kind="l1")
    for _ in range(200):
        x = rng.uniform_vector(-2, 2, 4)
        lam = 0.5 + 4.0 * rng.next_unit()
        env = fb_envelope(prob, x, lam)
        F = prob.value(x)
        lhs = prox_decrease(prob, x, lam)
        assert lhs == pytest.approx(2.0 * lam * (F - env), rel=1e-10, abs=1e-10)
    easy = L1LeastSquares(np.eye(2), np.array([3.0, 0.0]), 1.0)
    L = easy.smooth.lipschitz_L
    assert fb_envelope(easy, easy.x_star, L) == pytest.approx(
        easy.value(easy.x_star), abs=1e-12)


def test_envelope_distance_bound_with_known_solution():
    # F_{1/L}(x) - F* <= 2L ||x* - x||^2 on a problem with closed-form x*
    easy = L1LeastSquares(np.eye(2), np.array([3.0, 0.0]), 1.0)
    L = easy.smooth.lipschitz_L
    rng = Xoshiro256(83)
    for _ in range(500):
        x = rng.uniform_vector(-4, 4, 2)
        env = fb_envelope(easy, x, L)
        dist2 = float(np.sum((easy.x_star - x) ** 2))
        assert env - easy.optimum_value <= 2.0 * L * dist2 + 1e-12
