"""Model problems: oracles, invariants, builders, serialization."""

import numpy as np
import pytest

from pllab import (ConfigurationError, InvexExample, L1LeastSquares,
                   LeastSquares, LogisticRegression, QuadraticObjective,
                   SvmDual, build_rank_deficient_ls, forward_backward_step,
                   gradient_descent, problem_from_config, problem_to_config,
                   svm_dual_from_data)
from pllab.rng import Xoshiro256


def test_rank_deficient_builder_rank_and_oracles():
    ls, info = build_rank_deficient_ls(5, 3, 2, seed=4)
    assert np.linalg.matrix_rank(ls.A) == 2
    assert info["rank"] == 2
    # eigen-oracle consistency: mu = theta^2 (halved form), L = sigma_max^2
    sv = np.linalg.svd(ls.A, compute_uv=False)
    assert info["theta"] == pytest.approx(sv[1], rel=1e-12)
    assert info["mu"] == pytest.approx(sv[1] ** 2, rel=1e-12)
    assert info["L"] == pytest.approx(sv[0] ** 2, rel=1e-10)
    # gradient vanishes on a whole affine line: translate x* along the null space
    null = ls._ls_null
    assert null.shape[1] == 1
    x_line = ls._x_star + 3.7 * null[:, 0]
    assert np.linalg.norm(ls.gradient(x_line)) <= 1e-10


def test_rank_deficient_builder_rejects_bad_shapes():
    with pytest.raises(ConfigurationError):
        build_rank_deficient_ls(5, 3, 3, seed=0)
    with pytest.raises(ConfigurationError):
        build_rank_deficient_ls(5, 3, 0, seed=0)


def test_diag_degenerate_ls_one_step_convergence():
    # A = diag(1,0), b = 0: mu = L = theta = 1; one full-gradient step with
    # step 1 zeroes the determined coordinate while the free one never moves
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    ls = LeastSquares(A, np.zeros(2))
    assert ls.pl_constant == pytest.approx(1.0)
    assert ls.lipschitz_L == pytest.approx(1.0)
    assert ls.theta == pytest.approx(1.0)
    tr = gradient_descent(ls, [1.0, 1.0], 3, store_points=True)
    assert tr.gaps[1] == 0.0
    x_star = np.zeros(2)
    dists = np.linalg.norm(tr.points - x_star, axis=1)
    assert np.all(dists[1:] == 1.0)


def test_least_squares_fstar_matches_residual_oracle():
    rng = Xoshiro256(21)
    A = np.array([[rng.next_normal() for _ in range(4)] for _ in range(7)])
    b = rng.normal_vector(7)
    for halved in (True, False):
        ls = LeastSquares(A, b, halved=halved)
        assert ls.optimum_value == pytest.approx(ls.residual_value(ls._x_star),
                                                 rel=1e-10, abs=1e-12)
        assert np.linalg.norm(ls.gradient(ls._x_star)) <= 1e-8


def test_least_squares_pl_inequality_sampled():
    ls, info = build_rank_deficient_ls(20, 10, 6, seed=17)
    mu = info["mu"]
    rng = Xoshiro256(23)
    for _ in range(10_000):
        x = rng.uniform_vector(-5, 5, 10)
        g = ls.gradient(x)
        lhs = 0.5 * float(g @ g) - mu * (ls.value(x) - ls.optimum_value)
        assert lhs >= -1e-10 * (1.0 + abs(ls.value(x)))


def test_logistic_midpoint_convexity_and_lower_bound():
    rng = Xoshiro256(29)
    feats = np.array([[rng.next_normal() for _ in range(3)] for _ in range(8)])
    labels = np.array([1.0, -1.0] * 4)
    obj = LogisticRegression(feats, labels)
    for _ in range(100):
        x = rng.uniform_vector(-3, 3, 3)
        y = rng.uniform_vector(-3, 3, 3)
        mid = obj.value(0.5 * (x + y))
        assert mid <= 0.5 * (obj.value(x) + obj.value(y)) + 1e-12
        assert obj.value(x) > 0.0


def test_logistic_label_validation():
    with pytest.raises(ConfigurationError):
        LogisticRegression(np.ones((2, 1)), np.array([1.0, 2.0]))


def test_logistic_newton_optimum():
    feats = np.array([[1.0, 0.5], [-0.8, 1.2], [0.3, -1.1], [-0.2, -0.7],
                      [1.4, -0.3], [-1.1, 0.4], [0.6, 1.3], [-0.5, -1.4]])
    labels = np.array([1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0])
    obj = LogisticRegression(feats, labels, compute_optimum=True)
    assert obj.optimum_value is not None
    x_star = obj.project_to_solutions(np.zeros(2))
    assert np.linalg.norm(obj.gradient(x_star)) <= 1e-10


def test_invex_example_shape():
    obj = InvexExample()
    assert obj.value([0.0]) == 0.0
    rng = Xoshiro256(31)
    for _ in range(200):
        t = -10 + 20 * rng.next_unit()
        if abs(t) > 1e-8:
            assert obj.value([t]) > 0.0
    # gradient-domination constant 1/32 on a dense grid
    grid = np.linspace(-20, 20, 40001)
    grid = grid[np.abs(grid) > 1e-10]
    ratios = []
    for t in grid:
        g = obj.gradient([t])[0]
        ratios.append(0.5 * g * g / obj.value([t]))
    assert min(ratios) >= 1.0 / 32.0
    # non-convex stretch inside [1, 2]
    assert min(obj.curvature(t) for t in np.linspace(1, 2, 200)) < 0.0


def test_l1_least_squares_optimum_crosscheck():
    rng = Xoshiro256(37)
    A = np.array([[rng.next_normal() for _ in range(5)] for _ in range(8)])
    b = rng.normal_vector(8)
    prob = L1LeastSquares(A, b, 0.4)
    assert prob.optimality_residual <= 1e-8
    x = prob.x_star
    y = forward_backward_step(prob, x, prob.smooth.lipschitz_L)
    assert np.linalg.norm(x - y) <= 1e-8
    # diagonal instance: closed-form soft-threshold solution
    easy = L1LeastSquares(np.eye(2), np.array([3.0, 0.0]), 1.0)
    assert easy.x_star == pytest.approx([2.0, 0.0], abs=1e-12)
    assert easy.optimum_value == pytest.approx(2.5, abs=1e-12)


def test_svm_dual_construction():
    # identical points with opposite labels: rank-1 Gram
    sd = svm_dual_from_data([[1.0, 2.0], [1.0, 2.0]], [1.0, -1.0], 1.0, 5.0)
    assert np.linalg.matrix_rank(sd.M) == 1
    # 1-D instance: minimizer min(1, U)
    one = svm_dual_from_data([[1.0]], [1.0], 1.0, 10.0)
    assert one.x_star == pytest.approx([1.0], abs=1e-10)
    capped = svm_dual_from_data([[1.0]], [1.0], 1.0, 0.5)
    assert capped.x_star == pytest.approx([0.5], abs=1e-12)
    # random 10-point instance stays PSD
    rng = Xoshiro256(41)
    pts = np.array([[rng.next_normal() for _ in range(3)] for _ in range(10)])
    labels = np.array([1.0 if rng.next_unit() < 0.5 else -1.0 for _ in range(10)])
    sd10 = svm_dual_from_data(pts, labels, 2.0, 1.0)
    assert np.linalg.eigvalsh(sd10.M).min() >= -1e-10
    for _ in range(100):
        v = rng.normal_vector(10)
        assert v @ (sd10.M @ v) >= -1e-10 * (1 + v @ v)


def test_svm_dual_validation():
    with pytest.raises(ConfigurationError):
        svm_dual_from_data(np.empty((0, 2)), np.empty(0), 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        SvmDual(-np.eye(2), 1.0)


def test_problem_config_roundtrip():
    rng = Xoshiro256(43)
    A = np.array([[rng.next_normal() for _ in range(3)] for _ in range(5)])
    b = rng.normal_vector(5)
    for problem in (LeastSquares(A, b), InvexExample(),
                    L1LeastSquares(A, b, 0.3),
                    QuadraticObjective(np.diag([1.0, 2.0]), np.array([0.5, -1.0])),
                    svm_dual_from_data(A, np.array([1., -1., 1., -1., 1.]), 1.0, 2.0)):
        cfg = problem_to_config(problem)
        back = problem_from_config(cfg)
        x = rng.uniform_vector(-2, 2, problem.d)
        assert back.value(x) == pytest.approx(problem.value(x), rel=1e-12)


def test_problem_from_config_unknown_kind():
    with pytest.raises(ConfigurationError):
        problem_from_config({"kind": "adam"})
