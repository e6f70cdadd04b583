"""Built-in experiment specs.

Each builder returns a plain spec dict (JSON-equivalent) with embedded data
and seeds, so demo runs are deterministic and the files they write are
byte-identical across reruns. Matrices that need structure (controlled
spectra, labelled point sets) are synthesized here with the package RNG and
embedded as literals.
"""

from __future__ import annotations

import numpy as np

from .rng import Xoshiro256


def _orthonormal(rng: Xoshiro256, rows: int, cols: int) -> np.ndarray:
    G = np.array([[rng.next_normal() for _ in range(cols)] for _ in range(rows)])
    Q, _ = np.linalg.qr(G)
    return Q


def _spectrum_matrix(seed: int, m: int, d: int, sv) -> np.ndarray:
    """m x d matrix with prescribed singular values."""
    rng = Xoshiro256(seed)
    sv = np.asarray(sv, dtype=float)
    r = sv.size
    U = _orthonormal(rng, m, r)
    V = _orthonormal(rng, d, r)
    return (U * sv) @ V.T


def _invex_gd() -> dict:
    return {
        "problem": {"kind": "invex"},
        "x0": [2.0],
        "solvers": [{"algorithm": "gd", "iters": 500}],
        "certify": [{"theorem": "T1", "solver": 0, "mu": 1.0 / 32.0, "L": 8.0}],
    }


def _rankdef_ls_gd() -> dict:
    return {
        "problem": {"kind": "rank_deficient_ls", "m": 20, "d": 10, "rank": 6,
                    "seed": 11},
        "solvers": [{"algorithm": "gd", "iters": 60}],
        "certify": [{"theorem": "T1", "solver": 0, "mu": "oracle", "L": "oracle"}],
    }


def _cd_random_vs_gs() -> dict:
    return {
        "problem": {"kind": "diag_quadratic", "q": [1.0, 2.0, 4.0, 8.0, 16.0]},
        "x0": [3.0, 3.0, 3.0, 3.0, 3.0],
        "solvers": [
            {"algorithm": "cd-random", "iters": 250, "trials": 2000, "seed": 7},
            {"algorithm": "cd-gs", "iters": 400},
        ],
        "conditions": {"lo": -4.0, "hi": 4.0, "count": 3000, "seed": 13,
                       "include_iterates": True},
        "certify": [
            {"theorem": "T3", "solver": 0, "mu": "oracle", "L": "oracle",
             "checkpoints": [10, 50, 250]},
            {"theorem": "GS", "solver": 1, "mu": "estimate", "L": "oracle"},
        ],
    }


def _sign_gd() -> dict:
    return {
        "problem": {"kind": "diag_quadratic", "q": [1.0, 2.0, 4.0, 8.0]},
        "x0": [1.5, 1.5, 1.5, 1.5],
        "solvers": [{"algorithm": "sign-gd", "iters": 200}],
        "conditions": {"lo": -3.0, "hi": 3.0, "count": 2000, "seed": 19,
                       "include_iterates": True},
        "certify": [{"theorem": "SIGN", "solver": 0, "mu": "estimate",
                     "checkpoints": [1, 5, 25, 80]}],
    }


def _sgd_two_schedules() -> dict:
    # two univariate components 0.5*q_i*(x - c_i)^2; the mean has mu = L = 2
    qs = [1.0, 3.0]
    cs = [-1.0, 2.0]
    comps_Q = [[[q]] for q in qs]
    comps_c = [[-q * c] for q, c in zip(qs, cs)]
    comps_r = [0.5 * q * c * c for q, c in zip(qs, cs)]
    return {
        "problem": {"kind": "quadratic_sum", "Qs": comps_Q, "cs": comps_c,
                    "rs": comps_r},
        "x0": [3.0],
        "solvers": [
            {"algorithm": "sgd", "iters": 10000, "trials": 200, "seed": 5,
             "schedule": {"kind": "decreasing"}},
            {"algorithm": "sgd", "iters": 4000, "trials": 200, "seed": 6,
             "schedule": {"kind": "constant", "alpha": 0.125}},
        ],
        "certify": [
            {"theorem": "T4-dec", "solver": 0, "mu": "oracle", "L": "oracle",
             "c2": "visited", "checkpoints": [100, 1000, 10000]},
            {"theorem": "T4-const", "solver": 1, "mu": "oracle", "L": "oracle",
             "c2": "visited", "checkpoints": [1, 10, 100, 1000, 4000]},
        ],
    }


def _svrg_finite_sum() -> dict:
    A = _spectrum_matrix(23, 10, 4, np.linspace(1.4, 1.0, 4))
    rng = Xoshiro256(24)
    b = rng.normal_vector(10)
    return {
        "problem": {"kind": "least_squares", "A": A.tolist(), "b": b.tolist(),
                    "halved": True, "finite_sum": True},
        "x0": [2.0, 2.0, 2.0, 2.0],
        "solvers": [{"algorithm": "svrg", "inner_m": 500, "outer": 8,
                     "alpha_over_compL": 0.1, "trials": 100, "seed": 3}],
        "certify": [{"theorem": "SVRG", "solver": 0, "mu": "oracle"}],
    }


def _l1ls_proxgrad() -> dict:
    A = _spectrum_matrix(31, 12, 8, np.linspace(2.0, 0.25, 8))
    rng = Xoshiro256(32)
    b = rng.normal_vector(12)
    lam = 0.25 * float(np.max(np.abs(A.T @ b)))
    return {
        "problem": {"kind": "l1_least_squares", "A": A.tolist(),
                    "b": b.tolist(), "lam": lam},
        "solvers": [{"algorithm": "prox-gd", "iters": 150}],
        "conditions": {"lo": -3.0, "hi": 3.0, "count": 3000, "seed": 17,
                       "include_iterates": True},
        "certify": [{"theorem": "T5", "solver": 0, "mu": "estimate",
                     "L": "oracle"}],
    }


def _svm_dual_proxcd() -> dict:
    rng = Xoshiro256(41)
    n, d = 20, 6
    points = np.array([[rng.next_normal() for _ in range(d)] for _ in range(n)])
    labels = np.array([1.0 if rng.next_unit() < 0.5 else -1.0 for _ in range(n)])
    return {
        "problem": {"kind": "svm_dual_data", "points": points.tolist(),
                    "labels": labels.tolist(), "lam_svm": 4.0, "U": 1.0},
        "x0": [0.5] * n,
        "solvers": [{"algorithm": "prox-cd", "iters": 300, "trials": 500,
                     "seed": 9}],
        "conditions": {"lo": 0.0, "hi": 1.0, "count": 2000, "seed": 21,
                       "include_iterates": True},
        "certify": [{"theorem": "T6", "solver": 0, "mu": "estimate",
                     "L": "oracle", "checkpoints": [1, 5, 25, 125, 300]}],
    }


def _condition_chain() -> dict:
    logistic_pts = [[1.0, 0.5], [-0.8, 1.2], [0.3, -1.1], [-0.2, -0.7],
                    [1.4, -0.3], [-1.1, 0.4], [0.6, 1.3], [-0.5, -1.4]]
    logistic_labels = [1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0]
    svm_pts = [[1.0, 0.2, -0.4], [-0.3, 1.1, 0.5], [0.6, -0.7, 1.2]]
    svm_labels = [1.0, -1.0, 1.0]
    l1_A = _spectrum_matrix(51, 8, 5, np.linspace(1.8, 0.6, 5))
    l1_b = Xoshiro256(52).normal_vector(8)
    return {
        "problems": [
            {"kind": "rank_deficient_ls", "m": 12, "d": 6, "rank": 4, "seed": 2},
            {"kind": "logistic", "features": logistic_pts,
             "labels": logistic_labels, "compute_optimum": True},
            {"kind": "invex"},
            {"kind": "l1_least_squares", "A": l1_A.tolist(),
             "b": l1_b.tolist(), "lam": 0.3},
            {"kind": "svm_dual_data", "points": svm_pts, "labels": svm_labels,
             "lam_svm": 1.0, "U": 2.0},
        ],
        "conditions": {"lo": -3.0, "hi": 3.0, "count": 4000, "seed": 29,
                       "chain": True},
    }


_BUILDERS = {
    "invex-gd": _invex_gd,
    "rankdef-ls-gd": _rankdef_ls_gd,
    "cd-random-vs-gs": _cd_random_vs_gs,
    "sign-gd": _sign_gd,
    "sgd-two-schedules": _sgd_two_schedules,
    "svrg-finite-sum": _svrg_finite_sum,
    "l1ls-proxgrad": _l1ls_proxgrad,
    "svm-dual-proxcd": _svm_dual_proxcd,
    "condition-chain": _condition_chain,
}


def list_demos() -> list[str]:
    return sorted(_BUILDERS)


def demo_spec(name: str) -> dict:
    if name not in _BUILDERS:
        raise KeyError(name)
    return _BUILDERS[name]()
