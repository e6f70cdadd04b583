"""Model problems with exact or oracle-computed optima, projections, and
Lipschitz metadata.

Quadratic-form problems carry their spectral oracles (L, per-coordinate
constants, the smallest positive curvature) from one eigendecomposition;
least squares additionally keeps the singular spectrum of A so solution-set
projections are exact. Composite problems without a closed-form optimum
(l1-regularized least squares, the box-constrained dual) pre-solve
themselves to machine-precision stationarity at construction and record
the achieved optimality residual.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError
from .model import CompositeProblem, SmoothObjective
from .prox import box, l1
from .rng import Xoshiro256

_EIG_REL_TOL = 1e-12


class QuadraticObjective(SmoothObjective):
    """f(x) = 0.5 x'Qx + c'x + r with spectral metadata.

    Q is symmetrized on input. When f is bounded below, the least-norm
    stationary point provides ``optimum_value`` and the affine solution set
    provides exact projections. ``pl_constant`` is the smallest positive
    eigenvalue of Q (0 when none), which is the sharp gradient-domination
    constant for convex quadratics.
    """

    def __init__(self, Q, c=None, r=0.0, tag="quadratic", components=None):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
            raise ConfigurationError("Q must be a non-empty square matrix")
        self.d = Q.shape[0]
        self.Q = 0.5 * (Q + Q.T)
        self.c = np.zeros(self.d) if c is None else np.asarray(c, dtype=float)
        if self.c.shape != (self.d,):
            raise ConfigurationError("c must match the dimension of Q")
        self.r = float(r)
        self.tag = tag
        self.components = components

        eigvals, eigvecs = np.linalg.eigh(self.Q)
        self._eigvals = eigvals
        self._eigvecs = eigvecs
        scale = float(np.max(np.abs(eigvals))) if self.d else 0.0
        tol = scale * self.d * _EIG_REL_TOL
        self._null_mask = np.abs(eigvals) <= tol
        self.lipschitz_L = scale
        self.coord_lipschitz = np.abs(np.diag(self.Q)).astype(float)
        self.min_eigenvalue = float(eigvals[0]) if self.d else 0.0

        pos = eigvals[(~self._null_mask) & (eigvals > 0)]
        self.pl_constant = float(pos.min()) if pos.size else 0.0

        self._x_star = None
        if self.d and not np.any(eigvals < -tol):
            inv = np.where(self._null_mask, 0.0,
                           1.0 / np.where(self._null_mask, 1.0, eigvals))
            x_star = -eigvecs @ (inv * (eigvecs.T @ self.c))
            resid = self.Q @ x_star + self.c
            if np.linalg.norm(resid) <= 1e-8 * (1.0 + np.linalg.norm(self.c)):
                self._x_star = x_star
                self.optimum_value = float(self.value(x_star))
                self.project_to_solutions = self._project

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * (x @ (self.Q @ x)) + self.c @ x + self.r)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.Q @ x + self.c

    def coord_gradient(self, x, i):
        x = np.asarray(x, dtype=float)
        return float(self.Q[i] @ x + self.c[i])

    def _project(self, x):
        null = self._eigvecs[:, self._null_mask]
        diff = np.asarray(x, dtype=float) - self._x_star
        return self._x_star + null @ (null.T @ diff)

    @property
    def x_star(self):
        return None if self._x_star is None else self._x_star.copy()

    def sign_weights(self) -> np.ndarray:
        """Per-coordinate weights d * sum_j |Q_ij|, sufficient for the
        weighted-norm contract of the sign-step method on quadratics."""
        return self.d * np.abs(self.Q).sum(axis=1)


def diagonal_quadratic(q, tag="diag-quadratic") -> QuadraticObjective:
    return QuadraticObjective(np.diag(np.asarray(q, dtype=float)), tag=tag)


def quadratic_sum(Qs, cs, rs, tag="quadratic-sum") -> QuadraticObjective:
    """Finite sum of quadratic components with uniform weights; the parent
    objective is the exact component mean."""
    Qs = np.asarray(Qs, dtype=float)
    cs = np.asarray(cs, dtype=float)
    rs = np.asarray(rs, dtype=float)
    if not (len(Qs) == len(cs) == len(rs)) or len(Qs) == 0:
        raise ConfigurationError("need matching, non-empty component lists")
    comps = [QuadraticObjective(Qs[i], cs[i], rs[i], tag=f"{tag}-part{i}")
             for i in range(len(Qs))]
    return QuadraticObjective(Qs.mean(axis=0), cs.mean(axis=0),
                              float(rs.mean()), tag=tag, components=comps)


class LeastSquares(QuadraticObjective):
    """Residual objective ||Ax - b||^2, halved (0.5 factor) or not.

    The least-norm solution comes from an SVD-backed solve of A itself
    (not the normal equations), so the solution-set projection and the
    smallest positive singular value ``theta`` are as accurate as the data
    allows. ``finite_sum=True`` attaches one quadratic component per row,
    weighted so the uniform mean reproduces f exactly.
    """

    def __init__(self, A, b, halved=True, finite_sum=False, tag="least-squares"):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ConfigurationError("need A (m,d) and matching b (m,)")
        s = 1.0 if halved else 2.0
        m, d = A.shape
        components = None
        if finite_sum:
            components = []
            for i in range(m):
                a = A[i]
                components.append(QuadraticObjective(
                    s * m * np.outer(a, a), -s * m * b[i] * a,
                    s * 0.5 * m * b[i] * b[i], tag=f"{tag}-row{i}"))
        super().__init__(s * (A.T @ A), -s * (A.T @ b), s * 0.5 * float(b @ b),
                         tag=tag, components=components)
        self.A = A
        self.b = b
        self.halved = bool(halved)

        sv = np.linalg.svd(A, compute_uv=False)
        smax = float(sv[0]) if sv.size else 0.0
        rank_tol = smax * max(A.shape) * np.finfo(float).eps * 10
        nz = sv[sv > rank_tol]
        self.rank = int(nz.size)
        self.theta = float(nz.min()) if nz.size else 0.0
        self.pl_constant = s * self.theta ** 2

        x_ls = np.linalg.lstsq(A, b, rcond=None)[0]
        self._x_star = x_ls
        self.optimum_value = float(self.value(x_ls))
        _, _, Vt = np.linalg.svd(A, full_matrices=True)
        self._ls_null = Vt[self.rank:].T
        self.project_to_solutions = self._project_ls

    def residual_value(self, x):
        """Direct residual evaluation (cross-check for the quadratic form)."""
        s = 1.0 if self.halved else 2.0
        res = self.A @ np.asarray(x, dtype=float) - self.b
        return float(s * 0.5 * (res @ res))

    def _project_ls(self, x):
        diff = np.asarray(x, dtype=float) - self._x_star
        return self._x_star + self._ls_null @ (self._ls_null.T @ diff)


def build_rank_deficient_ls(m: int, d: int, rank: int, seed: int,
                            sv_range=(1.0, 2.0)):
    """Least squares whose A has rank exactly ``rank`` < min(m, d).

    A is assembled from orthonormal factors with prescribed singular values,
    so the gradient vanishes on a whole affine set: the objective has the
    gradient-domination property without strong convexity. Returns the
    problem plus the oracle constants {theta, mu, L, rank} recomputed from
    the spectrum of the assembled matrix.
    """
    if not (1 <= rank < min(m, d)):
        raise ConfigurationError("need 1 <= rank < min(m, d)")
    rng = Xoshiro256(seed)
    G1 = np.array([[rng.next_normal() for _ in range(rank)] for _ in range(m)])
    G2 = np.array([[rng.next_normal() for _ in range(rank)] for _ in range(d)])
    U, _ = np.linalg.qr(G1)
    V, _ = np.linalg.qr(G2)
    sv = np.linspace(sv_range[1], sv_range[0], rank)
    A = (U * sv) @ V.T
    b = rng.normal_vector(m)
    ls = LeastSquares(A, b, halved=True, tag=f"rankdef-ls-{m}x{d}r{rank}")
    info = {"theta": ls.theta, "mu": ls.pl_constant, "L": ls.lipschitz_L,
            "rank": ls.rank}
    return ls, info


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class LogisticRegression(SmoothObjective):
    """sum_i log(1 + exp(b_i a_i'x)) plus an optional 0.5*l2*||x||^2 term.

    Convex, bounded below by 0 when l2 = 0. ``compute_optimum=True`` runs a
    damped Newton solve to machine precision; it succeeds whenever the
    minimum is attained (non-separable data), in which case the unique
    minimizer doubles as the solution-set projection.
    """

    def __init__(self, features, labels, l2=0.0, compute_optimum=False,
                 tag="logistic"):
        A = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=float)
        if A.ndim != 2 or y.shape != (A.shape[0],):
            raise ConfigurationError("need features (n,d) and matching labels")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ConfigurationError("labels must be -1/+1")
        self.B = A * y[:, None]
        self.features = A
        self.labels = y
        self.l2 = float(l2)
        self.d = A.shape[1]
        self.tag = tag
        gram_eigs = np.linalg.eigvalsh(self.B.T @ self.B)
        self.lipschitz_L = 0.25 * float(gram_eigs[-1]) + self.l2
        self.coord_lipschitz = 0.25 * (self.B ** 2).sum(axis=0) + self.l2
        if compute_optimum:
            x_star = self._newton_solve()
            if x_star is not None:
                self._x_star = x_star
                self.optimum_value = float(self.value(x_star))
                self.project_to_solutions = lambda x, xs=x_star: xs.copy()

    def value(self, x):
        x = np.asarray(x, dtype=float)
        z = self.B @ x
        return float(np.logaddexp(0.0, z).sum() + 0.5 * self.l2 * (x @ x))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        z = self.B @ x
        return self.B.T @ _sigmoid(z) + self.l2 * x

    def _newton_solve(self, max_iters=200):
        x = np.zeros(self.d)
        for _ in range(max_iters):
            g = self.gradient(x)
            fx = self.value(x)
            if np.linalg.norm(g) <= 1e-13 * (1.0 + abs(fx)):
                return x
            z = self.B @ x
            s = _sigmoid(z)
            w = s * (1.0 - s)
            H = self.B.T @ (w[:, None] * self.B) + self.l2 * np.eye(self.d)
            try:
                step = np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                return None
            t = 1.0
            target = fx - 1e-4 * t * float(g @ step)
            for _ in range(60):
                if self.value(x - t * step) <= target:
                    break
                t *= 0.5
                target = fx - 1e-4 * t * float(g @ step)
            x = x - t * step
            if np.linalg.norm(x) > 1e8:  # separable data: minimum not attained
                return None
        return None


class InvexExample(SmoothObjective):
    """Univariate t^2 + 3 sin(t)^2: non-convex, every stationary point is
    the global minimum at 0. Curvature 2 + 6 cos(2t) lies in [-4, 8]."""

    d = 1
    lipschitz_L = 8.0
    optimum_value = 0.0
    tag = "invex-1d"

    def __init__(self):
        self.coord_lipschitz = np.array([8.0])
        self.project_to_solutions = lambda x: np.zeros(1)

    def value(self, x):
        t = float(np.asarray(x, dtype=float)[0])
        return t * t + 3.0 * math.sin(t) ** 2

    def gradient(self, x):
        t = float(np.asarray(x, dtype=float)[0])
        return np.array([2.0 * t + 3.0 * math.sin(2.0 * t)])

    def curvature(self, t: float) -> float:
        return 2.0 + 6.0 * math.cos(2.0 * t)

    def sign_weights(self) -> np.ndarray:
        return np.array([8.0])


def _prox_gradient_presolve(problem, x0, tol=1e-13, max_iters=200_000):
    """Drive a composite problem to stationarity: used only to build the
    optimum oracle. Returns (x, achieved fixed-point residual)."""
    smooth, reg = problem.smooth, problem.reg
    L = smooth.lipschitz_L
    x = np.asarray(x0, dtype=float).copy()
    resid = float("inf")
    for _ in range(max_iters):
        g = smooth.gradient(x)
        xn = reg.prox(x - g / L, 1.0 / L)
        resid = float(np.linalg.norm(x - xn))
        x = xn
        if resid <= tol * (1.0 + float(np.linalg.norm(x))):
            break
    return x, resid


class L1LeastSquares(CompositeProblem):
    """0.5*||Ax - b||^2 + lam*||x||_1.

    No closed-form optimum exists; the constructor pre-solves to a
    fixed-point residual near machine precision and records it
    (``optimality_residual``). The near-exact solution acts as a singleton
    solution-set projection.
    """

    def __init__(self, A, b, lam, tag="l1-least-squares"):
        if lam <= 0:
            raise ConfigurationError("regularization weight must be positive")
        smooth = LeastSquares(A, b, halved=True, tag=f"{tag}-smooth")
        super().__init__(smooth, l1(lam), tag=tag)
        self.A = smooth.A
        self.b = smooth.b
        self.lam = float(lam)
        x_star, resid = _prox_gradient_presolve(self, np.zeros(self.d))
        self.x_star = x_star
        self.optimality_residual = resid
        self.optimum_value = float(self.value(x_star))
        self.project_to_solutions = lambda x, xs=x_star: xs.copy()


class SvmDual(CompositeProblem):
    """Box-constrained quadratic 0.5 w'Mw - sum(w) over [0, U]^n.

    M must be positive semidefinite. The box is compact so the optimum is
    always attained; it is pre-solved at construction like the l1 problem.
    """

    def __init__(self, M, U, tag="svm-dual"):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ConfigurationError("M must be square")
        if U <= 0:
            raise ConfigurationError("box bound U must be positive")
        n = M.shape[0]
        smooth = QuadraticObjective(M, -np.ones(n), tag=f"{tag}-smooth")
        if smooth.min_eigenvalue < -1e-8 * max(1.0, smooth.lipschitz_L):
            raise ConfigurationError("M must be positive semidefinite")
        super().__init__(smooth, box(0.0, float(U)), tag=tag)
        self.M = smooth.Q
        self.U = float(U)
        self.n = n
        x_star, resid = _prox_gradient_presolve(self, np.full(n, 0.5 * self.U))
        self.x_star = x_star
        self.optimality_residual = resid
        self.optimum_value = float(self.value(x_star))
        self.project_to_solutions = lambda x, xs=x_star: xs.copy()


def svm_dual_from_data(points, labels, lam_svm: float, U: float,
                       tag="svm-dual") -> SvmDual:
    """Dual box-constrained quadratic from labelled points:
    M_ij = b_i b_j a_i'a_j / lam_svm (Gram construction, PSD by design)."""
    A = np.asarray(points, dtype=float)
    y = np.asarray(labels, dtype=float)
    if A.size == 0 or y.size == 0:
        raise ConfigurationError("need at least one data point")
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ConfigurationError("need points (n,d) and matching labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ConfigurationError("labels must be -1/+1")
    if lam_svm <= 0:
        raise ConfigurationError("lam_svm must be positive")
    M = np.outer(y, y) * (A @ A.T) / lam_svm
    return SvmDual(M, U, tag=tag)


# --- kernel dispatch helpers -------------------------------------------------

def quad_terms(obj):
    """(Q, c, r) when the objective is a quadratic form, else None."""
    if isinstance(obj, QuadraticObjective):
        return obj.Q, obj.c, obj.r
    return None


def quadsum_terms(obj):
    """Stacked (Qs, cs, rs) when every finite-sum component is quadratic."""
    comps = obj.components
    if not comps or not all(isinstance(f, QuadraticObjective) for f in comps):
        return None
    Qs = np.stack([f.Q for f in comps])
    cs = np.stack([f.c for f in comps])
    rs = np.array([f.r for f in comps])
    return Qs, cs, rs


# --- serialization -----------------------------------------------------------

def problem_to_config(problem) -> dict:
    """Plain-JSON descriptor {kind, row-major matrices, params}."""
    if isinstance(problem, L1LeastSquares):
        return {"kind": "l1_least_squares", "A": problem.A.tolist(),
                "b": problem.b.tolist(), "lam": problem.lam}
    if isinstance(problem, SvmDual):
        return {"kind": "svm_dual", "M": problem.M.tolist(), "U": problem.U}
    if isinstance(problem, LeastSquares):
        return {"kind": "least_squares", "A": problem.A.tolist(),
                "b": problem.b.tolist(), "halved": problem.halved,
                "finite_sum": problem.components is not None}
    if isinstance(problem, LogisticRegression):
        return {"kind": "logistic", "features": problem.features.tolist(),
                "labels": problem.labels.tolist(), "l2": problem.l2,
                "compute_optimum": problem.optimum_value is not None}
    if isinstance(problem, InvexExample):
        return {"kind": "invex"}
    if isinstance(problem, QuadraticObjective):
        return {"kind": "quadratic", "Q": problem.Q.tolist(),
                "c": problem.c.tolist(), "r": problem.r}
    raise ConfigurationError(f"cannot serialize problem of type {type(problem)!r}")


def problem_from_config(cfg: dict):
    """Inverse of ``problem_to_config``; also accepts generator descriptors
    ('rank_deficient_ls', 'svm_dual_data') that synthesize the instance."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigurationError("problem descriptor must be a dict with 'kind'")
    kind = cfg["kind"]
    if kind == "quadratic":
        return QuadraticObjective(np.asarray(cfg["Q"], dtype=float),
                                  None if cfg.get("c") is None else np.asarray(cfg["c"], dtype=float),
                                  cfg.get("r", 0.0))
    if kind == "diag_quadratic":
        return diagonal_quadratic(np.asarray(cfg["q"], dtype=float))
    if kind == "quadratic_sum":
        return quadratic_sum(cfg["Qs"], cfg["cs"], cfg["rs"])
    if kind == "least_squares":
        return LeastSquares(np.asarray(cfg["A"], dtype=float),
                            np.asarray(cfg["b"], dtype=float),
                            halved=cfg.get("halved", True),
                            finite_sum=cfg.get("finite_sum", False))
    if kind == "rank_deficient_ls":
        ls, _ = build_rank_deficient_ls(cfg["m"], cfg["d"], cfg["rank"],
                                        cfg.get("seed", 0))
        return ls
    if kind == "logistic":
        return LogisticRegression(np.asarray(cfg["features"], dtype=float),
                                  np.asarray(cfg["labels"], dtype=float),
                                  l2=cfg.get("l2", 0.0),
                                  compute_optimum=cfg.get("compute_optimum", False))
    if kind == "invex":
        return InvexExample()
    if kind == "l1_least_squares":
        return L1LeastSquares(np.asarray(cfg["A"], dtype=float),
                              np.asarray(cfg["b"], dtype=float), cfg["lam"])
    if kind == "svm_dual":
        return SvmDual(np.asarray(cfg["M"], dtype=float), cfg["U"])
    if kind == "svm_dual_data":
        return svm_dual_from_data(np.asarray(cfg["points"], dtype=float),
                                  np.asarray(cfg["labels"], dtype=float),
                                  cfg["lam_svm"], cfg["U"])
    raise ConfigurationError(f"unknown problem kind {kind!r}")
