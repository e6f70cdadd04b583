"""Proximal machinery.

The catalog covers the three regularizers the solvers need exactly:
scaled l1 (soft threshold), a box indicator (clamp), and the constant
zero function (identity). On top of it sit the forward-backward step, the
curvature-indexed decrease measure used by the composite rate analysis,
its residual form, and the step-surrogate envelope. All minimizations go
through the exact prox, never a numeric search.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DomainError
from .model import CompositeProblem, Regularizer


class ZeroReg(Regularizer):
    """Constant-zero regularizer; prox is the identity."""

    separable = True
    kind = "zero"

    def value(self, x):
        return 0.0

    def prox(self, v, t):
        return np.asarray(v, dtype=float).copy()

    def value_coord(self, xi, i):
        return 0.0

    def prox_coord(self, vi, t, i):
        return float(vi)


class L1Reg(Regularizer):
    """lam * ||x||_1; prox is the coordinate-wise soft threshold."""

    separable = True
    kind = "l1"

    def __init__(self, lam: float):
        if lam <= 0:
            raise ConfigurationError("l1 weight must be positive")
        self.lam = float(lam)

    def value(self, x):
        return float(self.lam * np.abs(np.asarray(x, dtype=float)).sum())

    def prox(self, v, t):
        v = np.asarray(v, dtype=float)
        shrink = t * self.lam
        return np.sign(v) * np.maximum(np.abs(v) - shrink, 0.0)

    def value_coord(self, xi, i):
        return self.lam * abs(xi)

    def prox_coord(self, vi, t, i):
        shrink = t * self.lam
        if vi > shrink:
            return vi - shrink
        if vi < -shrink:
            return vi + shrink
        return 0.0


class BoxReg(Regularizer):
    """Indicator of the box [lo, hi]; prox is the exact clamp.

    Bounds may be scalars or per-coordinate vectors. Membership tests are
    exact: prox outputs land exactly on the bounds, so feasibility of
    clamped iterates never drifts.
    """

    separable = True
    kind = "box"

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if np.any(self.lo > self.hi):
            raise ConfigurationError("box bounds must satisfy lo <= hi")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if np.all(x >= self.lo) and np.all(x <= self.hi):
            return 0.0
        return float("inf")

    def prox(self, v, t):
        return np.minimum(np.maximum(np.asarray(v, dtype=float), self.lo), self.hi)

    def _bound(self, arr, i):
        return float(arr[i]) if arr.ndim else float(arr)

    def value_coord(self, xi, i):
        lo = self._bound(self.lo, i)
        hi = self._bound(self.hi, i)
        return 0.0 if lo <= xi <= hi else float("inf")

    def prox_coord(self, vi, t, i):
        lo = self._bound(self.lo, i)
        hi = self._bound(self.hi, i)
        return min(max(float(vi), lo), hi)

    def bounds_arrays(self, d: int):
        lo = np.broadcast_to(self.lo, (d,)).astype(float)
        hi = np.broadcast_to(self.hi, (d,)).astype(float)
        return lo, hi


def l1(lam: float) -> L1Reg:
    return L1Reg(lam)


def box(lo, hi) -> BoxReg:
    return BoxReg(lo, hi)


def zero() -> ZeroReg:
    return ZeroReg()


def reg_code(reg: Regularizer, d: int):
    """Kernel encoding (kind, p1, p2) for cataloged regularizers, else None."""
    if isinstance(reg, ZeroReg):
        z = np.zeros(d)
        return 0, z, z
    if isinstance(reg, L1Reg):
        return 1, np.full(d, reg.lam), np.zeros(d)
    if isinstance(reg, BoxReg):
        lo, hi = reg.bounds_arrays(d)
        return 2, lo, hi
    return None


def forward_backward_step(problem: CompositeProblem, x, lam: float) -> np.ndarray:
    """One composite step at curvature lam: prox_{g/lam}(x - grad f(x)/lam).

    This is the exact minimizer of the linearized step surrogate
    <grad f(x), y-x> + (lam/2)||y-x||^2 + g(y) - g(x).
    """
    if lam <= 0:
        raise ConfigurationError("curvature parameter must be positive")
    x = np.asarray(x, dtype=float)
    g = problem.smooth.gradient(x)
    return problem.reg.prox(x - g / lam, 1.0 / lam)


def _surrogate_min_value(problem, x, lam, gx_val):
    g = problem.smooth.gradient(x)
    y = problem.reg.prox(x - g / lam, 1.0 / lam)
    diff = y - x
    return float(g @ diff + 0.5 * lam * (diff @ diff)
                 + problem.reg.value(y) - gx_val)


def prox_decrease(problem: CompositeProblem, x, lam: float) -> float:
    """Decrease measure -2*lam*min_y of the step surrogate; always >= 0.

    With the zero regularizer this is exactly ||grad f(x)||^2 (computed
    directly so the reduction is bit-exact). Requested at a point where the
    regularizer is infinite -> DomainError: solvers keep iterates feasible
    after the first prox step, so the measure is only meaningful there.
    """
    if lam <= 0:
        raise ConfigurationError("curvature parameter must be positive")
    x = np.asarray(x, dtype=float)
    if isinstance(problem.reg, ZeroReg):
        g = problem.smooth.gradient(x)
        return float(g @ g)
    gx_val = problem.reg.value(x)
    if not np.isfinite(gx_val):
        raise DomainError("decrease measure undefined at an infeasible point")
    return -2.0 * lam * _surrogate_min_value(problem, x, lam, gx_val)


def prox_residual(reg: Regularizer, lam: float, x, a) -> float:
    """min_y ||lam*(y-x) + a||^2 + 2*lam*(g(y) - g(x)), via the same prox.

    Satisfies prox_decrease(x, lam) = ||grad f(x)||^2 - prox_residual(lam,
    x, grad f(x)); the minimizer is prox_{g/lam}(x - a/lam).
    """
    if lam <= 0:
        raise ConfigurationError("curvature parameter must be positive")
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if isinstance(reg, ZeroReg):
        return 0.0
    gx_val = reg.value(x)
    if not np.isfinite(gx_val):
        raise DomainError("proximal residual undefined at an infeasible point")
    y = reg.prox(x - a / lam, 1.0 / lam)
    z = lam * (y - x) + a
    return float(z @ z + 2.0 * lam * (reg.value(y) - gx_val))


def fb_envelope(problem: CompositeProblem, x, lam: float) -> float:
    """Value of the step surrogate at its minimizer (envelope at step 1/lam):
    f(x) + <grad f(x), y-x> + (lam/2)||y-x||^2 + g(y) with y the prox step."""
    if lam <= 0:
        raise ConfigurationError("curvature parameter must be positive")
    x = np.asarray(x, dtype=float)
    g = problem.smooth.gradient(x)
    y = problem.reg.prox(x - g / lam, 1.0 / lam)
    diff = y - x
    return float(problem.smooth.value(x) + g @ diff
                 + 0.5 * lam * (diff @ diff) + problem.reg.value(y))
