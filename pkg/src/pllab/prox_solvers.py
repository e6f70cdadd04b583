"""Composite-objective solvers: full proximal gradient and its randomized
coordinate variant (separable regularizers only).

Both use the global smooth constant L; ``step_scale`` in (0, 1] shrinks the
step to step_scale/L, i.e. raises the effective curvature to L/step_scale,
which only strengthens the per-step decrease certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConfigurationError, DomainError
from .model import CompositeProblem, IterateTrace, make_trace
from .problems import quad_terms
from .prox import reg_code
from .rng import MASK64, Xoshiro256
from .smooth_solvers import _gaps_from_values


@dataclass(frozen=True)
class ProxSolverConfig:
    iters: int
    step_scale: float = 1.0
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if self.iters < 1:
            raise ConfigurationError("iters must be >= 1")
        if not (0.0 < self.step_scale <= 1.0):
            raise ConfigurationError("step_scale must lie in (0, 1]")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")


def proximal_gradient(problem: CompositeProblem, x0, config: ProxSolverConfig,
                      store_points: bool = False) -> IterateTrace:
    """Forward-backward iteration x <- prox_{g/lam}(x - grad f(x)/lam) with
    lam = L/step_scale.

    An infeasible start under an indicator regularizer is allowed: the first
    step projects, so the recorded initial gap is +inf and certification
    re-bases at k = 1."""
    smooth, reg = problem.smooth, problem.reg
    lam = smooth.lipschitz_L / config.step_scale
    x = np.asarray(x0, dtype=float).copy()
    values = np.empty(config.iters + 1)
    steps = np.zeros(config.iters + 1)
    idx = np.full(config.iters + 1, -1, dtype=np.int64)
    points = np.empty((config.iters + 1, problem.d)) if store_points else None
    values[0] = problem.value(x)
    if store_points:
        points[0] = x
    for k in range(1, config.iters + 1):
        g = smooth.gradient(x)
        x = reg.prox(x - g / lam, 1.0 / lam)
        values[k] = problem.value(x)
        steps[k] = 1.0 / lam
        if store_points:
            points[k] = x
    return make_trace(np.arange(config.iters + 1),
                      _gaps_from_values(values, problem.optimum_value),
                      steps, idx, config.seed, "prox-gd", problem.tag,
                      values=values, points=points,
                      meta={"L": smooth.lipschitz_L, "lam": lam, "d": problem.d})


def proximal_coordinate_descent(problem: CompositeProblem, x0,
                                config: ProxSolverConfig, seed: int | None = None,
                                store_points: bool = False) -> IterateTrace:
    """Uniform-random coordinate prox steps: coordinate i moves to
    prox_{g_i/lam}(x_i - grad_i f(x)/lam), the exact minimizer of the
    one-coordinate surrogate. Requires a separable regularizer and a
    feasible starting point."""
    smooth, reg = problem.smooth, problem.reg
    if not reg.separable:
        raise ConfigurationError("coordinate prox steps need a separable regularizer")
    x = np.asarray(x0, dtype=float).copy()
    if not np.isfinite(reg.value(x)):
        raise DomainError("starting point is infeasible for the regularizer")
    lam = smooth.lipschitz_L / config.step_scale
    if seed is None:
        seed = config.seed
    d = problem.d
    kern = backend.kernels()
    qt = quad_terms(smooth)
    rc = reg_code(reg, d)
    if kern is not None and qt is not None and rc is not None:
        values, steps, idx, pts = kern.proxcd_quad(
            qt[0], qt[1], qt[2], x, config.iters, lam, rc[0], rc[1], rc[2],
            np.uint64(seed & MASK64))
    else:
        rng = Xoshiro256(seed)
        values = np.empty(config.iters + 1)
        steps = np.zeros(config.iters + 1)
        idx = np.full(config.iters + 1, -1, dtype=np.int64)
        pts = np.empty((config.iters + 1, d))
        values[0] = problem.value(x)
        pts[0] = x
        for k in range(1, config.iters + 1):
            i = rng.next_index(d)
            gi = smooth.coord_gradient(x, i)
            x[i] = reg.prox_coord(x[i] - gi / lam, 1.0 / lam, i)
            values[k] = problem.value(x)
            steps[k] = 1.0 / lam
            idx[k] = i
            pts[k] = x
    return make_trace(np.arange(config.iters + 1),
                      _gaps_from_values(values, problem.optimum_value),
                      steps, idx, seed, "prox-cd", problem.tag, values=values,
                      points=pts if store_points else None,
                      meta={"L": smooth.lipschitz_L, "lam": lam, "d": d})
