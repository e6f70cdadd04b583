"""Core abstractions shared by every solver: objectives, regularizers,
composite problems, and per-run iterate traces.

All points are dense float64 vectors. Objects are immutable after
construction and safe to share across concurrent runs; each trace has a
single writer. Solvers trust the declared Lipschitz constant (step 1/L);
``estimate_L`` exists for validation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EstimationError, EvaluationError
from .rng import Xoshiro256

Array = np.ndarray


class SmoothObjective:
    """Differentiable objective on R^d with curvature metadata.

    Subclasses implement ``value`` and ``gradient``; ``coord_gradient``
    defaults to slicing the full gradient. Optional oracles:

    - ``optimum_value``: exact minimum value, or ``None``;
    - ``project_to_solutions``: callable mapping x to the nearest optimal
      point, or ``None``;
    - ``components``: finite-sum terms f_i with uniform weights, so that
      f(x) equals the mean of the component values, or ``None``;
    - ``coord_lipschitz``: per-coordinate Lipschitz constants L_i.
    """

    d: int
    lipschitz_L: float
    coord_lipschitz: Array | None = None
    optimum_value: float | None = None
    components: list["SmoothObjective"] | None = None
    project_to_solutions = None
    tag: str = "objective"

    def value(self, x: Array) -> float:
        raise NotImplementedError

    def gradient(self, x: Array) -> Array:
        raise NotImplementedError

    def coord_gradient(self, x: Array, i: int) -> float:
        return float(self.gradient(x)[i])

    def gap(self, x: Array) -> float:
        """value(x) - f*; NaN when no optimum oracle is available."""
        if self.optimum_value is None:
            return float("nan")
        return self.value(x) - self.optimum_value


class CallableObjective(SmoothObjective):
    """Objective assembled from plain callables (tests, ad-hoc problems)."""

    def __init__(self, d, value, gradient, lipschitz_L, coord_lipschitz=None,
                 optimum_value=None, project_to_solutions=None, components=None,
                 tag="callable"):
        self.d = int(d)
        self._value = value
        self._gradient = gradient
        self.lipschitz_L = float(lipschitz_L)
        self.coord_lipschitz = None if coord_lipschitz is None else \
            np.asarray(coord_lipschitz, dtype=float)
        self.optimum_value = optimum_value
        self.project_to_solutions = project_to_solutions
        self.components = components
        self.tag = tag

    def value(self, x):
        return float(self._value(np.asarray(x, dtype=float)))

    def gradient(self, x):
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)


class Regularizer:
    """Simple convex regularizer with an exact proximal map.

    ``value`` may return +inf (indicator functions). ``prox(v, t)`` solves
    argmin_y 0.5*||y - v||^2 + t*g(y) exactly for t > 0. Separable
    regularizers additionally expose per-coordinate value/prox, which the
    coordinate solvers require.
    """

    separable: bool = False
    kind: str = "custom"

    def value(self, x: Array) -> float:
        raise NotImplementedError

    def prox(self, v: Array, t: float) -> Array:
        raise NotImplementedError

    def value_coord(self, xi: float, i: int) -> float:
        raise ConfigurationError(f"regularizer {self.kind!r} is not separable")

    def prox_coord(self, vi: float, t: float, i: int) -> float:
        raise ConfigurationError(f"regularizer {self.kind!r} is not separable")


class CompositeProblem:
    """F = f + g with optional exact optimum and solution projection."""

    def __init__(self, smooth: SmoothObjective, reg: Regularizer,
                 optimum_value: float | None = None,
                 project_to_solutions=None, tag: str = "composite"):
        self.smooth = smooth
        self.reg = reg
        self.optimum_value = optimum_value
        self.project_to_solutions = project_to_solutions
        self.tag = tag

    @property
    def d(self) -> int:
        return self.smooth.d

    def value(self, x: Array) -> float:
        return self.smooth.value(x) + self.reg.value(x)

    def gap(self, x: Array) -> float:
        if self.optimum_value is None:
            return float("nan")
        return self.value(x) - self.optimum_value


@dataclass
class IterateTrace:
    """Per-iteration record of one solver run.

    Row k holds the objective gap at iterate x_k, the step size and the
    selected coordinate/component index used to *reach* x_k (0 and -1 for
    the initial point). ``seed`` is echoed on every CSV row so trace files
    are self-describing.
    """

    ks: Array
    gaps: Array
    steps: Array
    indices: Array
    seed: int
    algorithm_tag: str
    problem_tag: str
    values: Array | None = None
    points: Array | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ks)

    def validate(self) -> None:
        ks = np.asarray(self.ks)
        if len(ks) == 0 or ks[0] != 0 or np.any(np.diff(ks) <= 0):
            raise ConfigurationError("iteration indices must strictly increase from 0")
        if len(self.gaps) != len(ks) or len(self.steps) != len(ks) \
                or len(self.indices) != len(ks):
            raise ConfigurationError("trace columns must have equal length")

    def to_csv(self, path) -> None:
        """Write k,gap,step,index,seed rows with round-trip float formatting."""
        with open(path, "w") as fh:
            fh.write("k,gap,step,index,seed\n")
            for k, gap, step, idx in zip(self.ks, self.gaps, self.steps, self.indices):
                fh.write(f"{int(k)},{float(gap)!r},{float(step)!r},{int(idx)},{self.seed}\n")


def make_trace(ks, gaps, steps, indices, seed, algorithm_tag, problem_tag,
               values=None, points=None, meta=None) -> IterateTrace:
    trace = IterateTrace(
        ks=np.asarray(ks, dtype=np.int64),
        gaps=np.asarray(gaps, dtype=float),
        steps=np.asarray(steps, dtype=float),
        indices=np.asarray(indices, dtype=np.int64),
        seed=int(seed),
        algorithm_tag=algorithm_tag,
        problem_tag=problem_tag,
        values=None if values is None else np.asarray(values, dtype=float),
        points=points,
        meta=meta or {},
    )
    trace.validate()
    return trace


def check_gradient(obj: SmoothObjective, x, h: float = 1e-6) -> float:
    """Max relative mismatch between the gradient and centered differences.

    Per-coordinate step h*(1+|x_i|); the error at coordinate i is
    |fd_i - g_i| / (1 + |g_i|). Raises ``EvaluationError`` on non-finite
    values or gradients.
    """
    if h <= 0:
        raise ConfigurationError("finite-difference step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.asarray(obj.gradient(x), dtype=float)
    fx = obj.value(x)
    if not np.isfinite(fx) or not np.all(np.isfinite(g)):
        raise EvaluationError("non-finite value or gradient at the test point")
    worst = 0.0
    for i in range(obj.d):
        hi = h * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += hi
        xm[i] -= hi
        fp = obj.value(xp)
        fm = obj.value(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise EvaluationError("non-finite value near the test point")
        fd = (fp - fm) / (2.0 * hi)
        worst = max(worst, abs(fd - g[i]) / (1.0 + abs(g[i])))
    return worst


def estimate_L(obj: SmoothObjective, samples: int = 1000, seed: int = 0,
               lo=-5.0, hi=5.0, local_scale: float = 1e-4) -> float:
    """Sampled lower bound on the gradient Lipschitz constant.

    Draws ``samples`` independent pairs inside the box plus one short-range
    mate per draw (x, x + eps*u); short pairs let the estimate approach the
    local curvature supremum instead of only averaged secants. Zero-distance
    pairs are skipped; if every pair degenerates an ``EstimationError`` is
    raised.
    """
    if samples < 2:
        raise ConfigurationError("estimate_L needs samples >= 2")
    rng = Xoshiro256(seed)
    best = 0.0
    seen = False
    for _ in range(samples):
        x = rng.uniform_vector(lo, hi, obj.d)
        y = rng.uniform_vector(lo, hi, obj.d)
        u = rng.normal_vector(obj.d)
        un = np.linalg.norm(u)
        pairs = [(x, y)]
        if un > 0:
            pairs.append((x, x + (local_scale * (1.0 + np.linalg.norm(x)) / un) * u))
        for a, b in pairs:
            dist = np.linalg.norm(b - a)
            if dist == 0.0:
                continue
            ratio = np.linalg.norm(obj.gradient(b) - obj.gradient(a)) / dist
            if np.isfinite(ratio):
                best = max(best, float(ratio))
                seen = True
    if not seen:
        raise EstimationError("all sampled pairs were degenerate")
    return best
