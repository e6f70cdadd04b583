"""Numeric estimators for growth conditions and their implication chain.

"For all x" quantifiers are realized by seeded uniform sampling over a
declared box (optionally augmented with solver iterates); every constant is
the infimum of its defining ratio over that cloud, clamped at 0 when a
ratio goes negative. No finite sample proves a global condition, so every
report embeds the cloud's generation record.

Conditions over points: gradient domination (PL) in the 2- and inf-norms,
weak strong convexity, the restricted secant inequality, the error bound,
and quadratic growth; strong convexity and its essential variant are
estimated over point pairs (the essential one over pairs sharing a
solution-set projection). Composite analogues: the proximal decrease
ratio, the proximal error-bound constant, and the min-norm-subgradient
(KL) ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, EstimationError
from .model import CompositeProblem
from .prox import BoxReg, L1Reg, ZeroReg, forward_backward_step, prox_decrease
from .rng import Xoshiro256
from .smooth_solvers import weighted_grad_norm

SMOOTH_CONDITIONS = ("SC", "ESC", "WSC", "RSI", "EB", "PL", "QG", "PL_INF")

_GOLDEN = 0.6180339887498949


@dataclass
class SampleCloud:
    """Sampled points with the record of how they were generated."""

    points: np.ndarray
    generation: dict
    projections: np.ndarray | None = None


def _is_composite(target) -> bool:
    return isinstance(target, CompositeProblem)


def _smooth_part(target):
    return target.smooth if _is_composite(target) else target


def default_box(target, x0):
    """Default sampling box: x0 +/- 5*||x0 - x_p|| per coordinate (falling
    back to 5*(1+||x0||) when the projection is unavailable or x0 is
    already optimal)."""
    x0 = np.asarray(x0, dtype=float)
    radius = 0.0
    if target.project_to_solutions is not None:
        radius = 5.0 * float(np.linalg.norm(x0 - target.project_to_solutions(x0)))
    if radius == 0.0:
        radius = 5.0 * (1.0 + float(np.linalg.norm(x0)))
    return x0 - radius, x0 + radius


def make_cloud(target, lo, hi, count: int, seed: int, extra=None,
               exclude_tol: float = 1e-12) -> SampleCloud:
    """Uniform box sample over [lo, hi]^d for a smooth objective or a
    composite problem.

    Points within exclude_tol*(1+|f*|) of the optimal value are dropped (the
    ratio estimators would divide by ~0 there), as are points where the
    objective is not finite (infeasible for an indicator regularizer).
    ``extra`` rows (typically solver iterates) pass the same filters and are
    appended after the box sample.
    """
    if target.optimum_value is None:
        raise EstimationError("condition estimation needs an exact optimal value")
    d = target.d
    fstar = target.optimum_value
    rng = Xoshiro256(seed)
    candidates = [rng.uniform_vector(lo, hi, d) for _ in range(count)]
    n_extra = 0
    if extra is not None:
        extra = np.atleast_2d(np.asarray(extra, dtype=float))
        n_extra = extra.shape[0]
        candidates.extend(extra)
    threshold = exclude_tol * (1.0 + abs(fstar))
    kept = []
    for p in candidates:
        v = target.value(p)
        if np.isfinite(v) and v - fstar >= threshold:
            kept.append(p)
    if not kept:
        raise EstimationError("every sampled point was optimal or infeasible")
    points = np.array(kept)
    projections = None
    if target.project_to_solutions is not None:
        projections = np.array([target.project_to_solutions(p) for p in points])
    generation = {
        "lo": np.broadcast_to(np.asarray(lo, dtype=float), (d,)).tolist(),
        "hi": np.broadcast_to(np.asarray(hi, dtype=float), (d,)).tolist(),
        "count": int(count),
        "seed": int(seed),
        "exclude": f"value gap < {exclude_tol:g}*(1+|f*|) or non-finite",
        "extra_count": int(n_extra),
        "kept": int(points.shape[0]),
    }
    return SampleCloud(points=points, generation=generation, projections=projections)


def _ratio_min(ratios) -> float:
    vals = [r for r in ratios if np.isfinite(r)]
    if not vals:
        raise EstimationError("no usable samples for this condition")
    return max(0.0, min(vals))


def estimate_pl(obj, cloud: SampleCloud) -> float:
    """Gradient-domination constant: min over the cloud of
    0.5*||grad f(x)||^2 / (f(x) - f*)."""
    fstar = obj.optimum_value
    ratios = []
    for x in cloud.points:
        g = obj.gradient(x)
        ratios.append(0.5 * float(g @ g) / (obj.value(x) - fstar))
    return _ratio_min(ratios)


def _pair_ratios(obj, points):
    for j in range(0, len(points) - 1, 2):
        for x, y in ((points[j], points[j + 1]), (points[j + 1], points[j])):
            diff = y - x
            den = float(diff @ diff)
            if den == 0.0:
                continue
            num = obj.value(y) - obj.value(x) - float(obj.gradient(x) @ diff)
            yield 2.0 * num / den


def _esc_pair_ratios(obj, cloud):
    # mates y = x + a*(x - x_p) share x's projection exactly; natural pairs
    # with coinciding projections qualify too
    if cloud.projections is None:
        raise EstimationError("essential variant needs a projection oracle")
    pts, projs = cloud.points, cloud.projections
    for j, x in enumerate(pts):
        a = -0.75 + 2.0 * ((j * _GOLDEN) % 1.0)
        if abs(a) < 0.05:
            a = 0.5
        y = x + a * (x - projs[j])
        for u, v in ((x, y), (y, x)):
            diff = v - u
            den = float(diff @ diff)
            if den == 0.0:
                continue
            num = obj.value(v) - obj.value(u) - float(obj.gradient(u) @ diff)
            yield 2.0 * num / den
    for j in range(0, len(pts) - 1, 2):
        scale = 1.0 + float(np.linalg.norm(projs[j]))
        if np.linalg.norm(projs[j] - projs[j + 1]) <= 1e-8 * scale:
            for u, v in ((pts[j], pts[j + 1]), (pts[j + 1], pts[j])):
                diff = v - u
                den = float(diff @ diff)
                if den == 0.0:
                    continue
                num = obj.value(v) - obj.value(u) - float(obj.gradient(u) @ diff)
                yield 2.0 * num / den


def _point_ratios(obj, cloud, which):
    fstar = obj.optimum_value
    need_proj = which in ("WSC", "RSI", "EB", "QG")
    if need_proj and cloud.projections is None:
        raise EstimationError(f"{which} needs a projection oracle")
    for x, xp in zip(cloud.points,
                     cloud.projections if need_proj else cloud.points):
        if which == "PL":
            g = obj.gradient(x)
            yield 0.5 * float(g @ g) / (obj.value(x) - fstar)
            continue
        if which == "PL_INF":
            g = obj.gradient(x)
            yield 0.5 * float(np.max(np.abs(g))) ** 2 / (obj.value(x) - fstar)
            continue
        diff = x - xp
        den = float(diff @ diff)
        if den == 0.0:
            continue
        if which == "WSC":
            num = fstar - obj.value(x) - float(obj.gradient(x) @ (xp - x))
            yield 2.0 * num / den
        elif which == "RSI":
            yield float(obj.gradient(x) @ diff) / den
        elif which == "EB":
            yield float(np.linalg.norm(obj.gradient(x))) / float(np.sqrt(den))
        elif which == "QG":
            yield 2.0 * (obj.value(x) - fstar) / den


def estimate_condition(obj, cloud: SampleCloud, which: str) -> float:
    """Infimum over the cloud of the defining ratio of one growth condition.

    ``which`` is one of SC, ESC, WSC, RSI, EB, PL, QG, PL_INF. Pair-based
    conditions (SC, ESC) consume consecutive cloud points in both
    orientations; negative ratios clamp the constant to 0 (the condition
    fails on this cloud)."""
    if which not in SMOOTH_CONDITIONS:
        raise ConfigurationError(f"unknown condition {which!r}")
    if which == "SC":
        return _ratio_min(_pair_ratios(obj, cloud.points))
    if which == "ESC":
        return _ratio_min(_esc_pair_ratios(obj, cloud))
    return _ratio_min(_point_ratios(obj, cloud, which))


@dataclass
class ConditionReport:
    """Estimated constants plus the sample set that produced them."""

    tag: str
    constants: dict
    cloud_generation: dict

    def to_json_dict(self) -> dict:
        return {"problem": self.tag,
                "constants": {k: float(v) for k, v in self.constants.items()},
                "cloud": self.cloud_generation}


def condition_report(obj, cloud: SampleCloud,
                     which=SMOOTH_CONDITIONS) -> ConditionReport:
    constants = {}
    for name in which:
        try:
            constants[name] = estimate_condition(obj, cloud, name)
        except EstimationError:
            constants[name] = float("nan")
    return ConditionReport(tag=getattr(obj, "tag", "objective"),
                           constants=constants,
                           cloud_generation=cloud.generation)


@dataclass
class ChainVerdict:
    """Outcome of checking the condition hierarchy on one problem's cloud.

    Positivity implications run SC -> ESC -> WSC -> RSI -> EB <-> PL -> QG;
    the quantitative steps that are checkable between cloud infima are
    RSI >= WSC/2, EB >= RSI, and PL >= EB^2/L."""

    problem_tag: str
    constants: dict
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {"problem": self.problem_tag,
                "constants": {k: float(v) for k, v in self.constants.items()},
                "failures": list(self.failures),
                "passed": self.passed}


def verify_implication_chain(report: ConditionReport, L: float,
                             pos_tol: float = 1e-8,
                             tol: float = 1e-8) -> ChainVerdict:
    c = report.constants
    verdict = ChainVerdict(problem_tag=report.tag, constants=dict(c))

    def pos(name):
        return np.isfinite(c.get(name, float("nan"))) and c[name] > pos_tol

    chain = ["SC", "ESC", "WSC", "RSI", "EB", "PL", "QG"]
    for a, b in zip(chain, chain[1:]):
        if pos(a) and not pos(b):
            verdict.failures.append(f"{a}>0 but {b}=0")
    if pos("PL") and not pos("EB"):
        verdict.failures.append("PL>0 but EB=0")

    def quant(name, lhs, rhs, slack):
        if np.isfinite(lhs) and np.isfinite(rhs) and lhs < rhs - slack:
            verdict.failures.append(f"{name}: {lhs:.6g} < {rhs:.6g}")

    quant("RSI >= WSC/2", c.get("RSI", np.nan), 0.5 * c.get("WSC", np.nan),
          tol * (1.0 + abs(c.get("WSC", 0.0))))
    quant("EB >= RSI", c.get("EB", np.nan), c.get("RSI", np.nan),
          tol * (1.0 + abs(c.get("RSI", 0.0))))
    quant("PL >= EB^2/L", c.get("PL", np.nan),
          c.get("EB", np.nan) ** 2 / L,
          tol * (1.0 + abs(c.get("EB", 0.0)) ** 2 / L))
    return verdict


# --- composite-problem estimators -------------------------------------------

def estimate_proximal_pl(problem: CompositeProblem, cloud: SampleCloud,
                         lam: float | None = None) -> float:
    """min over the cloud of 0.5 * decrease_measure(x, lam) / (F(x) - F*),
    with lam defaulting to the smooth constant L. Infeasible points are
    skipped; if everything is skipped an EstimationError is raised."""
    if problem.optimum_value is None:
        raise EstimationError("needs an exact optimal value")
    if lam is None:
        lam = problem.smooth.lipschitz_L
    fstar = problem.optimum_value
    ratios = []
    for x in cloud.points:
        v = problem.value(x)
        if not np.isfinite(v):
            continue
        try:
            dg = prox_decrease(problem, x, lam)
        except DomainError:
            continue
        ratios.append(0.5 * dg / (v - fstar))
    return _ratio_min(ratios)


def proximal_eb_residual(problem: CompositeProblem, x):
    """(distance to the solution set, fixed-point residual of the prox step
    at curvature L): the two sides of the proximal error bound."""
    if problem.project_to_solutions is None:
        raise EstimationError("needs a projection oracle")
    x = np.asarray(x, dtype=float)
    xp = problem.project_to_solutions(x)
    y = forward_backward_step(problem, x, problem.smooth.lipschitz_L)
    return float(np.linalg.norm(x - xp)), float(np.linalg.norm(x - y))


def estimate_proximal_eb(problem: CompositeProblem, cloud: SampleCloud) -> float:
    """Smallest c with dist(x, X*) <= c * residual over the cloud
    (i.e. the max ratio)."""
    best = 0.0
    seen = False
    for x in cloud.points:
        dist, resid = proximal_eb_residual(problem, x)
        if resid > 0.0:
            best = max(best, dist / resid)
            seen = True
    if not seen:
        raise EstimationError("no usable samples (all residuals vanished)")
    return best


def _subdiff_interval(reg, xi, i):
    if isinstance(reg, ZeroReg):
        return 0.0, 0.0
    if isinstance(reg, L1Reg):
        if xi > 0.0:
            return reg.lam, reg.lam
        if xi < 0.0:
            return -reg.lam, -reg.lam
        return -reg.lam, reg.lam
    if isinstance(reg, BoxReg):
        lo = reg._bound(reg.lo, i)
        hi = reg._bound(reg.hi, i)
        if xi < lo or xi > hi:
            raise DomainError("subdifferential empty at an infeasible point")
        slo = -np.inf if xi == lo else 0.0
        shi = np.inf if xi == hi else 0.0
        return slo, shi
    raise ConfigurationError("min-norm subgradient needs a cataloged regularizer")


def kl_residual(problem: CompositeProblem, x) -> float:
    """Squared norm of the min-norm element of grad f(x) + subdiff g(x),
    selected coordinate-wise by clamping -grad_i f(x) into subdiff g_i."""
    x = np.asarray(x, dtype=float)
    g = problem.smooth.gradient(x)
    s = np.empty(problem.d)
    for i in range(problem.d):
        lo, hi = _subdiff_interval(problem.reg, x[i], i)
        s[i] = g[i] + min(max(-g[i], lo), hi)
    return float(s @ s)


def estimate_kl(problem: CompositeProblem, cloud: SampleCloud) -> float:
    """min over the cloud of kl_residual(x) / (2 (F(x) - F*))."""
    if problem.optimum_value is None:
        raise EstimationError("needs an exact optimal value")
    fstar = problem.optimum_value
    ratios = []
    for x in cloud.points:
        v = problem.value(x)
        if not np.isfinite(v):
            continue
        try:
            ratios.append(kl_residual(problem, x) / (2.0 * (v - fstar)))
        except DomainError:
            continue
    return _ratio_min(ratios)


def estimate_weighted_pl(obj, weights, cloud: SampleCloud) -> float:
    """Gradient domination in the weighted 1-norm of the sign method:
    min over the cloud of 0.5 * (sum_i |g_i|/sqrt(w_i))^2 / (f - f*)."""
    fstar = obj.optimum_value
    ratios = []
    for x in cloud.points:
        nu = weighted_grad_norm(obj.gradient(x), weights)
        ratios.append(0.5 * nu * nu / (obj.value(x) - fstar))
    return _ratio_min(ratios)


def estimate_c2(traces) -> float:
    """Variance-bound estimate for stochastic certificates: the max of
    ||grad f_i||^2 over all components and all visited iterates, taken
    across the supplied traces (each records its own visited max)."""
    vals = [t.meta["c2_visited"] for t in traces if "c2_visited" in t.meta]
    if not vals:
        raise EstimationError("no traces carry a visited variance bound")
    return float(max(vals))


def check_stationary_points_global(obj, cloud: SampleCloud,
                                   grad_tol: float = 1e-8,
                                   val_tol: float = 1e-6) -> bool:
    """Consequence-of-invexity check: every cloud point with a (numerically)
    vanishing gradient must be globally optimal."""
    fstar = obj.optimum_value
    for x in cloud.points:
        if np.linalg.norm(obj.gradient(x)) <= grad_tol:
            if obj.value(x) - fstar > val_tol:
                return False
    return True
