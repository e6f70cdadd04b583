"""Rate certificates: observed suboptimality traces vs. closed-form bounds.

Each certificate compares the recorded gap at geometric checkpoints against
the bound named by its tag:

- T1 / T5 / GS : gap_k <= (1 - mu/L)^k * gap_0 (deterministic; for GS the
  constant is the inf-norm gradient-domination constant mu_1)
- SIGN         : gap_k <= (1 - mu)^k * gap_0 with mu the weighted-norm
  constant of the sign method
- T3 / T6      : mean gap_k <= (1 - mu/(d L))^k * gap_0
- T3-Lbar      : mean gap_k <= (1 - mu/(d Lbar))^k * gap_0
- T4-dec       : mean gap_k <= L C^2 / (2 k mu^2)
- T4-const     : mean gap_k <= (1-2 mu a)^k gap_0 + L C^2 a/(4 mu),
                 meaningful only when a < 1/(2 mu)
- SVRG         : mean gap_s <= rho^s * gap_0 with
                 rho = (1/(1-2 a L)) (1/(m mu a) + 2 L a)

Deterministic tolerance is multiplicative 1e-9; statistical tolerance is
additive (3 standard errors of the trial mean). Certificates whose bound
degenerates (step too large, rho >= 1) are marked "vacuous" rather than
failed. Certification is a pure function of (traces, params): recomputation
is bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .smooth_solvers import svrg_rate_factor

THEOREM_TAGS = ("T1", "T3", "T3-Lbar", "GS", "SIGN", "T4-dec", "T4-const",
                "SVRG", "T5", "T6")
DETERMINISTIC_TAGS = ("T1", "GS", "SIGN", "T5")
STOCHASTIC_TAGS = ("T3", "T3-Lbar", "T4-dec", "T4-const", "SVRG", "T6")

_GEOMETRIC = (1, 5, 25, 125, 625)


@dataclass
class RateCertificate:
    theorem_tag: str
    bound_params: dict
    checkpoints: list  # dicts {k, observed, bound, ok}
    verdict: str       # "pass" | "fail" | "vacuous"
    flags: list = field(default_factory=list)
    statistical: dict | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"

    def to_json_dict(self) -> dict:
        out = {"theorem": self.theorem_tag,
               "params": {k: (float(v) if isinstance(v, (int, float, np.floating))
                              else v) for k, v in self.bound_params.items()},
               "checkpoints": [{"k": int(cp["k"]),
                                "observed": float(cp["observed"]),
                                "bound": float(cp["bound"]),
                                "ok": bool(cp["ok"])} for cp in self.checkpoints],
               "verdict": self.verdict,
               "flags": list(self.flags)}
        if self.statistical is not None:
            out["statistical"] = {k: (int(v) if isinstance(v, (int, np.integer)) else float(v))
                                  for k, v in self.statistical.items()}
        return out


def default_checkpoints(max_k: int) -> list[int]:
    """Geometric checkpoints {1, 5, 25, 125, 625} intersected with the
    available iteration range, always including the final iterate."""
    ks = [k for k in _GEOMETRIC if k <= max_k]
    if max_k >= 1 and max_k not in ks:
        ks.append(max_k)
    return ks


def certify_deterministic(trace, mu: float, L: float | None, theorem_tag: str,
                          checkpoints=None, tol: float = 1e-9) -> RateCertificate:
    """Single-trace linear-rate certificate (tags T1, GS, SIGN, T5).

    The contraction factor is 1 - mu/L (1 - mu for SIGN); a factor below 0
    is clamped to 0 and flagged: the bound then demands exact convergence,
    which signals a misconfigured mu rather than a meaningful rate. An
    infinite initial gap (infeasible start) re-bases the bound at k = 1.
    """
    if theorem_tag not in DETERMINISTIC_TAGS:
        raise ConfigurationError(f"{theorem_tag!r} is not a deterministic tag")
    flags = []
    if theorem_tag == "SIGN":
        rho = 1.0 - mu
        params = {"mu": mu}
    else:
        rho = 1.0 - mu / L
        params = {"mu": mu, "L": L}
    if rho < 0.0:
        rho = 0.0
        flags.append("rate factor clamped to 0 (mu too large): misconfiguration "
                     "unless the trace converges exactly")
    params["rate_factor"] = rho
    gaps = np.asarray(trace.gaps, dtype=float)
    start = 0
    if not np.isfinite(gaps[0]):
        start = 1
        flags.append("re-based at k=1: infinite initial objective")
    base = gaps[start]
    max_k = int(trace.ks[-1])
    ks = list(checkpoints) if checkpoints is not None else default_checkpoints(max_k)
    rows = []
    ok_all = True
    for k in ks:
        if k < start or k > max_k:
            continue
        observed = float(gaps[k])
        bound = (rho ** (k - start)) * base
        ok = observed <= bound * (1.0 + tol)
        ok_all = ok_all and ok
        rows.append({"k": k, "observed": observed, "bound": bound, "ok": ok})
    return RateCertificate(theorem_tag=theorem_tag, bound_params=params,
                           checkpoints=rows,
                           verdict="pass" if ok_all else "fail", flags=flags)


def sgd_plateau_bound(mu: float, L: float, C2: float, alpha: float) -> float:
    """Noise floor of the constant-step bound: L*C^2*alpha / (4*mu)."""
    return L * C2 * alpha / (4.0 * mu)


def _stochastic_bound(tag, params, k, gap0):
    if tag == "T3":
        return (1.0 - params["mu"] / (params["d"] * params["L"])) ** k * gap0
    if tag == "T3-Lbar":
        return (1.0 - params["mu"] / (params["d"] * params["Lbar"])) ** k * gap0
    if tag == "T6":
        return (1.0 - params["mu"] / (params["d"] * params["L"])) ** k * gap0
    if tag == "T4-dec":
        if k < 1:
            return float("inf")
        return params["L"] * params["C2"] / (2.0 * k * params["mu"] ** 2)
    if tag == "T4-const":
        a, mu = params["alpha"], params["mu"]
        return ((1.0 - 2.0 * mu * a) ** k * gap0
                + sgd_plateau_bound(mu, params["L"], params["C2"], a))
    if tag == "SVRG":
        return params["rate_factor"] ** k * gap0
    raise ConfigurationError(f"unknown stochastic tag {tag!r}")


def certify_stochastic(traces, theorem_tag: str, params: dict,
                       checkpoints=None, stderr_mult: float = 3.0,
                       min_trials: int = 30) -> RateCertificate:
    """Monte-Carlo certificate: trial-mean gap vs. the tag's bound at each
    checkpoint, with additive tolerance stderr_mult standard errors.

    Preconditions that make the bound vacuous (constant step >= 1/(2 mu);
    variance-reduced factor >= 1) mark the certificate "vacuous" instead of
    failing it.
    """
    if theorem_tag not in STOCHASTIC_TAGS:
        raise ConfigurationError(f"{theorem_tag!r} is not a stochastic tag")
    if len(traces) < min_trials:
        raise ConfigurationError(f"need at least {min_trials} trials, got {len(traces)}")
    params = dict(params)
    flags = []
    vacuous = False
    if theorem_tag == "T4-const":
        if params["alpha"] >= 1.0 / (2.0 * params["mu"]):
            vacuous = True
            flags.append("constant step >= 1/(2 mu): bound vacuous")
    if theorem_tag == "SVRG":
        two_aL = 2.0 * params["alpha"] * params["L"]
        if two_aL >= 1.0:
            vacuous = True
            flags.append("2*alpha*L >= 1: bound vacuous")
            params["rate_factor"] = float("inf")
        else:
            rho = svrg_rate_factor(params["mu"], params["L"], params["alpha"],
                                   params["m"])
            params["rate_factor"] = rho
            if rho >= 1.0:
                vacuous = True
                flags.append("contraction factor >= 1: bound vacuous")

    n = min(len(t.gaps) for t in traces)
    gaps = np.stack([np.asarray(t.gaps[:n], dtype=float) for t in traces])
    gap0s = gaps[:, 0]
    if not np.all(gap0s == gap0s[0]):
        flags.append("initial gaps differ across trials")
    gap0 = float(gap0s[0])
    mean = gaps.mean(axis=0)
    stderr = gaps.std(axis=0, ddof=1) / np.sqrt(gaps.shape[0])
    max_k = n - 1
    ks = list(checkpoints) if checkpoints is not None else default_checkpoints(max_k)
    rows = []
    ok_all = True
    for k in ks:
        if k > max_k or (theorem_tag == "T4-dec" and k < 1):
            continue
        observed = float(mean[k])
        if vacuous:
            bound = float("inf")
            ok = True
        else:
            bound = float(_stochastic_bound(theorem_tag, params, k, gap0))
            ok = observed <= bound + stderr_mult * float(stderr[k])
        ok_all = ok_all and ok
        rows.append({"k": k, "observed": observed, "bound": bound, "ok": ok})
    verdict = "vacuous" if vacuous else ("pass" if ok_all else "fail")
    return RateCertificate(theorem_tag=theorem_tag, bound_params=params,
                           checkpoints=rows, verdict=verdict, flags=flags,
                           statistical={"trials": len(traces),
                                        "stderr_multiplier": stderr_mult})
