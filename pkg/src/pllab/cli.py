"""Command-line experiment runner.

Subcommands: ``run <spec.json>``, ``demo <name>``, ``list``; flags
``--out <dir>``, ``--seed <u64>`` (overrides solver seeds), ``--trials <n>``
(overrides trial counts). A run writes per-solver ``trace-<i>-<tag>.csv``
files (columns k,gap,step,index,seed; trial 0 for stochastic runs),
``conditions.json``, ``certificates.json`` and ``summary.json`` into the
output directory. Exit status: 0 when every requested certificate passes or
is vacuous, 1 on a certificate failure, 2 on unreadable input or a spec
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import certify as certify_mod
from . import conditions as cond_mod
from .demos import demo_spec, list_demos
from .errors import PllabError, SpecError
from .model import CompositeProblem
from .problems import problem_from_config
from .prox_solvers import ProxSolverConfig, proximal_coordinate_descent, proximal_gradient
from .rng import trial_seed
from .smooth_solvers import (SgdSchedule, SvrgConfig, coordinate_descent_gs,
                             coordinate_descent_lipschitz_sampled,
                             coordinate_descent_random, gradient_descent, sgd,
                             sign_gradient_descent, svrg)

ALGORITHMS = ("gd", "cd-random", "cd-lipschitz", "cd-gs", "sign-gd", "sgd",
              "svrg", "prox-gd", "prox-cd")

_STOCHASTIC_ALG = ("cd-random", "cd-lipschitz", "sgd", "svrg", "prox-cd")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(path: Path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _load_csv_matrix(path: Path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise SpecError(f"unreadable CSV matrix {path}: {exc}") from exc
    return data


def _resolve_csv_refs(cfg: dict, base_dir: Path) -> dict:
    out = dict(cfg)
    for key in list(out):
        if key.endswith("_csv"):
            target = key[:-4]
            arr = _load_csv_matrix(base_dir / out.pop(key))
            if target in ("b", "labels", "q"):
                arr = arr.reshape(-1)
            out[target] = arr.tolist()
    return out


def _smooth_part(problem):
    return problem.smooth if isinstance(problem, CompositeProblem) else problem


def _default_x0(spec: dict, problem) -> np.ndarray:
    if "x0" in spec:
        x0 = np.asarray(spec["x0"], dtype=float)
        if x0.shape != (problem.d,):
            raise SpecError(f"x0 has length {x0.size}, problem dimension is {problem.d}")
        return x0
    return np.zeros(problem.d)


def _run_solver(problem, x0, entry: dict, store_points: bool,
                seed_override, trials_override):
    alg = entry.get("algorithm")
    if alg not in ALGORITHMS:
        raise SpecError(f"unknown solver algorithm {entry.get('algorithm')!r}")
    smooth = _smooth_part(problem)
    composite = isinstance(problem, CompositeProblem)
    if alg.startswith("prox") and not composite:
        raise SpecError(f"{alg} needs a composite problem")
    if not alg.startswith("prox") and composite:
        raise SpecError(f"{alg} runs on smooth problems only")
    iters = int(entry.get("iters", 0))
    seed = int(seed_override if seed_override is not None else entry.get("seed", 0))
    trials = int(trials_override if trials_override is not None
                 else entry.get("trials", 1))
    if alg in _STOCHASTIC_ALG and trials < 1:
        raise SpecError("trials must be >= 1")

    if alg == "gd":
        return [gradient_descent(smooth, x0, iters, store_points=store_points)]
    if alg == "cd-gs":
        return [coordinate_descent_gs(smooth, x0, iters, store_points=store_points)]
    if alg == "sign-gd":
        return [sign_gradient_descent(smooth, x0, iters,
                                      weights=entry.get("weights"),
                                      store_points=store_points)]
    if alg == "cd-random":
        return [coordinate_descent_random(smooth, x0, iters, trial_seed(seed, t),
                                          store_points=store_points)
                for t in range(trials)]
    if alg == "cd-lipschitz":
        return [coordinate_descent_lipschitz_sampled(smooth, x0, iters,
                                                     trial_seed(seed, t),
                                                     store_points=store_points)
                for t in range(trials)]
    if alg == "sgd":
        sched_cfg = entry.get("schedule", {"kind": "decreasing"})
        mu = sched_cfg.get("mu", smooth.pl_constant if hasattr(smooth, "pl_constant") else None)
        schedule = SgdSchedule(kind=sched_cfg.get("kind", "decreasing"),
                               alpha=sched_cfg.get("alpha"), mu=mu)
        return sgd(smooth, x0, iters, schedule, seed, trials=trials,
                   store_points=store_points)
    if alg == "svrg":
        comps = smooth.components
        if not comps:
            raise SpecError("svrg needs a finite-sum problem")
        if "alpha" in entry:
            alpha = float(entry["alpha"])
        else:
            comp_L = max(f.lipschitz_L for f in comps)
            alpha = float(entry.get("alpha_over_compL", 0.1)) / comp_L
        cfg = SvrgConfig(inner_m=int(entry["inner_m"]), alpha=alpha,
                         outer=int(entry["outer"]),
                         mu=getattr(smooth, "pl_constant", None))
        return [svrg(smooth, x0, cfg, trial_seed(seed, t),
                     store_points=store_points) for t in range(trials)]
    if alg == "prox-gd":
        cfg = ProxSolverConfig(iters=iters,
                               step_scale=float(entry.get("step_scale", 1.0)))
        return [proximal_gradient(problem, x0, cfg, store_points=store_points)]
    # prox-cd
    cfg = ProxSolverConfig(iters=iters,
                           step_scale=float(entry.get("step_scale", 1.0)),
                           seed=seed, trials=trials)
    return [proximal_coordinate_descent(problem, x0, cfg, seed=trial_seed(seed, t),
                                        store_points=store_points)
            for t in range(trials)]


def _estimation_cloud(problem, spec: dict, x0, traces):
    cond_cfg = spec.get("conditions", {})
    lo = cond_cfg.get("lo")
    hi = cond_cfg.get("hi")
    if lo is None or hi is None:
        lo, hi = cond_mod.default_box(problem, x0)
    count = int(cond_cfg.get("count", 10000))
    seed = int(cond_cfg.get("seed", 12345))
    extra = None
    if traces:
        stacks = [t.points for t in traces if t.points is not None]
        if stacks:
            extra = np.vstack(stacks)
    return cond_mod.make_cloud(problem, lo, hi, count, seed, extra=extra)


def _resolve_mu(entry, tag, problem, traces, spec, x0):
    mu = entry.get("mu", "oracle" if tag in ("T1", "T3", "T3-Lbar", "T4-dec",
                                             "T4-const", "SVRG") else "estimate")
    if isinstance(mu, (int, float)):
        return float(mu)
    smooth = _smooth_part(problem)
    if mu == "oracle":
        if tag in ("T4-dec",) and traces and traces[0].meta.get("mu") is not None:
            return float(traces[0].meta["mu"])  # the schedule's own constant
        value = getattr(smooth, "pl_constant", None)
        if not value:
            raise SpecError(f"no oracle gradient-domination constant for {tag}")
        return float(value)
    if mu != "estimate":
        raise SpecError(f"mu must be a number, 'oracle' or 'estimate', got {mu!r}")
    if tag in ("T5", "T6"):
        cloud = _estimation_cloud(problem, spec, x0, traces)
        return cond_mod.estimate_proximal_pl(problem, cloud)
    cloud = _estimation_cloud(smooth, spec, x0, traces)
    if tag == "GS":
        return cond_mod.estimate_condition(smooth, cloud, "PL_INF")
    if tag == "SIGN":
        weights = traces[0].meta.get("weights")
        if weights is None:
            raise SpecError("SIGN estimation needs the solver's weights")
        return cond_mod.estimate_weighted_pl(smooth, np.asarray(weights), cloud)
    return cond_mod.estimate_pl(smooth, cloud)


def _resolve_L(entry, tag, problem, traces):
    L = entry.get("L", "oracle")
    if isinstance(L, (int, float)):
        return float(L)
    if L != "oracle":
        raise SpecError(f"L must be a number or 'oracle', got {L!r}")
    meta = traces[0].meta if traces else {}
    if tag == "SVRG":
        return float(meta.get("component_L", _smooth_part(problem).lipschitz_L))
    if tag == "T3-Lbar":
        return float(meta["Lbar"])
    return float(meta.get("L", _smooth_part(problem).lipschitz_L))


def _certify_entry(entry, problem, solver_runs, spec, x0):
    tag = entry.get("theorem")
    if tag not in certify_mod.THEOREM_TAGS:
        raise SpecError(f"unknown theorem tag {entry.get('theorem')!r}")
    solver_idx = entry.get("solver", 0)
    if not (0 <= solver_idx < len(solver_runs)):
        raise SpecError(f"certificate references solver {solver_idx}, "
                        f"but only {len(solver_runs)} ran")
    traces = solver_runs[solver_idx]
    checkpoints = entry.get("checkpoints")
    mu = _resolve_mu(entry, tag, problem, traces, spec, x0)
    if tag in certify_mod.DETERMINISTIC_TAGS:
        L = None if tag == "SIGN" else _resolve_L(entry, tag, problem, traces)
        return certify_mod.certify_deterministic(traces[0], mu, L, tag,
                                                 checkpoints=checkpoints)
    params = {"mu": mu, "d": int(traces[0].meta.get("d", problem.d))}
    if tag == "T3-Lbar":
        params["Lbar"] = _resolve_L(entry, tag, problem, traces)
    else:
        params["L"] = _resolve_L(entry, tag, problem, traces)
    if tag in ("T4-dec", "T4-const"):
        c2 = entry.get("c2", "visited")
        params["C2"] = cond_mod.estimate_c2(traces) if c2 == "visited" else float(c2)
    if tag == "T4-const":
        params["alpha"] = float(traces[0].meta["alpha"])
    if tag == "SVRG":
        params["alpha"] = float(traces[0].meta["alpha"])
        params["m"] = int(traces[0].meta["m"])
    return certify_mod.certify_stochastic(traces, tag, params,
                                          checkpoints=checkpoints)


def _conditions_payload(problems, spec, x0s):
    cond_cfg = spec.get("conditions")
    if cond_cfg is None:
        return None, []
    reports = []
    chain_entries = []
    for problem, x0 in zip(problems, x0s):
        smooth = _smooth_part(problem)
        lo = cond_cfg.get("lo")
        hi = cond_cfg.get("hi")
        if lo is None or hi is None:
            lo, hi = cond_mod.default_box(problem, x0)
        count = int(cond_cfg.get("count", 10000))
        seed = int(cond_cfg.get("seed", 12345))
        entry = {"problem": getattr(problem, "tag", "problem")}
        if smooth.optimum_value is not None:
            cloud = cond_mod.make_cloud(smooth, lo, hi, count, seed)
            report = cond_mod.condition_report(smooth, cloud)
            entry["smooth"] = report.to_json_dict()
            if cond_cfg.get("chain"):
                verdict = cond_mod.verify_implication_chain(report,
                                                            smooth.lipschitz_L)
                entry["chain"] = verdict.to_json_dict()
                chain_entries.append((problem.tag, verdict))
        if isinstance(problem, CompositeProblem):
            cloud = cond_mod.make_cloud(problem, lo, hi, count, seed)
            entry["composite"] = {
                "PROX_PL": cond_mod.estimate_proximal_pl(problem, cloud),
                "KL": cond_mod.estimate_kl(problem, cloud),
                "PROX_EB_C": cond_mod.estimate_proximal_eb(problem, cloud),
                "cloud": cloud.generation,
            }
        reports.append(entry)
    return reports, chain_entries


def run_experiment(spec: dict, out_dir, seed_override=None,
                   trials_override=None) -> dict:
    """Execute one experiment spec; returns the summary dict (also written
    to summary.json)."""
    if not isinstance(spec, dict):
        raise SpecError("experiment spec must be a JSON object")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if "problems" in spec:
        problem_cfgs = spec["problems"]
    elif "problem" in spec:
        problem_cfgs = [spec["problem"]]
    else:
        raise SpecError("spec needs a 'problem' (or 'problems') entry")
    base_dir = Path(spec.get("_base_dir", "."))
    try:
        problems = [problem_from_config(_resolve_csv_refs(cfg, base_dir))
                    for cfg in problem_cfgs]
    except (KeyError, TypeError) as exc:
        raise SpecError(f"bad problem descriptor: {exc}") from exc
    main = problems[0]
    x0s = [_default_x0(spec if p is main else {}, p) for p in problems]
    x0 = x0s[0]

    certify_entries = spec.get("certify", [])
    for entry in certify_entries:
        if entry.get("theorem") not in certify_mod.THEOREM_TAGS:
            raise SpecError(f"unknown theorem tag {entry.get('theorem')!r}")
    need_points = bool(spec.get("conditions", {}).get("include_iterates")) or \
        any(e.get("mu", "estimate" if e.get("theorem") in ("GS", "SIGN", "T5", "T6")
            else "oracle") == "estimate" for e in certify_entries)

    solver_runs = []
    warnings = []
    for i, entry in enumerate(spec.get("solvers", [])):
        traces = _run_solver(main, x0, entry, need_points, seed_override,
                             trials_override)
        solver_runs.append(traces)
        traces[0].to_csv(out_dir / f"trace-{i}-{traces[0].algorithm_tag}.csv")
        for t in traces[:1]:
            if "warning" in t.meta:
                warnings.append(f"solver {i}: {t.meta['warning']}")

    reports, chain_entries = _conditions_payload(problems, spec, x0s)
    if reports is not None:
        _write_json(out_dir / "conditions.json", reports)

    certificates = []
    verdicts = []
    for entry in certify_entries:
        cert = _certify_entry(entry, main, solver_runs, spec, x0)
        certificates.append(cert)
        verdicts.append({"theorem": cert.theorem_tag, "verdict": cert.verdict})
        if cert.verdict == "vacuous":
            warnings.append(f"certificate {cert.theorem_tag}: " + "; ".join(cert.flags))
    for tag, verdict in chain_entries:
        verdicts.append({"theorem": f"CHAIN({tag})",
                         "verdict": "pass" if verdict.passed else "fail"})
    _write_json(out_dir / "certificates.json",
                [c.to_json_dict() for c in certificates])

    all_passed = all(v["verdict"] != "fail" for v in verdicts)
    summary = {"verdicts": verdicts, "all_passed": all_passed,
               "warnings": warnings}
    _write_json(out_dir / "summary.json", summary)
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pllab",
        description="Run first-order solver experiments with rate certification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment spec (JSON file)")
    p_run.add_argument("spec", type=Path)
    p_demo = sub.add_parser("demo", help="run a built-in demo by name")
    p_demo.add_argument("name")
    sub.add_parser("list", help="list built-in demo names")
    for p in (p_run, p_demo):
        p.add_argument("--out", "-o", type=Path, default=Path("pllab-out"))
        p.add_argument("--seed", type=int, default=None,
                       help="override every solver seed")
        p.add_argument("--trials", type=int, default=None,
                       help="override every trial count")

    args = parser.parse_args(argv)
    if args.command == "list":
        for name in list_demos():
            print(name)
        return 0
    try:
        if args.command == "demo":
            try:
                spec = demo_spec(args.name)
            except KeyError:
                raise SpecError(f"unknown demo {args.name!r}; "
                                f"available: {', '.join(list_demos())}")
        else:
            try:
                with open(args.spec) as fh:
                    spec = json.load(fh)
            except OSError as exc:
                raise SpecError(f"cannot read spec: {exc}")
            except json.JSONDecodeError as exc:
                raise SpecError(f"spec is not valid JSON: {exc}")
            spec["_base_dir"] = str(args.spec.parent)
        summary = run_experiment(spec, args.out, seed_override=args.seed,
                                 trials_override=args.trials)
    except PllabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for v in summary["verdicts"]:
        print(f"{v['theorem']}: {v['verdict']}")
    for w in summary["warnings"]:
        print(f"warning: {w}")
    print("ALL PASSED" if summary["all_passed"] else "FAILURES PRESENT")
    return 0 if summary["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
