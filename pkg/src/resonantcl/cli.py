"""Command line: ``resonantcl run|sweep|report|scenarios``.

Configurations are scenario INI files (see the README); shipped scenarios
can be named instead of given as paths.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ResonantError, SweepError
from .fields import write_snapshot
from .harness import ConvergenceReport, plan_from_config, run_sweep, write_outputs
from .monitors import check_lemma_bounds
from .scenarios import list_scenarios, load_scenario, validate
from .solver import SolverConfig, SolverRun, run_to_end

log = logging.getLogger("resonantcl")


def _out_dir(args, scenario) -> Path:
    if args.out:
        return Path(args.out)
    cfg = scenario.settings
    d = cfg.get("output", "directory") if cfg is not None else None
    return Path(d) if d else Path("out") / scenario.name


def cmd_run(args) -> int:
    sc = load_scenario(args.config)
    cfg = sc.settings
    nx = args.nx or cfg.int("solver", "nx", 128)
    eps = args.epsilon or cfg.float("solver", "epsilon")
    if eps is None:
        raise ResonantError("[solver] epsilon is required for a single run")
    config = SolverConfig.balanced(
        eps, cfg.float("solver", "balance_c", 1.0),
        t_end=cfg.float("solver", "t_end", 1.0),
        cfl_safety=cfg.float("solver", "cfl_safety", 0.9),
        output_times=cfg.floats("solver", "output_times", default=()),
        timestep_rule=(cfg.get("solver", "timestep_rule") or "combined").strip(),
        mollifier_profile=(cfg.get("solver", "mollifier_profile") or "flat").strip())
    k, l, u0 = sc.fields(sc.grid(nx))
    run = SolverRun.from_fields(config, sc.model, k, l, u0,
                                track_psi=cfg.bool("solver", "track_psi", True))
    log.info("run %s: nx=%d eps=%g delta=%g backend=%s", sc.name, nx, eps, config.delta, run.backend)
    run_to_end(run)
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    for t, snap in run.snapshots.items():
        write_snapshot(snap, out / f"u_t{t:.6g}.csv")
    run.monitors.to_csv(out / "monitors.csv")
    rep = check_lemma_bounds(run.monitors, {"linf_box": sc.model.state_bounds})
    flag = run.flag()
    lines = [f"scenario {sc.name}: nx={nx} eps={eps:g} delta={config.delta:g} "
             f"t_end={config.t_end:g} steps={run.n_steps}",
             f"state range [{run.state_min:.17g}, {run.state_max:.17g}]",
             f"mass {run.mass():.12g} (initial {run.initial_mass:.12g}, outflow {run.outflow:.3g})",
             f"minimum support margin {run.min_support_margin():.4g}"
             + (f"  FLAGGED: {flag}" if flag else ""),
             rep.summary()]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"outputs written to {out}")
    return 0


def cmd_sweep(args) -> int:
    sc = load_scenario(args.config)
    overrides = {}
    if args.levels:
        overrides["n_levels"] = args.levels
    if args.allow_invalid:
        overrides["require_valid"] = False
    plan = plan_from_config(sc, **overrides)
    log.info("sweep %s: %d levels", sc.name, plan.n_levels)
    try:
        report = run_sweep(plan)
    except SweepError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return 1
    out = write_outputs(report, _out_dir(args, sc))
    print(report.summary())
    print(f"outputs written to {out}")
    return 0


def cmd_report(args) -> int:
    p = Path(args.path)
    if p.is_dir():
        p = p / "report.json"
    report = ConvergenceReport.from_json(p.read_text())
    print(report.to_csv() if args.csv else report.summary(), end="" if args.csv else "\n")
    return 0


def cmd_scenarios(args) -> int:
    for name in list_scenarios():
        sc = load_scenario(name)
        line = f"{name:<24s} role={sc.role}"
        if args.validate:
            v = validate(sc)
            state = "valid" if v.passed else "fails " + ",".join(v.failed_checks)
            line += f"  {state} ({'as documented' if v.as_documented else 'UNEXPECTED'})"
        print(line)
        if args.verbose and sc.notes:
            print(f"    {sc.notes}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resonantcl", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single viscous solve from a configuration")
    p.add_argument("config", help="scenario name or INI path")
    p.add_argument("--nx", type=int, help="override [solver] nx")
    p.add_argument("--epsilon", type=float, help="override [solver] epsilon")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="balanced refinement sweep from a configuration")
    p.add_argument("config", help="scenario name or INI path")
    p.add_argument("--levels", type=int, help="override [sweep] n_levels")
    p.add_argument("--allow-invalid", action="store_true",
                   help="run even if the scenario fails validation (controls)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="re-render a stored sweep report")
    p.add_argument("path", help="report.json or the directory holding it")
    p.add_argument("--csv", action="store_true", help="print the CSV table instead of the summary")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("scenarios", help="list shipped scenarios")
    p.add_argument("--validate", action="store_true", help="run the scenario checks")
    p.set_defaults(func=cmd_scenarios)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ResonantError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
