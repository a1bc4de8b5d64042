"""Command-line front end for the experiment runners.

Subcommands: ml-table, simulate, lmi, compare, sweep, validate, accept.
Global options --config/--out/--h/--t-end attach to each subcommand; the
FRACSTAB_OUT environment variable overrides the default output root.
Exit codes: 0 all checks passed, 1 a run check failed or the certificate
search was infeasible, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, hopfield, stability
from .errors import ConfigError, FracstabError, Infeasible


def _common(sub):
    sub.add_argument("--config", help="TOML config (defaults to the built-in "
                                      "benchmark parameters)")
    sub.add_argument("--out", help="output directory root "
                                   "(default $FRACSTAB_OUT or ./out)")
    sub.add_argument("--h", type=float, help="solver step size override [s]")
    sub.add_argument("--t-end", type=float, dest="t_end",
                     help="simulation horizon override [s]")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fracstab",
        description="Fractional-order delay systems: simulation, stability "
                    "certificates, adaptive control experiments.")
    sp = p.add_subparsers(dest="command", required=True)

    s = sp.add_parser("ml-table", help="Mittag-Leffler decay table and figures")
    s.add_argument("--alpha", default="0.5,0.7,0.85,0.95,1.0",
                   help="comma-separated fractional orders")
    s.add_argument("--t-max", type=float, default=10.0, dest="t_max")
    s.add_argument("--points", type=int, default=200)
    _common(s)

    s = sp.add_parser("simulate", help="benchmark simulation experiments")
    s.add_argument("--experiment", choices=("uncontrolled", "adaptive", "delay"),
                   default="uncontrolled")
    _common(s)

    s = sp.add_parser("lmi", help="stability certificate for a system config")
    s.add_argument("--system", required=True, help="TOML config path")
    _common(s)

    s = sp.add_parser("compare", help="adaptive vs sliding-mode comparison")
    s.add_argument("--system", help="alias for --config")
    s.add_argument("--controllers", default="adaptive,smc",
                   help="which controllers to run (informational; both are "
                        "needed for the comparison table)")
    _common(s)

    s = sp.add_parser("sweep", help="sensitivity sweeps")
    s.add_argument("--param", choices=("alpha", "tau"), required=True)
    s.add_argument("--values", help="comma-separated sweep values")
    _common(s)

    s = sp.add_parser("validate", help="Lyapunov functional validation")
    s.add_argument("--run", help="manifest of a previous run to validate")
    _common(s)

    s = sp.add_parser("accept", help="run the acceptance suite")
    s.add_argument("pytest_args", nargs="*",
                   help="extra arguments forwarded to pytest")
    return p


def _print_manifest_summary(man: experiments.RunManifest) -> None:
    status = "ok" if man.ok else "FAILED CHECKS"
    print(f"[{man.experiment}] {status}")
    for k, v in man.checks.items():
        print(f"  check {k}: {'pass' if v else 'FAIL'}")
    for k, v in man.notes.items():
        print(f"  note {k}: {v}")
    print(f"  manifest: {man.outputs.get('manifest', '-')}")


def _run(name, args, config=None) -> int:
    man = experiments.run_experiment(
        name, config=config if config is not None else args.config,
        out=args.out, h=args.h, t_end=args.t_end)
    _print_manifest_summary(man)
    return 0 if man.ok else 1


def cmd_ml_table(args) -> int:
    cfg = experiments.merged_config(args.config)
    cfg["ml"]["alphas"] = [float(a) for a in args.alpha.split(",") if a]
    cfg["ml"]["t_max"] = args.t_max
    cfg["ml"]["points"] = args.points
    return _run("ml_curves", args, config=cfg)


def cmd_simulate(args) -> int:
    name = {"uncontrolled": "uncontrolled", "adaptive": "adaptive",
            "delay": "delay_characterization"}[args.experiment]
    return _run(name, args)


def cmd_lmi(args) -> int:
    cfg = experiments.merged_config(args.system)
    params = hopfield.params_from_dict(cfg)
    prob = experiments.stability_problem(params, cfg.get("stability", {}))
    try:
        cert = stability.solve_lmi(prob)
    except Infeasible as exc:
        doc = {"status": "infeasible", "provable": exc.provable,
               "diagnostic": str(exc),
               "best_lambda_max": exc.best_lambda_max}
        print(json.dumps(doc, indent=2, sort_keys=True, default=float))
        return 1
    doc = {
        "status": "feasible",
        "P": cert.weights.P.tolist(),
        "Q": cert.weights.Q.tolist(),
        "R": cert.weights.R.tolist(),
        "eps1": cert.eps1, "eps2": cert.eps2, "eps3": cert.eps3,
        "gamma": cert.gamma, "delta": cert.delta,
        "delay_margin": cert.delay_margin,
        "c1": cert.bounds.c1, "c2": cert.bounds.c2,
        "normalization_lambda_max_P": cert.normalization,
        "recheck_passed": stability.verify_certificate(prob, cert).passed,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    if args.out:
        outdir = experiments.out_root(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "certificate.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_compare(args) -> int:
    wanted = {c.strip() for c in args.controllers.split(",") if c.strip()}
    if not {"adaptive", "smc"} <= wanted:
        print("compare always runs both controllers; ignoring the narrower "
              f"selection {sorted(wanted)}", file=sys.stderr)
    return _run("compare", args, config=args.system or args.config)


def cmd_sweep(args) -> int:
    name = "sensitivity_alpha" if args.param == "alpha" else "sensitivity_tau"
    cfg = experiments.merged_config(args.config)
    if args.values:
        vals = [float(v) for v in args.values.split(",") if v]
        key = "alphas" if args.param == "alpha" else "tau_bars"
        cfg["sweep"][key] = vals
    return _run(name, args, config=cfg)


def cmd_validate(args) -> int:
    config = args.config
    if args.run:
        man = experiments.load_manifest(args.run)
        config = man["config"]
    return _run("lyapunov_validation", args, config=config)


def cmd_accept(args) -> int:
    import pytest

    test_file = Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
    if not test_file.exists():
        print("acceptance suite not found next to the package; run pytest "
              "from a source checkout", file=sys.stderr)
        return 2
    return pytest.main([str(test_file), "-v", "-s", *args.pytest_args])


_COMMANDS = {
    "ml-table": cmd_ml_table,
    "simulate": cmd_simulate,
    "lmi": cmd_lmi,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "accept": cmd_accept,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FracstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
