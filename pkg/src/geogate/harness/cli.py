"""Command line interface.

Every subcommand reads an optional configuration file, applies command line
overrides and writes CSV (with a ``# name vN`` first line) or JSON depending on
the ``--out`` extension; without ``--out`` CSV goes to standard output. Library
errors end the process with a nonzero exit code and a JSON record
``{"error": <category>, "message": ...}`` on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import GeoGateError
from ..propagator import calibrate_omega_eff
from .config import VARIANTS, load_config
from .io import write_output
from .montecarlo import monte_carlo
from .pipeline import run_variant
from .sweep import SWEEP_VERSION, SweepSpec, sweep
from .trajectory import TRAJECTORY_VERSION, trajectory_table

MC_VERSION = "geogate-montecarlo v1"
CAL_VERSION = "geogate-calibration v1"
INTERNAL_EXIT = 70


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML or JSON configuration file")
    p.add_argument("--out", help="output path; .json writes JSON, anything else CSV")
    p.add_argument("--variant", choices=sorted(VARIANTS), help="gate variant")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--fock-dim", type=int, help="motional truncation")
    p.add_argument("--step-div", type=int, help="integrator steps per trap period")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="geogate", description="Geometric phase gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="calibrate and run one gate")
    p.add_argument("--input", default="DD", choices=["SS", "SD", "DS", "DD"], help="computational input state")

    for name, what in (("sweep-eta", "Lamb-Dicke parameter"), ("sweep-omega", "Rabi frequency over nu")):
        p = sub.add_parser(name, parents=[common], help=f"sweep the {what}")
        p.add_argument("--range", nargs=3, type=float, metavar=("MIN", "MAX", "N"), help="override the sweep grid")
        p.add_argument("--workers", type=int, default=None, help="process pool size (default: CPU count)")

    p = sub.add_parser("montecarlo", parents=[common], help="quasi-static noise Monte Carlo")
    p.add_argument("--samples", type=int, help="number of shots")
    p.add_argument("--no-sensitivities", action="store_true", help="skip the one-at-a-time sensitivities")
    p.add_argument("--shots-out", help="also write the individual shots (CSV)")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("trajectory", parents=[common], help="export alpha(t) and Phi(t)")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--analytic-only", action="store_true", help="skip the full-model columns")

    p = sub.add_parser("calibrate", parents=[common], help="measure the corrected effective coupling")
    p.add_argument("--method", choices=["displacement", "phase"], default="displacement")
    return parser


def resolve(args):
    cfg = load_config(args.config)
    over = {"variant": args.variant, "seed": args.seed, "fock_dim": args.fock_dim, "step_div": args.step_div}
    cfg = replace(cfg, **{k: v for k, v in over.items() if v is not None})
    return replace(cfg, fluctuations=replace(cfg.fluctuations, rng_seed=cfg.seed))


def _cmd_simulate(args, cfg):
    run = run_variant(cfg)
    cal = run.calibration
    extra = {"omega_eff_analytic": cal.omega_eff_analytic, "omega_eff_corrected": cal.omega_eff_corrected,
             "reduction_factor": cal.reduction_factor, "delta_rad_s": cal.plan.delta,
             "omega_rad_s": cal.config.omega, "second_phase": run.second_phase}
    report = replace(run.report(args.input), params={**run.report(args.input).params, **extra})
    text = report.to_json() if args.out and Path(args.out).suffix.lower() == ".json" else report.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    return text


def _cmd_sweep(args, cfg, variable):
    lo, hi, n = args.range if args.range else (cfg.sweep_eta if variable == "eta" else cfg.sweep_omega_over_nu)
    variants = (args.variant,) if args.variant else tuple(VARIANTS)
    spec = SweepSpec.linear(variable, lo, hi, int(n), cfg, variants)
    return write_output(sweep(spec, args.workers), SWEEP_VERSION, args.out)


def _cmd_montecarlo(args, cfg):
    fl = cfg.fluctuations if args.samples is None else replace(cfg.fluctuations, n_samples=args.samples)
    res = monte_carlo(cfg, fl, sensitivities=not args.no_sensitivities, workers=args.workers)
    if args.shots_out:
        write_output(res.rows(), MC_VERSION, args.shots_out)
    return write_output({**res.summary(), **cfg.params()}, MC_VERSION, args.out)


def _cmd_trajectory(args, cfg):
    return write_output(trajectory_table(cfg, args.points, not args.analytic_only), TRAJECTORY_VERSION, args.out)


def _cmd_calibrate(args, cfg):
    kw = {"fock_dim": cfg.fock_dim}
    if args.method == "phase":
        kw["commensurate"] = cfg.commensurate
    drive = cfg.with_(variant="plain").drive_config()
    res = calibrate_omega_eff(drive, cfg.integrator(), args.method, **kw)
    row = {"calibration_method": res.method, "omega_eff_analytic": res.omega_eff_analytic,
           "omega_eff_corrected": res.omega_eff_corrected, "reduction_factor": res.reduction_factor,
           **cfg.params()}
    return write_output(row, CAL_VERSION, args.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "simulate":
            text = _cmd_simulate(args, cfg)
        elif args.command in ("sweep-eta", "sweep-omega"):
            text = _cmd_sweep(args, cfg, "eta" if args.command == "sweep-eta" else "omega_over_nu")
        elif args.command == "montecarlo":
            text = _cmd_montecarlo(args, cfg)
        elif args.command == "trajectory":
            text = _cmd_trajectory(args, cfg)
        else:
            text = _cmd_calibrate(args, cfg)
    except GeoGateError as exc:
        sys.stderr.write(json.dumps({"error": exc.category, "message": str(exc)}) + "\n")
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001 - report anything unexpected in the same format
        sys.stderr.write(json.dumps({"error": "internal", "message": f"{type(exc).__name__}: {exc}"}) + "\n")
        return INTERNAL_EXIT
    if not args.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
