"""Command-line front end: ``synth``, ``bode``, ``simulate``, ``identify``.

Exit status is 0 on success, 2 for usage or configuration errors and 3 for
numerical failures.  ``HYBRIDMOTION_OUTPUT_DIR`` overrides the output
directory of ``simulate`` and of ``bode --preset``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import synthesis as syn
from .analysis import BodeGrid, IdentificationError, bode_magnitude, identify_first_order_integrator
from .config import ConfigError, RunConfig
from .formats import FormatError, format_summary, read_frf_csv, write_bode_csv, write_trace_csv
from .ratfun import (
    RationalTF,
    RootFindingError,
    TransferFunctionError,
    format_tf,
    parse_tf,
    tf_feedback,
)
from .simcore import SimulationError, run_scenario

OUTPUT_DIR_ENV = "HYBRIDMOTION_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _plant_from_args(args) -> RationalTF:
    if args.plant:
        return parse_tf(args.plant)
    return syn.nominal_plant(args.K, args.tau)


def _loop_report(G: RationalTF, C: RationalTF) -> list[str]:
    H = tf_feedback(C * G)
    poles = H.poles()
    at_origin = int(np.sum(np.abs(poles) <= 1e-9))
    others = poles[np.abs(poles) > 1e-9]
    if np.any(others.real >= -1e-9):
        verdict = "unstable"
    elif at_origin:
        verdict = f"marginal ({at_origin} pole(s) at the origin)"
    else:
        verdict = "stable"
    worst = float(np.max(poles.real)) if poles.size else -math.inf
    return [
        f"proper={C.is_proper}",
        f"relative_degree={C.relative_degree}",
        f"closed_loop={verdict}",
        f"max_closed_loop_pole_real={worst!r}",
    ]


def cmd_synth(args) -> int:
    G = _plant_from_args(args)
    kind = args.type
    extra: list[str] = []
    if kind == "stiff_loopshape":
        C = syn.make_stiff_loopshape(G, args.omega0)
        text = format_tf(C) + "\n"
    elif kind == "viscous":
        if args.omega_c is None:
            raise UsageError("the viscous impedance controller is improper; give --omega-c for its low-pass filter")
        C = syn.make_viscous_impedance(G, args.alpha, args.omega_c)
        text = format_tf(C) + "\n"
    elif kind == "pid":
        gains = syn.PidGains(args.kp, args.ki, args.kd, args.omega_f)
        C = syn.make_pid(gains)
        text = format_tf(C) + "\n"
    elif kind in ("paper_cv", "paper_cve"):
        omega_c = syn.DEFAULT_OMEGA_C if args.omega_c is None else args.omega_c
        spec = syn.ReshapeSpec(omega_c=omega_c, kp=args.kp, sat_limit=args.sat)
        soft = syn.make_experimental_soft("viscous" if kind == "paper_cv" else "viscoelastic", spec)
        C = soft.linear_equivalent()
        text = soft.to_text()
        extra.append("feedback=-x (reference treated as zero)" if kind == "paper_cv" else "feedback=-C_x x + sat(kp e)")
    else:
        raise UsageError(f"unknown controller type {kind!r}")
    sys.stdout.write(text)
    for line in _loop_report(G, C) + extra:
        print(line)
    return EXIT_OK


def _preset_curves(preset: str) -> dict[str, RationalTF]:
    if preset in ("fig2", "fig3"):
        G = RationalTF.from_zpk([], [-10.0, -1000.0], 1e4)
        Cs = syn.make_stiff_loopshape(G, 100.0)
        Cv = syn.make_viscous_impedance(G, 100.0, math.inf)
        if preset == "fig2":
            return {
                "G": G,
                "H": tf_feedback(Cs * G),
                "S_s": syn.sensitivity(G, Cs),
                "S_v": syn.sensitivity(G, Cv),
            }
        return {"U_s": syn.control_sensitivity(G, Cs), "U_v": syn.control_sensitivity(G, Cv)}
    if preset == "fig5":
        G = syn.nominal_plant()
        spec = syn.ReshapeSpec(sat_limit=syn.RESHAPE_THRESHOLD)
        return {
            "S_s": syn.sensitivity(G, syn.make_pid(syn.PAPER_PID)),
            "S_v": syn.sensitivity(G, syn.make_experimental_soft("viscous", spec).linear_equivalent()),
            "S_ve": syn.sensitivity(G, syn.make_experimental_soft("viscoelastic", spec).linear_equivalent()),
        }
    raise UsageError(f"unknown preset {preset!r}")


def cmd_bode(args) -> int:
    if not args.omega_min < args.omega_max:
        raise UsageError(f"empty grid: omega-min {args.omega_min} >= omega-max {args.omega_max}")
    try:
        grid = BodeGrid(args.omega_min, args.omega_max, args.points_per_decade)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.preset:
        outdir = Path(os.environ.get(OUTPUT_DIR_ENV) or args.output_dir or ".")
        outdir.mkdir(parents=True, exist_ok=True)
        for name, tf in _preset_curves(args.preset).items():
            path = outdir / f"{args.preset}_{name}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                write_bode_csv(bode_magnitude(tf, grid), fh)
            print(path)
        return EXIT_OK
    if args.tf:
        tf = parse_tf(args.tf)
    elif args.tf_file:
        tf = parse_tf(Path(args.tf_file).read_text(encoding="utf-8").strip().splitlines()[0])
    else:
        raise UsageError("give --tf, --tf-file or --preset")
    samples = bode_magnitude(tf, grid)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_bode_csv(samples, fh)
    else:
        write_bode_csv(samples, sys.stdout)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_file(args.config)
    outdir = Path(os.environ.get(OUTPUT_DIR_ENV) or args.output_dir or cfg.values["output"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    stiff, soft = cfg.controllers()
    result = run_scenario(cfg.scenario(), stiff, soft, cfg.supervisor(), cfg.plant())
    out = cfg.values["output"]
    with open(outdir / out["trace"], "w", encoding="utf-8", newline="") as fh:
        write_trace_csv(result.records, fh)
    summary = format_summary(result.summary)
    (outdir / out["summary"]).write_text(summary, encoding="utf-8")
    (outdir / out["config_echo"]).write_text(cfg.to_ini(), encoding="utf-8")
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_identify(args) -> int:
    with open(args.frf, encoding="utf-8", newline="") as fh:
        samples = read_frf_csv(fh)
    if len(samples) < 3:
        raise UsageError(f"identification needs at least 3 samples, got {len(samples)}")
    K, tau, residual = identify_first_order_integrator(samples)
    print(f"K={K!r}")
    print(f"tau={tau!r}")
    print(f"residual={residual!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridmotion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a controller and report the closed loop")
    p.add_argument("type", choices=["stiff_loopshape", "viscous", "pid", "paper_cv", "paper_cve"])
    p.add_argument("--plant", help="plant as 'num: ... / den: ...' (default: identified stage)")
    p.add_argument("--K", type=float, default=syn.NOMINAL_K)
    p.add_argument("--tau", type=float, default=syn.NOMINAL_TAU)
    p.add_argument("--omega0", type=float, default=100.0)
    p.add_argument("--alpha", type=float, default=100.0)
    p.add_argument("--omega-c", dest="omega_c", type=float)
    p.add_argument("--kp", type=float, default=syn.PAPER_KP)
    p.add_argument("--ki", type=float, default=syn.PAPER_KI)
    p.add_argument("--kd", type=float, default=syn.PAPER_KD)
    p.add_argument("--omega-f", dest="omega_f", type=float, default=syn.DEFAULT_DERIVATIVE_CUTOFF)
    p.add_argument("--sat", type=float, default=syn.RESHAPE_THRESHOLD)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bode", help="magnitude/phase samples as CSV")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--tf", help="'num: ... / den: ...'")
    src.add_argument("--tf-file")
    src.add_argument("--preset", choices=["fig2", "fig3", "fig5"])
    p.add_argument("--omega-min", type=float, default=1e-1)
    p.add_argument("--omega-max", type=float, default=1e4)
    p.add_argument("--points-per-decade", type=int, default=20)
    p.add_argument("--output", help="CSV path (default: stdout)")
    p.add_argument("--output-dir", help="directory for --preset files")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("simulate", help="run a scenario from an INI config")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", help="fit K and tau to an FRF CSV")
    p.add_argument("frf")
    p.set_defaults(func=cmd_identify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RootFindingError, SimulationError, IdentificationError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TransferFunctionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
