"""Command-line entry point: configuration in, CSV/JSON artifacts out.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime guard
(overflow, boundary pollution, missing or truncated artifacts).
Anything graphical lives in downstream consumers of the emitted files.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from .errors import BoundaryPollutionError, ConfigError, OverflowGuardError, XnlsError
from .evolution import evolve
from .inequalities import inequality_suite
from .orlicz import OrliczSpec, luxemburg_norm
from .profiles import moser_profile_field
from .rearrange import rearrange, rearrangement_invariants
from .rundir import RunDirectory, read_snapshot, write_json, write_snapshot
from .scattering import build_report

USAGE_EXIT = 1
GUARD_EXIT = 2


def _load_config(path, overrides):
    tomllib = cfgmod.tomllib
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    if overrides:
        raw = cfgmod.apply_overrides(raw, overrides)
    return cfgmod.resolve(raw)


def cmd_evolve(args):
    cfg = _load_config(args.config, args.set)
    u0 = cfgmod.initial_field(cfg)
    sim = cfgmod.sim_config(cfg)
    rd = RunDirectory.create(cfg["output"]["directory"], cfg)
    try:
        series = evolve(u0, sim, snapshot_sink=rd.snapshot_sink())
    except (OverflowGuardError, BoundaryPollutionError) as exc:
        partial = getattr(exc, "series", None)
        if partial is not None:
            for key in partial.columns:
                partial.columns[key] = np.asarray(partial.columns[key])
            rd.write_series(partial)
        rd.write_manifest(cfg, suites={"evolve": "aborted"})
        print(f"run aborted: {exc}", file=sys.stderr)
        return GUARD_EXIT
    rd.write_series(series)
    rd.write_manifest(cfg, suites={"evolve": "completed"})
    print(rd.root)
    return 0


def cmd_diagnose(args):
    rd = RunDirectory(args.rundir)
    snapshots = rd.snapshots()
    times = [t for t, _ in snapshots]
    t0 = args.t0 if args.t0 is not None else times[0]
    t1 = args.t1 if args.t1 is not None else times[-1]
    report, v_plus = build_report(snapshots, (t0, t1), run_id=os.path.basename(
        os.path.normpath(args.rundir)))
    write_json(os.path.join(args.rundir, "report.json"), report)
    write_snapshot(os.path.join(args.rundir, "v_plus.bin"), t1, v_plus)
    print(json.dumps(report["pass"]))
    return 0


def cmd_inequalities(args):
    cfg = _load_config(args.config, args.set)
    suite = inequality_suite(
        cfgmod.grid_of(cfg),
        seed=cfg["bank"]["seed"],
        size=cfg["bank"]["size"],
        families=tuple(cfg["bank"]["families"]),
    )
    outdir = cfg["output"]["directory"]
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "inequalities.json")
    write_json(path, suite)
    print(path)
    return 0 if all(suite["pass"].values()) else GUARD_EXIT


def cmd_moser(args):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "grad_l2", "l2", "orlicz_L", "orlicz_Ltilde"])
    for a in args.alpha:
        u = moser_profile_field(a)
        writer.writerow([
            repr(float(a)),
            repr(float(np.sqrt(u.grad_l2_sq()))),
            repr(float(u.l2())),
            repr(float(luxemburg_norm(u, OrliczSpec("L")))),
            repr(float(luxemburg_norm(u, OrliczSpec("Ltilde")))),
        ])
    text = buf.getvalue()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def cmd_orlicz(args):
    _, u = read_snapshot(args.input)
    spec = OrliczSpec(args.variant, args.threshold)
    result = {
        "input": args.input,
        "variant": spec.variant,
        "threshold": spec.threshold,
        "luxemburg_norm": luxemburg_norm(u, spec),
    }
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def cmd_rearrange(args):
    t, u = read_snapshot(args.input)
    star = rearrange(u)
    out = args.out or args.input + ".rearranged.bin"
    write_snapshot(out, t, star)
    inv = rearrangement_invariants(u)
    print(json.dumps({
        "output": out,
        "lp_deviation": {str(p): v for p, v in inv["lp"].items()},
        "orlicz_deviation": inv["orlicz"],
        "grad_ratio": inv["grad_ratio"],
    }, indent=2, sort_keys=True))
    return 0


def cmd_fulltest(args):
    from .acceptance import run_all

    results = run_all(fast=args.fast)
    ok = True
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        print(f"[{status}] {name}: {detail}")
        ok = ok and passed
    return 0 if ok else GUARD_EXIT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xnls",
        description="Spectral laboratory for the 2-D exponential NLS",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run the splitting integrator")
    p.add_argument("config")
    p.add_argument("--set", action="append", default=[],
                   metavar="SECTION.KEY=VALUE", help="override a config key")
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("diagnose", help="space-time norms and scattering test")
    p.add_argument("rundir")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--t1", type=float, default=None)
    p.set_defaults(fn=cmd_diagnose)

    p = sub.add_parser("inequalities", help="run the inequality bank")
    p.add_argument("config")
    p.add_argument("--set", action="append", default=[],
                   metavar="SECTION.KEY=VALUE")
    p.set_defaults(fn=cmd_inequalities)

    p = sub.add_parser("moser", help="norm table of the concentration family")
    p.add_argument("--alpha", type=float, nargs="+", default=[4.0, 8.0, 16.0])
    p.add_argument("--out", default=None, help="also write the CSV here")
    p.set_defaults(fn=cmd_moser)

    p = sub.add_parser("orlicz", help="Luxemburg norm of a stored field")
    p.add_argument("input")
    p.add_argument("--variant", choices=("L", "Ltilde"), default="Ltilde")
    p.add_argument("--threshold", type=float, default=1.0)
    p.set_defaults(fn=cmd_orlicz)

    p = sub.add_parser("rearrange", help="symmetric decreasing rearrangement")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_rearrange)

    p = sub.add_parser("fulltest", help="run the acceptance suite")
    p.add_argument("--fast", action="store_true",
                   help="reduced resolutions and horizons")
    p.set_defaults(fn=cmd_fulltest)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (OverflowGuardError, BoundaryPollutionError) as exc:
        print(f"runtime guard: {exc}", file=sys.stderr)
        return GUARD_EXIT
    except (XnlsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return GUARD_EXIT


if __name__ == "__main__":
    sys.exit(main())
