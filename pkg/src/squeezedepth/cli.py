"""Command-line front end.

Exit codes: 0 success, 1 numeric or domain failure, 2 usage error.
Every subcommand accepts ``--config FILE.json``; keys are option names
(dashes or underscores) and explicit flags take precedence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import depth, fj, gssi, moments, symsim, thermal
from .spin import Spin

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _spin_arg(text):
    try:
        spin = Spin.from_value(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid spin {text!r}: {exc}") from exc
    if spin.two_j < 1:
        raise UsageError("spin must be at least 1/2")
    return spin


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _read_shots(path, fmt, j):
    if not path:
        raise UsageError("--input is required")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    if fmt == "auto":
        fmt = "jsonl" if p.suffix in (".jsonl", ".json") else "csv"
    return moments.load_shots(p, fmt=fmt, j=j)


def _axes(text):
    parts = [a.strip().lower() for a in text.split(",")]
    if len(parts) != 2 or any(a not in moments.AXES for a in parts) or parts[0] == parts[1]:
        raise UsageError("--axes takes two different labels, mean-spin axis first (e.g. z,x)")
    return tuple(parts)


def _moments_from_json(path, spin, axes):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"moments file not found: {path}")
    data = json.loads(p.read_text(encoding="utf-8"))
    required = ("mean_n", "mean_j_n", "var_j_perp")
    missing = [k for k in required if k not in data]
    if missing:
        raise UsageError(f"moments file lacks {', '.join(missing)}")
    return moments.MomentSummary(
        spin=spin,
        mean_n=float(data["mean_n"]),
        mean_n2=float(data.get("mean_n2", data["mean_n"] ** 2)),
        mean_j_n=float(data["mean_j_n"]),
        var_j_perp=float(data["var_j_perp"]),
        axes=axes,
        se={k: float(v) for k, v in data.get("se", {}).items()},
        fixed_n=data.get("fixed_n"),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_fj(args):
    spin = _spin_arg(args.j)
    if args.grid < 3:
        raise UsageError("--grid must be at least 3")
    try:
        scan = fj.ScanGrid(n_points=args.grid, mu_min=args.mu_min, mu_max=args.mu_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    curve = fj.compute_fj(spin, scan)
    _emit(curve.to_csv(), args.out)


def cmd_certify(args):
    spin = _spin_arg(args.j)
    axes = _axes(args.axes)
    if bool(args.input) == bool(args.moments):
        raise UsageError("certify needs exactly one of --input (shots) or --moments (JSON)")
    if args.input:
        recs = _read_shots(args.input, args.format, spin)
        summary = moments.estimate(recs, axes=axes, weighted=False)
    else:
        summary = _moments_from_json(args.moments, spin, axes)
    sigma = args.sigma if args.sigma > 0 else None
    cert = depth.certify_depth(summary, spin, k_max=args.k_max, mode=args.mode, sigma=sigma)
    _emit(cert.to_json(), args.out)


def cmd_gssi(args):
    recs = _read_shots(args.input, args.format, 0.5)
    summary = moments.estimate(recs, axes=_axes(args.axes))
    if args.mode == "fixed":
        n = args.n if args.n is not None else summary.fixed_n
        if n is None:
            raise UsageError("particle number varies between shots; pass --n or use --mode fluctuating")
        report = gssi.eval_complete_set_fixed(n, summary)
    else:
        report = gssi.eval_complete_set_fluctuating(summary, duan_k=args.duan_k)
    _emit(report.to_json(), args.out)


def cmd_duan(args):
    recs = _read_shots(args.input, args.format, 0.5)
    summary = moments.estimate(recs, axes=("z", "x"), weighted=True)
    _emit(gssi.duan_min_k(summary, k_tested=args.k).to_json(), args.out)


def cmd_thermal(args):
    try:
        trap = thermal.TrapSpec(args.omega_z, args.omega_perp, args.temperature, args.n_total)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(thermal.solve_mu(trap, threshold=args.threshold).to_json(), args.out)


def symmetrize_table(points: int):
    """Rows (alpha, beta, xi2_alpha, xi2_beta) on alpha = k / (points + 1)."""
    rows = []
    for k in range(1, points + 1):
        alpha = k / (points + 1)
        state = symsim.psi_alpha(alpha)
        sym = symsim.symmetrize(state)
        rows.append((alpha, symsim.beta_of_alpha(alpha), symsim.xi2_state(state), symsim.xi2_state(sym)))
    return rows


def cmd_demo_symmetrize(args):
    if args.points < 1:
        raise UsageError("--points must be positive")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "beta", "xi2_alpha", "xi2_beta"])
    for row in symmetrize_table(args.points):
        w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)


def _build_state(args):
    ns = [int(v) for v in str(args.n).split(",")]
    weights = [float(v) for v in args.weights.split(",")] if args.weights else [1.0] * len(ns)
    if len(weights) != len(ns):
        raise UsageError("--weights must list one weight per --n value")
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise UsageError("--weights must be nonnegative with a positive sum")
    total = sum(weights)
    sectors = []
    for n, w in zip(ns, weights):
        if n < 1:
            raise UsageError("particle numbers must be positive")
        if args.state == "css":
            st = symsim.css(n, args.polarization)
        elif args.state == "twin-fock":
            if n % 2:
                raise UsageError("twin-Fock states need an even n")
            st = symsim.twin_fock(n)
        else:
            if n % args.block_size:
                raise UsageError("--n must be a multiple of --block-size")
            st = symsim.squeezed_block_state(n // args.block_size, args.block_size, args.x)
        sectors.append((w / total, st))
    return symsim.FluctuatingState(tuple(sectors)) if len(sectors) > 1 else sectors[0][1]


def cmd_simulate(args):
    if args.count < 1:
        raise UsageError("--count must be positive")
    axes = [a.strip().lower() for a in args.axis.split(",")]
    if any(a not in moments.AXES for a in axes):
        raise UsageError("--axis takes labels from x, y, z")
    state = _build_state(args)
    recs = symsim.sample_shots(state, axes, args.count, args.seed)
    text = recs.to_jsonl() if args.format == "jsonl" else recs.to_csv()
    _emit(text, args.out)


# ---------------------------------------------------------------------------
# parser


def _shots_options(p):
    p.add_argument("--input", help="shot records file")
    p.add_argument("--format", choices=("auto", "csv", "jsonl"), default="auto")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squeezedepth", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fj", help="tabulate the minimal-variance curve F_j as CSV")
    p.add_argument("--j", required=True, help="particle spin, e.g. 0.5 or 3/2")
    p.add_argument("--grid", type=int, default=400, help="number of multiplier grid points")
    p.add_argument("--mu-min", type=float, default=1e-3)
    p.add_argument("--mu-max", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fj)

    p = sub.add_parser("certify", help="certify entanglement depth from shots or moments")
    _shots_options(p)
    p.add_argument("--moments", help="JSON with mean_n, mean_j_n, var_j_perp (and optional se)")
    p.add_argument("--axes", default="z,x", help="mean-spin axis, transverse axis")
    p.add_argument("--j", default="0.5")
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--mode", choices=[m.value for m in fj.EvalMode], default="certify")
    p.add_argument("--sigma", type=float, default=3.0, help="significance threshold; 0 disables")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("gssi", help="evaluate the complete spin-squeezing inequality set")
    _shots_options(p)
    p.add_argument("--axes", default="z,x")
    p.add_argument("--mode", choices=("fixed", "fluctuating"), default="fluctuating")
    p.add_argument("--n", type=int, default=None, help="particle number for --mode fixed")
    p.add_argument("--duan-k", type=int, default=1)
    p.set_defaults(func=cmd_gssi)

    p = sub.add_parser("duan", help="smallest k consistent with the Duan bound")
    _shots_options(p)
    p.add_argument("--k", type=int, default=None, help="also report the verdict at this k")
    p.set_defaults(func=cmd_duan)

    p = sub.add_parser("thermal", help="chemical potential of an ideal Bose gas in a harmonic trap")
    p.add_argument("--omega-z", type=float, default=2.0, help="axial frequency, 2 pi / s")
    p.add_argument("--omega-perp", type=float, default=1000.0, help="radial frequency, 2 pi / s")
    p.add_argument("--temperature", type=float, default=30e-6, help="kelvin")
    p.add_argument("--n-total", type=float, default=5e5)
    p.add_argument("--threshold", type=float, default=1e-3, help="distinguishability threshold")
    p.add_argument("--out")
    p.set_defaults(func=cmd_thermal)

    p = sub.add_parser("demo-symmetrize", help="xi^2 before and after symmetrizing a two-qubit product")
    p.add_argument("--points", type=int, default=99)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo_symmetrize)

    p = sub.add_parser("simulate", help="write synthetic shot records")
    p.add_argument("--state", choices=("css", "twin-fock", "blocks"), required=True)
    p.add_argument("--n", required=True, help="particle number, or a comma list for a mixture")
    p.add_argument("--weights", default=None, help="mixture weights matching --n")
    p.add_argument("--polarization", choices=moments.AXES, default="z", help="CSS direction")
    p.add_argument("--block-size", type=int, default=5)
    p.add_argument("--x", type=float, default=0.8, help="block polarization <J_z>/J")
    p.add_argument("--axis", default="z,x", help="measured axes, comma separated")
    p.add_argument("--count", type=int, default=1000, help="shots per axis")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    path = Path(known.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {known.config}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    # top-level keys apply to every subcommand; a section named after a subcommand wins for it
    shared = {k.replace("-", "_"): v for k, v in cfg.items() if k not in subparsers.choices}
    for name, sp in subparsers.choices.items():
        section = cfg.get(name, {})
        if not isinstance(section, dict):
            raise UsageError(f"config section {name!r} must be a JSON object")
        defaults = {**shared, **{k.replace("-", "_"): v for k, v in section.items()}}
        dests = {a.dest for a in sp._actions}
        unknown = set(section) - {k.replace("_", "-") for k in dests} - dests
        if unknown:
            raise UsageError(f"config section {name!r} has unknown options: {sorted(unknown)}")
        sp.set_defaults(**{k: v for k, v in defaults.items() if k in dests})
        for action in sp._actions:
            if action.dest in defaults:
                action.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
