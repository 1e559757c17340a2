"""Command-line interface.

Subcommands: ``invert``, ``direct``, ``table``, ``sweep``, ``selftest``.
Exit status is 0 on success, 1 on invalid input, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .direct_solver import DEFAULT_DT, solve_direct
from .errors import NumericalError, StefanError, ValidationError
from .experiments import (
    NOISE_LEVELS,
    fit_log_constant,
    run_inversion,
    run_table,
    stability_sweep,
    sweep_config,
    write_report_csv,
)
from .problems import DEFAULT_SMOOTHING_WINDOW, example_flux, load_example
from .regularize import DEFAULT_MAX_ITERS, DEFAULT_STOP_TOL

log = logging.getLogger("stefan_inverse")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
SWEEP_H = 2.0

# derived random streams: seed + offset
NOISE_STREAM = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _grid(text):
    parts = [p for p in text.split(",") if p]
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be M or M,N, got {text!r}")
    if len(vals) not in (1, 2) or min(vals) < 2:
        raise argparse.ArgumentTypeError(f"grid must be M or M,N with values >= 2, got {text!r}")
    return vals[0], vals[-1] if len(vals) == 2 else vals[0]


def _floats(text):
    try:
        return [float(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _example(text):
    if text not in ("1", "2"):
        raise argparse.ArgumentTypeError("example must be 1 or 2")
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stefan-inverse", description="Recover the initial temperature of a one-phase Stefan problem from its melting front.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--config", type=Path, help="key=value file; explicit flags win")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    inv = sub.add_parser("invert", parents=[common], help="run one reconstruction")
    inv.add_argument("--example", type=_example, required=True)
    inv.add_argument("--method", choices=("tikhonov", "landweber"), required=True)
    inv.add_argument("--lambda", dest="lam", type=float, help="Tikhonov penalty or Landweber step")
    inv.add_argument("--grid", type=_grid, default=(250, 250), help="M or M,N")
    inv.add_argument("--noise", type=float, default=0.0, help="noise level in percent")
    inv.add_argument("--smooth", type=int, default=DEFAULT_SMOOTHING_WINDOW, help="smoothing window for the noisy front speed")
    inv.add_argument("--analytic-sdot", action="store_true", help="keep the exact front speed under noise")
    inv.add_argument("--points", type=int, default=3, help="Gauss points per cell")
    inv.add_argument("--max-iters", type=int)
    inv.add_argument("--tau", type=float, help="discrepancy multiplier (default 1.1 when noisy)")
    inv.add_argument("--nonneg", action="store_true", help="project iterates onto u0 >= 0")
    inv.add_argument("--dump-system", action="store_true", help="also write A.csv and g.csv")

    dire = sub.add_parser("direct", parents=[common], help="run the forward solver")
    dire.add_argument("--example", type=_example, required=True)
    dire.add_argument("--jgrid", type=int, default=200)
    dire.add_argument("--dt", type=float, default=DEFAULT_DT)
    dire.add_argument("--grid", type=_grid, default=(250, 250), help="M or M,N for the output time grid")

    tab = sub.add_parser("table", parents=[common], help="noise table over several seeds")
    tab.add_argument("--example", type=_example, required=True)
    tab.add_argument("--method", choices=("tikhonov", "landweber"), required=True)
    tab.add_argument("--lambda", dest="lam", type=float)
    tab.add_argument("--grid", type=_grid, default=(250, 250))
    tab.add_argument("--seeds", type=int, default=10)
    tab.add_argument("--noise-levels", type=_floats, default=[100 * n for n in NOISE_LEVELS], help="percent, comma separated")
    tab.add_argument("--smooth", type=int, default=DEFAULT_SMOOTHING_WINDOW)
    tab.add_argument("--analytic-sdot", action="store_true")

    swp = sub.add_parser("sweep", parents=[common], help="empirical stability sweep")
    swp.add_argument("--example", type=_example, default=2)
    swp.add_argument("--scales", type=_floats, default=[0.2, 0.1, 0.05])
    swp.add_argument("--H", dest="H", type=float, default=SWEEP_H, help="slope bound of the admissible envelope")
    swp.add_argument("--jgrid", type=int, default=200)
    swp.add_argument("--dt", type=float, default=DEFAULT_DT)

    sub.add_parser("selftest", parents=[common], help="run the built-in invariant checks")
    return parser


def _read_config(path: Path) -> dict:
    out = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (p.strip() for p in line.split("=", 1))
        out[key.replace("_", "-")] = val
    return out


def _config_path(argv):
    for k, arg in enumerate(argv):
        if arg == "--config" and k + 1 < len(argv):
            return Path(argv[k + 1])
        if arg.startswith("--config="):
            return Path(arg.split("=", 1)[1])
    return None


def parse_args(argv):
    parser = build_parser()
    path = _config_path(argv)
    if path is not None and argv and argv[0] in COMMANDS:
        # config values go right after the subcommand so explicit flags win
        extra = []
        for key, val in _read_config(path).items():
            if val.lower() == "true":
                extra.append(f"--{key}")
            elif val.lower() != "false":
                extra += [f"--{key}", val]
        argv = [argv[0], *extra, *argv[1:]]
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_help())
    return args


def _write_meta(out: Path, args, **effective) -> None:
    out.mkdir(parents=True, exist_ok=True)
    params = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    params.update(effective)
    with open(out / "run_meta.txt", "w") as fh:
        for key in sorted(params):
            val = params[key]
            if isinstance(val, (list, tuple)):
                val = ",".join(str(v) for v in val)
            fh.write(f"{key}={val}\n")


def cmd_invert(args) -> int:
    if args.noise < 0:
        raise ValidationError("--noise must be nonnegative")
    M, N = args.grid
    res = run_inversion(
        args.example, args.method, args.lam, M=M, N=N, noise_level=args.noise / 100.0,
        seed=args.seed + NOISE_STREAM, smoothing_window=args.smooth,
        rederive_sdot=not args.analytic_sdot, points_per_cell=args.points,
        max_iters=args.max_iters, discrepancy_tau=args.tau, project_nonnegative=args.nonneg,
    )
    rec = res.reconstruction
    args.out.mkdir(parents=True, exist_ok=True)
    res.reconstruction_to_csv(args.out / "reconstruction.csv")
    rec.trace_to_csv(args.out / "trace.csv")
    if args.dump_system:
        from .assembly import QuadratureRule, assemble
        from .problems import add_noise

        cfg, traj, _ = load_example(args.example, N=N, M=M)
        if args.noise > 0:
            traj = add_noise(traj, args.noise / 100.0, args.seed + NOISE_STREAM, args.smooth, not args.analytic_sdot)
        assemble(traj, cfg, QuadratureRule.gauss_legendre(args.points)).dump_csv(args.out)
    _write_meta(
        args.out, args, lam=rec.lam, max_iters=args.max_iters or DEFAULT_MAX_ITERS[args.method],
        stop_tol=DEFAULT_STOP_TOL, iterations_run=rec.iterations_run, stop_reason=rec.stop_reason,
        tau=args.tau if args.tau is not None else (1.1 if args.noise > 0 else None),
    )
    print(f"rel_error={res.rel_error:.6g}")
    print(f"iterations={rec.iterations_run} stop={rec.stop_reason} lambda={rec.lam:.6g}")
    return EXIT_OK


def cmd_direct(args) -> int:
    M, N = args.grid
    cfg, traj, ic = load_example(args.example, N=N, M=M)
    sol = solve_direct(ic, example_flux(args.example), cfg, J=args.jgrid, dt=args.dt)
    args.out.mkdir(parents=True, exist_ok=True)
    sol.front.to_csv(args.out / "trajectory.csv")
    sol.field_to_csv(args.out / "field.csv")
    err = float(np.max(np.abs(sol.front.s - traj.s)))
    _write_meta(args.out, args)
    print(f"s(T)={sol.front.s[-1]:.6g}")
    print(f"max_front_error={err:.6g}")
    return EXIT_OK


def cmd_table(args) -> int:
    M, N = args.grid
    seeds = [args.seed + NOISE_STREAM + k for k in range(args.seeds)]
    levels = [p / 100.0 for p in args.noise_levels]
    reports = run_table(
        args.example, args.method, args.lam, M=M, N=N, noise_levels=levels, seeds=seeds,
        smoothing_window=args.smooth, rederive_sdot=not args.analytic_sdot,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    write_report_csv(reports, args.out / "report.csv")
    _write_meta(args.out, args, lam=reports[0].lam, seed_list=seeds)
    for rep in reports:
        line = f"noise={100 * rep.noise_level:g}% mean_rel_error={rep.mean_rel_error:.4f} std={rep.std_rel_error:.4f}"
        if rep.failures:
            line += f" failed={len(rep.failures)}"
        print(line)
    return EXIT_NUMERICAL if all(not r.rel_errors for r in reports) else EXIT_OK


def cmd_sweep(args) -> int:
    cfg, h, ic = sweep_config(args.example, H=args.H)
    res = stability_sweep(ic, h, args.scales, cfg, J=args.jgrid, dt=args.dt)
    args.out.mkdir(parents=True, exist_ok=True)
    res.write_csv(args.out / "stability.csv")
    _write_meta(args.out, args)
    for p in res.points:
        print(f"scale={p.scale:g} s_gap={p.s_gap:.6g} u0_gap={p.u0_gap:.6g} log_bound={p.log_bound:.6g}")
    if res.points:
        print(f"fitted_C={fit_log_constant(res.points):.6g}")
    if res.skipped_envelope:
        print(f"skipped (envelope): {res.skipped_envelope}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(print)
    _write_meta(args.out, args)
    return EXIT_OK if ok else EXIT_NUMERICAL


COMMANDS = {
    "invert": cmd_invert,
    "direct": cmd_direct,
    "table": cmd_table,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (ValidationError, StefanError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
