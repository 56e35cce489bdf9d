"""Command-line front end: exact queries, simulation, figure data, validation.

Exit codes: 0 success, 1 validation or statistical failure, 2 usage error.
Defaults for --seed and --workers can come from the ADHOC1D_SEED and
ADHOC1D_WORKERS environment variables; an optional flat key = value
config file supplies further defaults, with command-line flags taking
precedence over both.
"""

from __future__ import annotations

import argparse
import os
import sys

from .exact import ModelKind, Ratio, q_m
from .model import InvalidConfigError, NetworkConfig, validate_config
from .montecarlo import compare, estimate_distribution
from .sweep import figure_files, run_validation


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        return fallback


def _add_common(p: argparse.ArgumentParser, *, seed=True, workers=True) -> None:
    p.add_argument("--config", metavar="FILE", help="flat key = value defaults file")
    if seed:
        p.add_argument("--seed", type=int, default=_env_int("ADHOC1D_SEED", 42))
    if workers:
        p.add_argument("--workers", type=int, default=_env_int("ADHOC1D_WORKERS", 1))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adhoc1d",
        description="Component-count probabilities for one-dimensional ad hoc networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="evaluate one closed-form probability")
    p.add_argument("--model", choices=["free", "anchored"], required=True)
    p.add_argument("--n", type=int, required=True, help="number of random nodes")
    p.add_argument("--m", type=int, required=True, help="component count")
    p.add_argument("--rho", type=float, help="ratio L/r")
    p.add_argument("--L", type=float, help="segment length (with --r)")
    p.add_argument("--r", type=float, help="transmission radius (with --L)")
    p.add_argument("--mode", choices=["float", "rational", "auto"], default="auto")
    _add_common(p, seed=False, workers=False)

    p = sub.add_parser("simulate", help="Monte Carlo estimate, with exact comparison when available")
    p.add_argument("--model", choices=["free", "anchored"], default="free")
    p.add_argument("--x", type=float, help="access point position (in [0, L])")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=float, help="ratio L/r")
    p.add_argument("--L", type=float, help="segment length")
    p.add_argument("--r", type=float, help="transmission radius")
    p.add_argument("--trials", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("figures", help="write fig1.csv .. fig6.csv (anchored model sweep)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trials", type=int, default=0, help="simulation budget per grid point")
    p.add_argument("--svg", action="store_true", help="also render an SVG chart per file")
    p.add_argument("--rho-start", type=float, default=0.25)
    p.add_argument("--rho-stop", type=float, default=30.0)
    p.add_argument("--rho-step", type=float, default=0.25)
    _add_common(p)

    p = sub.add_parser("validate", help="run the invariant and oracle suite")
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    p.add_argument("--trials", type=int, default=100_000)
    _add_common(p)

    return parser


def _apply_config_file(parser, args, argv) -> None:
    if not getattr(args, "config", None):
        return
    passed = set()
    for tok in argv:
        if tok.startswith("--"):
            passed.add(tok.split("=", 1)[0].lstrip("-").replace("-", "_"))
    try:
        with open(args.config) as fh:
            lines = fh.readlines()
    except OSError as e:
        parser.error(f"--config: cannot read {args.config}: {e}")
    converters = {
        "n": int, "m": int, "trials": int, "seed": int, "workers": int,
        "rho": float, "L": float, "r": float, "x": float,
        "rho_start": float, "rho_stop": float, "rho_step": float,
        "svg": lambda s: s.lower() in ("1", "true", "yes"),
    }
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"--config: line {lineno} is not key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in passed or not hasattr(args, key):
            continue
        setattr(args, key, converters.get(key, str)(value))


def _resolve_ratio(parser, args) -> Ratio:
    if args.rho is not None:
        if args.rho <= 0:
            parser.error("--rho must be positive")
        return Ratio.from_float(args.rho)
    if args.L is not None and args.r is not None:
        if args.L <= 0:
            parser.error("--L must be positive")
        if args.r <= 0:
            parser.error("--r must be positive")
        return Ratio.from_lengths(args.L, args.r)
    parser.error("either --rho or both --L and --r are required")


def _cmd_exact(parser, args) -> int:
    if args.n < 1:
        parser.error("--n must be at least 1")
    if args.m < 1:
        parser.error("--m must be at least 1")
    ratio = _resolve_ratio(parser, args)
    model = ModelKind(args.model)
    ev = q_m(model, args.n, args.m, ratio, args.mode)
    print(f"Q_{args.m}({args.model}, n={args.n}, rho={ratio.value!r}) = {ev.float_value!r}")
    print(f"mode: {ev.mode}   cancellation_ratio: {ev.cancellation_ratio:.3g}")
    if ev.rational_value is not None:
        print(f"exact: {ev.rational_value}")
    return 0


def _cmd_simulate(parser, args) -> int:
    if args.trials < 1:
        parser.error("--trials must be at least 1")
    if args.n < 0:
        parser.error("--n must be non-negative")
    if args.rho is not None and args.L is not None and args.r is None:
        # rho together with L pins the radius
        if args.rho <= 0:
            parser.error("--rho must be positive")
        length, radius = args.L, args.L / args.rho
    elif args.L is not None and args.r is not None:
        length, radius = args.L, args.r
    elif args.rho is not None:
        if args.rho <= 0:
            parser.error("--rho must be positive")
        length, radius = args.rho, 1.0
    else:
        parser.error("either --rho or both --L and --r are required")

    if args.x is not None:
        x = args.x
    elif args.model == "anchored":
        x = 0.0
    else:
        x = None
    config = NetworkConfig(n=args.n, length=length, radius=radius, access_point=x)
    try:
        validate_config(config)
    except InvalidConfigError as e:
        parser.error(str(e))

    estimates = estimate_distribution(config, args.trials, args.seed, args.workers)
    print(f"trials: {args.trials}   seed: {args.seed}")
    print("m     p_hat        stderr       wilson 95% CI")
    for e in estimates:
        print(
            f"{e.m:<5d} {e.p_hat:<12.6g} {e.stderr:<12.3g} "
            f"[{e.ci_low:.6g}, {e.ci_high:.6g}]"
        )

    if x is not None and x != 0.0 and config.n > 0:
        print("note: no closed form is available for an interior access point; "
              "showing estimates only")
        return 0
    if config.n == 0:
        return 0

    from .exact import distribution

    model = ModelKind.ANCHORED if x == 0.0 else ModelKind.FREE
    exact = distribution(model, config.n, Ratio.from_float(config.rho), "auto")
    report = compare(config, estimates, exact)
    print("\ncomparison with exact values:")
    print("m     q_exact      p_hat        z")
    for row in report.rows:
        print(f"{row.m:<5d} {row.q_exact:<12.6g} {row.p_hat:<12.6g} {row.z:+.2f}")
    print(
        f"chi_square: {report.chi_square:.3f}   dof: {report.dof}   "
        f"p_value: {report.p_value:.4g}"
    )
    return 0


def _cmd_figures(parser, args) -> int:
    if args.trials < 0:
        parser.error("--trials must be non-negative")
    out = args.out
    try:
        os.makedirs(out, exist_ok=True)
        probe = os.path.join(out, ".write-test")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as e:
        print(f"error: output directory {out!r} is not writable: {e}", file=sys.stderr)
        return 1
    paths = figure_files(
        out,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
        svg=args.svg,
        rho_start=args.rho_start,
        rho_stop=args.rho_stop,
        rho_step=args.rho_step,
    )
    for p in paths:
        print(p)
    return 0


def _cmd_validate(parser, args) -> int:
    if args.trials < 1:
        parser.error("--trials must be at least 1")
    result = run_validation(
        level=args.level, trials=args.trials, seed=args.seed, workers=args.workers
    )
    for failure in result.failures:
        print(f"FAIL: {failure}")
    status = "pass" if result.passed else "FAIL"
    print(f"{status}: {result.checks - len(result.failures)}/{result.checks} checks passed "
          f"(level={args.level})")
    return 0 if result.passed else 1


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(parser, args, argv)
    handlers = {
        "exact": _cmd_exact,
        "simulate": _cmd_simulate,
        "figures": _cmd_figures,
        "validate": _cmd_validate,
    }
    return handlers[args.command](parser, args)


if __name__ == "__main__":
    sys.exit(main())
