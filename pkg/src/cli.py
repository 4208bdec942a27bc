"""Command-line entry point: ``python -m src.cli <subcommand> [options]``.

Exit codes: 0 success, 1 a suite or check failed, 2 usage/config/artifact error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from pydantic import ValidationError

from .blowup import decay_check, fit_growth_exponent, solve_decay_problem
from .config_models import ConfigError, describe_validation_error, load_config
from .constants import (
    DECAY_BOUND_CONSTANT,
    DECAY_SLACK,
    SPECTRAL_N_AZIMUTH,
    SPECTRAL_N_POLAR,
    THETA_GRID_POINTS,
)
from .experiment import SPECTRAL_COLUMNS, StageError, report, run
from .extension_solver import SolverError
from .profiles import ProfileFactory, run_profile_check
from .run_store import RunWriter, payload_hash, read_csv, run_directory
from .spectral import default_theta_grid, nu_acf_estimate, phi_caps

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

STAGE_COMMANDS = {
    "solve": ("solve",),
    "scan": ("solve", "scan"),
    "sweep-beta": ("solve", "sweep"),
    "run": None,
}


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _require_config(args: argparse.Namespace) -> Path:
    if args.config is None:
        raise ValueError(f"{args.command} needs --config")
    return Path(args.config)


def _run_stages(args: argparse.Namespace) -> int:
    manifest = run(
        _require_config(args),
        args.out,
        force=args.force,
        threads=args.threads,
        stages=STAGE_COMMANDS[args.command],
    )
    text, code = report(manifest)
    print(text)
    return code


def _spectral(args: argparse.Namespace) -> int:
    mesh = {"n_azimuth": args.n_azimuth, "n_polar": args.n_polar}
    thetas = default_theta_grid(args.theta_grid)
    scan = phi_caps(args.dim, thetas, threads=args.threads, **mesh)
    estimate = nu_acf_estimate(args.dim, thetas, scan=scan, **mesh)
    if args.out is not None:
        settings = {"dimension": args.dim, "theta_points": args.theta_grid, **mesh}
        writer = RunWriter(args.out, payload_hash(settings))
        writer.write_csv("spectral.csv", SPECTRAL_COLUMNS, scan.rows(), settings)
        writer.write_json("nu_acf.json", estimate.to_dict())
    print("| theta | lambda1 | gamma | phi |")
    print("|---|---|---|---|")
    for index, row in enumerate(scan.rows()):
        cells = [f"{value:.6g}" for value in row]
        if index == scan.argmin:
            cells = [f"**{cell}**" for cell in cells]
        print("| " + " | ".join(cells) + " |")
    _emit(estimate.to_dict())
    return EXIT_OK


def _profile_check(args: argparse.Namespace) -> int:
    params = json.loads(args.params) if args.params else {}
    if not isinstance(params, dict):
        raise ValueError("--params must be a JSON object")
    result = run_profile_check(args.kind, params, h=args.h)
    _emit(result.to_dict())
    return EXIT_OK if result.passed else EXIT_FAILED


def _fit_exponent(args: argparse.Namespace) -> int:
    columns, data = read_csv(args.scan)
    try:
        radii, H = data[:, columns.index("r")], data[:, columns.index("H")]
    except ValueError as exc:
        raise ValueError(f"{args.scan}: scan table needs r and H columns") from exc
    window = None
    if args.r_min is not None or args.r_max is not None:
        window = (
            args.r_min if args.r_min is not None else float(radii.min()),
            args.r_max if args.r_max is not None else float(radii.max()),
        )
    _emit(fit_growth_exponent(radii, H, window).to_dict())
    return EXIT_OK


def _decay_check(args: argparse.Namespace) -> int:
    field_ = solve_decay_problem(args.M, args.delta, args.h)
    result = decay_check(
        field_, args.M, delta=args.delta, slack=args.slack, bound_constant=args.bound_constant
    )
    _emit(result.to_dict())
    return EXIT_OK if result.passed else EXIT_FAILED


def _report(args: argparse.Namespace) -> int:
    if args.out is not None:
        directory = Path(args.out)
    else:
        config = load_config(_require_config(args))
        directory = run_directory(config.name, config.output)
    text, code = report(directory)
    print(text)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="Experiment TOML file")
    common.add_argument("--out", type=str, default=None, help="Output directory")
    common.add_argument("--force", action="store_true", help="Rerun even if the hash matches")
    common.add_argument("--threads", type=int, default=1, help="Worker threads per stage")

    parser = argparse.ArgumentParser(
        prog="seglab",
        description="Numerical laboratory for strongly competing half-Laplacian systems.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("solve", parents=[common], help="Solve the configured system")
    commands.add_parser("scan", parents=[common], help="Solve, then run the radial scans")
    commands.add_parser("sweep-beta", parents=[common], help="Solve along the beta list")
    commands.add_parser("run", parents=[common], help="Run every configured stage")
    commands.add_parser("report", parents=[common], help="Summarise a finished run")

    spectral = commands.add_parser("spectral", parents=[common], help="Cap eigenvalue table")
    spectral.add_argument("--dim", type=int, choices=(1, 2), default=2)
    spectral.add_argument("--theta-grid", type=int, default=THETA_GRID_POINTS)
    spectral.add_argument("--n-azimuth", type=int, default=SPECTRAL_N_AZIMUTH)
    spectral.add_argument("--n-polar", type=int, default=SPECTRAL_N_POLAR)

    profile = commands.add_parser("profile-check", parents=[common], help="Check an oracle")
    profile.add_argument("--kind", required=True, choices=ProfileFactory.get_supported_types())
    profile.add_argument("--params", type=str, default=None, help="JSON object")
    profile.add_argument("--h", type=float, default=1.0 / 100.0)

    fit = commands.add_parser("fit-exponent", parents=[common], help="Fit H(r) ~ r^(2 nu)")
    fit.add_argument("--scan", required=True, type=str, help="Scan CSV with r and H columns")
    fit.add_argument("--r-min", type=float, default=None)
    fit.add_argument("--r-max", type=float, default=None)

    decay = commands.add_parser("decay-check", parents=[common], help="Robin decay bracket")
    decay.add_argument("--M", type=float, required=True)
    decay.add_argument("--delta", type=float, default=0.0)
    decay.add_argument("--h", type=float, default=1.0 / 200.0)
    decay.add_argument("--slack", type=float, default=DECAY_SLACK)
    decay.add_argument("--bound-constant", type=float, default=DECAY_BOUND_CONSTANT)
    return parser


HANDLERS = {
    "solve": _run_stages,
    "scan": _run_stages,
    "sweep-beta": _run_stages,
    "run": _run_stages,
    "spectral": _spectral,
    "profile-check": _profile_check,
    "fit-exponent": _fit_exponent,
    "decay-check": _decay_check,
    "report": _report,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return HANDLERS[args.command](args)
    except ValidationError as exc:
        for line in describe_validation_error(exc):
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"stage error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(exc.__cause__, SolverError) else EXIT_USAGE
    except SolverError as exc:
        print(f"numerical failure [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


__all__ = ["EXIT_FAILED", "EXIT_NUMERICAL", "EXIT_OK", "EXIT_USAGE", "build_parser", "main"]


if __name__ == "__main__":
    sys.exit(main())
