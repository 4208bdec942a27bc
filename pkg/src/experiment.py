"""Experiment orchestration: solve, scan, sweep, spectral and decay stages, then report.

Stages run sequentially and write into one run folder through :class:`RunWriter`.
Each stage records its timing in the manifest; tables never contain wall-clock data.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import __version__
from .blowup import (
    HolderRegion,
    decay_check,
    eta_cutoff,
    fit_growth_exponent,
    holder_seminorm,
    segregation_mass,
    solve_decay_problem,
    zero_set,
)
from .config_models import DirichletConfig, ExperimentConfig, load_config
from .extension_solver import ConvergenceReport, DirichletData, SolverError, solve_system
from .grid import Field
from .monotonicity import Kernel, RadialScan, find_dips, radial_scan
from .profiles import ProfileFactory
from .run_store import (
    RunManifest,
    RunWriter,
    clear_run,
    load_manifest,
    run_directory,
    verify_run,
)
from .spectral import default_theta_grid, nu_acf_estimate, phi_caps

logger = logging.getLogger(__name__)

STAGES = ("solve", "scan", "sweep", "spectral", "decay")
OVERLAP_DROP = 1e-2
WEIGHTED_MASS_GROWTH = 3.0
HOLDER_DRIFT = 0.1
HOLDER_FLOOR = 1e-12
SPECTRAL_COLUMNS = ("theta", "lambda1", "gamma", "phi")
SWEEP_COLUMNS = ("beta", "overlap", "weighted_mass", "holder_seminorm_at_alpha")


class StageError(Exception):
    """A downstream failure tagged with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message


@dataclass(frozen=True, eq=False)
class Solved:
    index: int
    beta: float
    field: Field
    report: ConvergenceReport


def build_dirichlet(config: DirichletConfig, base_dir: Path | None = None) -> DirichletData:
    """Edge data from a ``[dirichlet]`` section; file paths are relative to ``base_dir``."""
    if config.kind == "classified-pair":
        return ProfileFactory.create("classified-pair", dict(config.params)).dirichlet()
    if config.kind == "constant":
        return DirichletData.constant(list(config.values or []))
    if config.kind == "bump":
        centers = np.asarray(config.centers, dtype=float)
        amplitudes = np.asarray(config.amplitudes, dtype=float)
        width = config.width

        def evaluate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return np.stack(
                [a * eta_cutoff(np.hypot(x - c, y) / width) for c, a in zip(centers, amplitudes)]
            )

        return DirichletData(evaluator=evaluate)
    path = Path(config.path or "")
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    with np.load(path) as arrays:
        try:
            return DirichletData(left=arrays["left"], right=arrays["right"], top=arrays["top"])
        except KeyError as exc:
            raise ValueError(f"Missing required key: {exc.args[0]}") from exc


def _resolve_stages(stages: Iterable[str] | None) -> list[str]:
    requested = set(STAGES if stages is None else stages)
    unknown = requested - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages: {sorted(unknown)}")
    if requested & {"scan", "sweep"}:
        requested.add("solve")
    return [stage for stage in STAGES if stage in requested]


class _Run:
    """State shared by the stages of one run."""

    def __init__(
        self,
        config: ExperimentConfig,
        writer: RunWriter,
        manifest: RunManifest,
        base_dir: Path,
        threads: int,
    ):
        self.config = config
        self.writer = writer
        self.manifest = manifest
        self.base_dir = base_dir
        self.threads = threads
        self.solved: list[Solved] = []

    def solve(self) -> None:
        config = self.config
        grid = config.grid.build()
        dirichlet = build_dirichlet(config.dirichlet, self.base_dir)
        options = config.solver.build(self.threads)
        continuation = config.sweep.continuation if config.sweep is not None else False
        previous: Field | None = None
        for index, beta in enumerate(config.betas()):
            params = config.system.build(beta)
            initial = previous if continuation else None
            field_, report = solve_system(grid, params, dirichlet, options, initial=initial)
            previous = field_
            self.solved.append(Solved(index, beta, field_, report))
            key = f"beta={beta:g}"
            self.manifest.convergence[key] = report.to_dict()
            self.manifest.suites[f"solve[{key}]"] = {
                "passed": report.converged,
                "residual": report.residual,
            }
            self.writer.write_field(
                f"field_b{index}.f64", field_, {"beta": beta, "params": params.to_dict()}
            )

    def scan(self) -> None:
        scan_config = self.config.scan
        if scan_config is None:
            logger.info("experiment: no [scan] section, skipping scans")
            return
        half = len(scan_config.radii) // 2
        for solved in self.solved:
            params = self.config.system.build(solved.beta)
            kernel = Kernel.for_grid(solved.field.grid, factor=scan_config.kernel_eps_factor)
            zeros = zero_set(solved.field)
            for j, center in enumerate(scan_config.centers):
                result = radial_scan(
                    solved.field,
                    params,
                    center,
                    scan_config.radii,
                    kernel=kernel,
                    nu=scan_config.nu,
                    nu_prime=scan_config.nu_prime,
                    eps=scan_config.eps_assumption,
                    threads=self.threads,
                )
                name = f"scan_b{solved.index}_c{j}.csv"
                metadata = {**result.metadata, "beta": solved.beta}
                if not zeros.empty:
                    metadata["zero_set_distance"] = zeros.distance(center)
                self.writer.write_csv(name, result.columns, result.rows(), metadata)
                self._scan_suites(name, solved.beta, result, half)

    def _scan_suites(self, name: str, beta: float, result: RadialScan, half: int) -> None:
        label = f"beta={beta:g},x0={result.x0:g}"
        if result.pairs:
            pert = result.phi_pert[result.pairs[0]]
            dips = find_dips(result.radii[half:], pert[half:])
            self.manifest.suites[f"acf_perturbed[{label}]"] = _dip_suite(name, dips)
        dips = find_dips(result.radii, result.N)
        self.manifest.suites[f"almgren[{label}]"] = _dip_suite(name, dips)
        try:
            fit = fit_growth_exponent(result.radii, result.H)
        except ValueError as exc:
            self.manifest.fits[name] = {"error": str(exc)}
        else:
            self.manifest.fits[name] = fit.to_dict()

    def sweep(self) -> None:
        sweep_config = self.config.sweep
        if sweep_config is None:
            logger.info("experiment: no [sweep] section, skipping the beta sweep")
            return
        region = HolderRegion(radius=sweep_config.holder_radius)
        rows = []
        for solved in self.solved:
            params = self.config.system.build(solved.beta)
            mass = segregation_mass(solved.field, params)
            holder = holder_seminorm(
                solved.field, sweep_config.holder_alpha, region, threads=self.threads
            )
            rows.append([solved.beta, mass.overlap, mass.weighted, holder.value])
        self.writer.write_csv(
            "sweep.csv",
            SWEEP_COLUMNS,
            rows,
            {"holder_alpha": sweep_config.holder_alpha, "holder_radius": region.radius},
        )
        table = np.array(rows, dtype=float)
        if table.shape[0] >= 2:
            overlap, weighted = table[:, 1], table[:, 2]
            decreasing = bool(np.all(np.diff(overlap) < 0))
            collapsed = bool(overlap[-1] < OVERLAP_DROP * overlap[0])
            bounded = bool(np.all(weighted <= WEIGHTED_MASS_GROWTH * weighted[0]))
            self.manifest.suites["sweep_segregation"] = {
                "passed": decreasing and collapsed and bounded,
                "overlap_decreasing": decreasing,
                "overlap_ratio": float(overlap[-1] / overlap[0]) if overlap[0] > 0 else None,
                "weighted_mass_bounded": bounded,
            }
        if table.shape[0] >= 3:
            seminorms = table[:, 3]
            positive = bool(np.all(seminorms > HOLDER_FLOOR))
            previous, last = seminorms[-2], seminorms[-1]
            drift = float(abs(last - previous) / previous) if positive else None
            if not positive:
                logger.warning("experiment: Holder seminorm vanished on a sweep trace")
            self.manifest.suites["holder_uniform"] = {
                "passed": positive and drift <= HOLDER_DRIFT,
                "drift": drift,
                "seminorms": [float(s) for s in seminorms],
            }

    def spectral(self) -> None:
        spectral_config = self.config.spectral
        if spectral_config is None:
            logger.info("experiment: no [spectral] section, skipping the cap scan")
            return
        mesh = {"n_azimuth": spectral_config.n_azimuth, "n_polar": spectral_config.n_polar}
        thetas = default_theta_grid(spectral_config.theta_points)
        scan = phi_caps(spectral_config.dimension, thetas, threads=self.threads, **mesh)
        estimate = nu_acf_estimate(spectral_config.dimension, thetas, scan=scan, **mesh)
        rows = scan.rows()
        self.writer.write_csv(
            "spectral.csv", SPECTRAL_COLUMNS, rows, {"dimension": scan.dimension, **mesh}
        )
        self.manifest.spectral = {**estimate.to_dict(), "argmin": scan.argmin, "table": rows}

    def decay(self) -> None:
        decay_config = self.config.decay
        if decay_config is None:
            logger.info("experiment: no [decay] section, skipping the decay check")
            return
        field_ = solve_decay_problem(decay_config.M, decay_config.delta, decay_config.h)
        result = decay_check(
            field_, decay_config.M, delta=decay_config.delta, slack=decay_config.slack
        )
        payload = {**result.to_dict(), "h": decay_config.h}
        self.writer.write_json("decay.json", payload)
        self.manifest.decay = payload
        self.manifest.suites["decay"] = {"passed": result.passed}


def _dip_suite(scan_file: str, dips: list) -> dict[str, Any]:
    return {
        "passed": not dips,
        "scan": scan_file,
        "dips": [{"r_prev": d.r_prev, "r": d.r, "drop": d.drop} for d in dips],
    }


def run(
    config_path: str | Path,
    out_dir: str | Path | None = None,
    *,
    force: bool = False,
    threads: int = 1,
    stages: Iterable[str] | None = None,
) -> RunManifest:
    """Execute the requested stages of an experiment and write its manifest.

    A run whose folder already holds a manifest with the same config hash and every
    requested stage is skipped unless ``force`` is set.

    Raises:
        ConfigError: If the file cannot be read.
        pydantic.ValidationError: If the config is invalid.
        StageError: If a stage fails; the original exception is chained.
    """
    config_path = Path(config_path)
    config = load_config(config_path)
    selected = _resolve_stages(stages)
    directory = run_directory(config.name, out_dir if out_dir is not None else config.output)
    digest = config.config_hash()

    existing = load_manifest(directory)
    if (
        existing is not None
        and not force
        and existing.config_hash == digest
        and set(selected) <= set(existing.stages)
    ):
        logger.info("experiment: %s is up to date (hash %s), skipping", directory, digest[:12])
        return existing
    if existing is not None:
        clear_run(directory, existing)

    writer = RunWriter(directory, digest)
    manifest = RunManifest(
        name=config.name, config_hash=digest, tool_version=__version__, stages=selected
    )
    writer.write_json("config.json", {"config": config.canonical()})
    state = _Run(config, writer, manifest, config_path.resolve().parent, threads)
    for stage in selected:
        logger.info("experiment: stage %s", stage)
        started = time.perf_counter()
        try:
            getattr(state, stage)()
        except (SolverError, ValueError, OSError) as exc:
            logger.error("experiment: stage %s failed: %s", stage, exc)
            raise StageError(stage, str(exc)) from exc
        manifest.timings[stage] = time.perf_counter() - started
    writer.finalize(manifest)
    logger.info("experiment: wrote %d files to %s", len(manifest.files), directory)
    return manifest


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _suite_detail(suite: dict[str, Any]) -> str:
    dips = suite.get("dips")
    if dips:
        return "; ".join(f"dip at r={d['r']:.6g} (drop {d['drop']:.2e})" for d in dips)
    skipped = ("passed", "scan", "dips")
    return ", ".join(f"{key}={_fmt(value)}" for key, value in suite.items() if key not in skipped)


def _load(target: RunManifest | str | Path) -> RunManifest:
    if isinstance(target, RunManifest):
        return target
    manifest = load_manifest(target)
    if manifest is None:
        raise StageError("report", f"no manifest in {target}")
    problems = verify_run(target)
    if problems:
        raise StageError("report", "; ".join(problems))
    return manifest


def report(target: RunManifest | str | Path) -> tuple[str, int]:
    """Markdown summary of a run and its exit code (1 iff some suite failed).

    Raises:
        StageError: If the manifest or a listed artifact is missing or altered.
    """
    manifest = _load(target)
    lines = [
        f"# Run report: {manifest.name}",
        "",
        f"- config hash: `{manifest.config_hash}`",
        f"- tool version: {manifest.tool_version}",
        f"- stages: {', '.join(manifest.stages)}",
        "",
    ]
    if manifest.convergence:
        lines += ["## Solves", "", "| run | method | converged | iterations | residual |"]
        lines.append("|---|---|---|---|---|")
        for key, conv in manifest.convergence.items():
            lines.append(
                f"| {key} | {conv['method']} | {conv['converged']} | "
                f"{conv['iterations']} | {_fmt(conv['residual'])} |"
            )
        lines.append("")
    failed = [name for name, suite in manifest.suites.items() if not suite.get("passed", False)]
    lines += ["## Suites", "", "| suite | result | detail |", "|---|---|---|"]
    for name, suite in manifest.suites.items():
        verdict = "pass" if suite.get("passed", False) else "FAIL"
        lines.append(f"| {name} | {verdict} | {_suite_detail(suite)} |")
    lines.append("")
    if manifest.fits:
        lines += ["## Fitted growth exponents", "", "| scan | nu_hat | log residual |"]
        lines.append("|---|---|---|")
        for name, fit in manifest.fits.items():
            if "error" in fit:
                lines.append(f"| {name} | - | {fit['error']} |")
            else:
                lines.append(f"| {name} | {_fmt(fit['nu_hat'])} | {_fmt(fit['residual'])} |")
        lines.append("")
    if manifest.spectral:
        spectral = manifest.spectral
        lines += [
            f"## Spectral constants (N={spectral['dimension']})",
            "",
            "| theta | lambda1 | gamma | phi |",
            "|---|---|---|---|",
        ]
        for index, row in enumerate(spectral["table"]):
            cells = [_fmt(value) for value in row]
            if index == spectral["argmin"]:
                cells = [f"**{cell}**" for cell in cells]
            lines.append("| " + " | ".join(cells) + " |")
        lines += [
            "",
            f"- nu_acf estimate: {_fmt(spectral['nu_acf'])} ({spectral['caveat']})",
            "",
        ]
    if manifest.decay:
        decay = manifest.decay
        lines += [
            "## Decay comparison",
            "",
            f"- M={_fmt(decay['M'])}, delta={_fmt(decay['delta'])}",
            f"- flat sup {_fmt(decay['sup_flat'])} against {_fmt(decay['upper_bound'])}"
            f" (literal bound {_fmt(decay['literal_upper_bound'])},"
            f" {'met' if decay['literal_passed'] else 'not met'})",
            f"- flat inf {_fmt(decay['inf_flat'])} against {_fmt(decay['lower_bound'])}",
            "",
        ]
    lines.append(f"**{len(failed)} of {len(manifest.suites)} suites failed**")
    return "\n".join(lines) + "\n", 1 if failed else 0


__all__ = [
    "HOLDER_DRIFT",
    "STAGES",
    "StageError",
    "build_dirichlet",
    "report",
    "run",
]
