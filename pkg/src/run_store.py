"""Persistence helpers for run folders: CSV tables, raw field dumps and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .constants import CSV_DIGITS
from .grid import Field, HalfGrid

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_OUTPUT_ROOT = PROJECT_ROOT / "runs"
OUTPUT_ROOT_ENV = "SEGLAB_OUTPUT_ROOT"
MANIFEST_NAME = "manifest.json"
SIDECAR_SUFFIX = ".meta.json"
FIELD_DTYPE = "<f8"


def output_root() -> Path:
    """Base folder for run directories; ``SEGLAB_OUTPUT_ROOT`` overrides the default."""
    override = os.environ.get(OUTPUT_ROOT_ENV)
    return Path(override) if override else DEFAULT_OUTPUT_ROOT


def run_directory(name: str, out_dir: str | Path | None = None) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    return output_root() / name


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def payload_hash(payload: Mapping[str, Any]) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def format_value(value: Any) -> str:
    """Shortest text that round-trips a float64 (17 significant digits)."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), f".{CSV_DIGITS}g")


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + SIDECAR_SUFFIX)


@dataclass
class RunManifest:
    """Everything a run produced, with checksums, timings and suite verdicts."""

    name: str
    config_hash: str
    tool_version: str
    stages: list[str] = field(default_factory=list)
    files: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    convergence: dict[str, dict[str, Any]] = field(default_factory=dict)
    suites: dict[str, dict[str, Any]] = field(default_factory=dict)
    fits: dict[str, dict[str, Any]] = field(default_factory=dict)
    spectral: dict[str, Any] | None = None
    decay: dict[str, Any] | None = None

    @property
    def passed(self) -> bool:
        return all(suite.get("passed", False) for suite in self.suites.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "stages": list(self.stages),
            "files": dict(sorted(self.files.items())),
            "timings": dict(self.timings),
            "convergence": dict(self.convergence),
            "suites": dict(self.suites),
            "fits": dict(self.fits),
            "spectral": self.spectral,
            "decay": self.decay,
        }

    @classmethod
    def from_mapping(cls, payload: Mapping[str, Any]) -> RunManifest:
        try:
            return cls(
                name=str(payload["name"]),
                config_hash=str(payload["config_hash"]),
                tool_version=str(payload["tool_version"]),
                stages=list(payload.get("stages", [])),
                files=dict(payload.get("files", {})),
                timings=dict(payload.get("timings", {})),
                convergence=dict(payload.get("convergence", {})),
                suites=dict(payload.get("suites", {})),
                fits=dict(payload.get("fits", {})),
                spectral=payload.get("spectral"),
                decay=payload.get("decay"),
            )
        except KeyError as exc:
            raise ValueError(f"Missing required key: {exc.args[0]}") from exc

    def save(self, directory: Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        body = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        path.write_text(body, encoding="utf-8")
        return path


def load_manifest(directory: str | Path) -> RunManifest | None:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        return None
    return RunManifest.from_mapping(json.loads(path.read_text(encoding="utf-8")))


class RunWriter:
    """Writes artifacts into one run folder and records their checksums."""

    def __init__(self, directory: str | Path, config_hash: str):
        self.directory = Path(directory)
        self.config_hash = config_hash
        self.files: dict[str, str] = {}
        self.directory.mkdir(parents=True, exist_ok=True)

    def _record(self, path: Path) -> None:
        self.files[path.relative_to(self.directory).as_posix()] = sha256_file(path)

    def _write_sidecar(self, path: Path, metadata: Mapping[str, Any]) -> None:
        payload = {"config_hash": self.config_hash, "file": path.name, **metadata}
        target = sidecar_path(path)
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self._record(target)

    def write_csv(
        self,
        name: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        metadata: Mapping[str, Any] | None = None,
    ) -> Path:
        path = self.directory / name
        count = 0
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                if len(row) != len(columns):
                    raise ValueError(
                        f"{name}: row has {len(row)} values for {len(columns)} columns"
                    )
                writer.writerow([format_value(value) for value in row])
                count += 1
        self._record(path)
        self._write_sidecar(path, {"columns": list(columns), "rows": count, **(metadata or {})})
        logger.info("run_store: wrote %s (%d rows)", path, count)
        return path

    def write_field(
        self, name: str, field_: Field, metadata: Mapping[str, Any] | None = None
    ) -> Path:
        path = self.directory / name
        np.ascontiguousarray(field_.values, dtype=FIELD_DTYPE).tofile(path)
        self._record(path)
        self._write_sidecar(
            path,
            {
                "dtype": "float64-le",
                "shape": list(field_.values.shape),
                "order": "C",
                "grid": field_.grid.to_dict(),
                **(metadata or {}),
            },
        )
        return path

    def write_json(self, name: str, payload: Mapping[str, Any]) -> Path:
        path = self.directory / name
        body = {"config_hash": self.config_hash, **payload}
        path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self._record(path)
        return path

    def finalize(self, manifest: RunManifest) -> Path:
        manifest.files = dict(self.files)
        return manifest.save(self.directory)


def clear_run(directory: str | Path, manifest: RunManifest) -> list[str]:
    """Delete the artifacts and the manifest of a previous run; other files are left alone."""
    directory = Path(directory)
    root = directory.resolve()
    removed = []
    for name in sorted(manifest.files):
        path = directory / name
        if path.resolve().is_relative_to(root) and path.is_file():
            path.unlink()
            removed.append(name)
    (directory / MANIFEST_NAME).unlink(missing_ok=True)
    if removed:
        logger.info("run_store: removed %d stale artifact(s) from %s", len(removed), directory)
    return removed


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and a float array (rows, columns)."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        columns = next(reader)
        rows = [[float(value) for value in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return columns, data


def read_field(path: str | Path) -> Field:
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    grid = HalfGrid.from_mapping(meta["grid"])
    values = np.fromfile(path, dtype=FIELD_DTYPE).reshape(meta["shape"])
    return Field(grid, values)


def verify_run(directory: str | Path) -> list[str]:
    """Problems with a finished run: missing files, checksum drift or foreign sidecars."""
    directory = Path(directory)
    manifest = load_manifest(directory)
    if manifest is None:
        return [f"{directory / MANIFEST_NAME}: missing"]
    problems = []
    for name, digest in sorted(manifest.files.items()):
        path = directory / name
        if not path.exists():
            problems.append(f"{name}: missing")
            continue
        if sha256_file(path) != digest:
            problems.append(f"{name}: checksum mismatch")
        if name.endswith(".json"):
            stamped = json.loads(path.read_text(encoding="utf-8")).get("config_hash")
            if stamped != manifest.config_hash:
                problems.append(f"{name}: config hash {stamped} differs from manifest")
        elif sidecar_path(path).relative_to(directory).as_posix() not in manifest.files:
            problems.append(f"{name}: no sidecar")
    return problems


__all__ = [
    "DEFAULT_OUTPUT_ROOT",
    "MANIFEST_NAME",
    "OUTPUT_ROOT_ENV",
    "PROJECT_ROOT",
    "RunManifest",
    "RunWriter",
    "canonical_json",
    "clear_run",
    "format_value",
    "load_manifest",
    "output_root",
    "payload_hash",
    "read_csv",
    "read_field",
    "run_directory",
    "sha256_file",
    "sidecar_path",
    "verify_run",
]
