from __future__ import annotations

from copy import deepcopy
from pathlib import Path
from typing import Any

from src.grid import Field, HalfGrid
from src.profiles import ProfileFactory
from src.reactions import ReactionFactory, SystemParams


def build_grid(
    *, h: float = 0.05, x_min: float = -1.0, x_max: float = 1.0, y_max: float = 1.0
) -> HalfGrid:
    """Return a deterministic half-box grid for testing."""

    return HalfGrid.from_spacing(h, x_min=x_min, x_max=x_max, y_max=y_max)


def build_params(
    *,
    k: int = 2,
    beta: float = 0.0,
    reaction: str = "zero",
    payload: dict[str, Any] | None = None,
    a: list[list[float]] | None = None,
) -> SystemParams:
    """Return system parameters built through the reaction registry."""

    return SystemParams(
        k=k,
        beta=beta,
        reaction=ReactionFactory.create(reaction, payload or {}, k),
        a=a,
    )


def build_profile_field(
    kind: str = "classified-pair",
    *,
    params: dict[str, Any] | None = None,
    h: float = 0.05,
) -> Field:
    """Sample a closed-form profile on the default half-box."""

    return ProfileFactory.create(kind, params).sample(build_grid(h=h))


def build_config_payload(**overrides: Any) -> dict[str, Any]:
    """Return a small valid experiment payload; top-level sections are replaced wholesale."""

    payload: dict[str, Any] = {
        "name": "unit-run",
        "grid": {"h": 0.1},
        "system": {"k": 2, "reaction": "zero"},
        "solver": {"method": "newton", "tol": 1e-10, "max_iter": 40},
        "dirichlet": {"kind": "classified-pair", "params": {"k": 0, "c": 1.0, "sign": 1}},
        "scan": {"centers": [0.0], "radii": [0.2, 0.3, 0.4, 0.5, 0.6]},
        "sweep": {"beta": [10.0, 100.0]},
    }
    for key, value in overrides.items():
        if value is None:
            payload.pop(key, None)
        else:
            payload[key] = deepcopy(value)
    return payload


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    if isinstance(value, dict):
        inner = ", ".join(f"{key} = {_toml_value(item)}" for key, item in value.items())
        return "{ " + inner + " }"
    raise TypeError(f"cannot write {type(value).__name__} to TOML")


def write_config_toml(
    directory: Path, payload: dict[str, Any], name: str = "experiment.toml"
) -> Path:
    """Write ``payload`` as TOML (scalars first, then one table per section)."""

    lines = [
        f"{key} = {_toml_value(value)}"
        for key, value in payload.items()
        if not isinstance(value, dict)
    ]
    for section, table in payload.items():
        if isinstance(table, dict):
            lines.append("")
            lines.append(f"[{section}]")
            lines.extend(f"{key} = {_toml_value(value)}" for key, value in table.items())
    path = Path(directory) / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
