"""Pydantic models for experiment TOML files (see docs/DATA_SCHEMAS.md)."""

from __future__ import annotations

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from .constants import (
    DECAY_SLACK,
    DEFAULT_DAMPING,
    DEFAULT_MAX_ITER,
    DEFAULT_NU_PRIME,
    DEFAULT_TOLERANCE,
    EPS_ASSUMPTION,
    KERNEL_EPS_FACTOR,
    SPECTRAL_N_AZIMUTH,
    SPECTRAL_N_POLAR,
    THETA_GRID_POINTS,
)
from .extension_solver import SolverMethod, SolverOptions
from .grid import HalfGrid
from .reactions import ReactionFactory, ReactionKind, SystemParams
from .run_store import payload_hash

CLASSIFIED_COMPONENTS = 2


class ConfigError(Exception):
    """Raised when an experiment file cannot be read or parsed."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class GridConfig(BaseModel):
    """Half-box [x_min, x_max] x [0, y_max] with spacing h."""

    model_config = ConfigDict(extra="forbid")

    h: float = Field(..., gt=0, le=0.5, description="Grid spacing")
    x_min: float = Field(default=-1.0)
    x_max: float = Field(default=1.0)
    y_max: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_extents(self) -> "GridConfig":
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        for name, length in (("x extent", self.x_max - self.x_min), ("y_max", self.y_max)):
            cells = length / self.h
            if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
                raise ValueError(f"{name} must be a whole multiple of h")
        return self

    def build(self) -> HalfGrid:
        return HalfGrid.from_spacing(self.h, x_min=self.x_min, x_max=self.x_max, y_max=self.y_max)


class SystemConfig(BaseModel):
    """Component count, competition, reaction family and interaction weights."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    k: int = Field(..., ge=1, description="Number of components")
    beta: float = Field(default=0.0, ge=0, description="Competition strength")
    reaction: ReactionKind = Field(default=ReactionKind.ZERO)
    omega: Optional[List[float]] = Field(default=None, description="Cubic coefficients")
    lam: Optional[List[float]] = Field(
        default=None, alias="lambda", description="Linear coefficients"
    )
    rate: Optional[List[float]] = Field(default=None, description="Logistic rates")
    capacity: Optional[List[float]] = Field(default=None, description="Logistic capacities")
    a_ij: Optional[List[List[float]]] = Field(default=None, description="Interaction weights")
    mass: Optional[List[float]] = Field(default=None, description="Screening masses")

    @field_validator("reaction")
    @classmethod
    def validate_reaction(cls, value: ReactionKind) -> ReactionKind:
        if value is ReactionKind.CUSTOM:
            raise ValueError("custom reactions cannot be configured from a file")
        return value

    @model_validator(mode="after")
    def check_lengths(self) -> "SystemConfig":
        for name in ("omega", "lam", "rate", "capacity", "mass"):
            values = getattr(self, name)
            if values is not None and len(values) not in (1, self.k):
                raise ValueError(f"{name} must have 1 or {self.k} entries")
        if self.a_ij is not None and (
            len(self.a_ij) != self.k or any(len(row) != self.k for row in self.a_ij)
        ):
            raise ValueError(f"a_ij must be a {self.k}x{self.k} matrix")
        return self

    def reaction_payload(self) -> dict[str, Any]:
        payload: dict[str, Any] = {}
        for key, value in (
            ("omega", self.omega),
            ("lambda", self.lam),
            ("rate", self.rate),
            ("capacity", self.capacity),
        ):
            if value is not None:
                payload[key] = value * self.k if len(value) == 1 else value
        return payload

    def build(self, beta: float | None = None) -> SystemParams:
        reaction = ReactionFactory.create(self.reaction.value, self.reaction_payload(), self.k)
        mass = None
        if self.mass is not None:
            mass = tuple(self.mass * self.k) if len(self.mass) == 1 else tuple(self.mass)
        return SystemParams(
            k=self.k,
            beta=self.beta if beta is None else beta,
            reaction=reaction,
            a=self.a_ij,
            mass=mass,
        )


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: SolverMethod = Field(default=SolverMethod.PICARD)
    damping: float = Field(default=DEFAULT_DAMPING, gt=0, le=1)
    tol: float = Field(default=DEFAULT_TOLERANCE, gt=0)
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1)

    def build(self, threads: int = 1) -> SolverOptions:
        return SolverOptions(
            damping=self.damping,
            tol=self.tol,
            max_iter=self.max_iter,
            method=self.method,
            threads=threads,
        )


class DirichletConfig(BaseModel):
    """Edge data: a classified pair, constant levels, quintic bumps or sampled arrays."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["classified-pair", "bump", "file", "constant"]
    params: Dict[str, Any] = Field(default_factory=dict, description="Profile parameters")
    values: Optional[List[float]] = Field(default=None, description="Constant levels")
    centers: Optional[List[float]] = Field(default=None, description="Bump centres along x")
    width: float = Field(default=0.5, gt=0, description="Bump radius")
    amplitudes: Optional[List[float]] = Field(default=None, description="Bump heights")
    path: Optional[str] = Field(default=None, description=".npz file with left, right, top")

    @model_validator(mode="after")
    def check_kind(self) -> "DirichletConfig":
        if self.kind == "constant" and not self.values:
            raise ValueError("constant data needs values")
        if self.kind == "bump":
            if not self.centers or not self.amplitudes:
                raise ValueError("bump data needs centers and amplitudes")
            if len(self.centers) != len(self.amplitudes):
                raise ValueError("bump centers and amplitudes differ in length")
        if self.kind == "file" and not self.path:
            raise ValueError("file data needs a path")
        return self

    def components(self) -> int | None:
        if self.kind == "classified-pair":
            return CLASSIFIED_COMPONENTS
        if self.kind == "constant":
            return len(self.values or [])
        if self.kind == "bump":
            return len(self.centers or [])
        return None


class ScanConfig(BaseModel):
    """Centers and radii of the monotonicity scans, with their exponents."""

    model_config = ConfigDict(extra="forbid")

    centers: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    radii: List[float] = Field(..., min_length=2)
    nu: Optional[float] = Field(default=None, gt=0, le=1, description="ACF exponent")
    nu_prime: float = Field(default=DEFAULT_NU_PRIME, gt=0, lt=0.5)
    kernel_eps_factor: float = Field(default=KERNEL_EPS_FACTOR, ge=0)
    eps_assumption: float = Field(default=EPS_ASSUMPTION, gt=0)

    @field_validator("radii")
    @classmethod
    def validate_radii(cls, value: List[float]) -> List[float]:
        if any(r <= 0 for r in value):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("radii must be strictly increasing")
        return value


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: List[float] = Field(..., min_length=1, description="Competition strengths")
    continuation: bool = Field(default=True, description="Start each solve from the previous one")
    holder_alpha: float = Field(default=0.45, gt=0, lt=1, description="Hölder exponent")
    holder_radius: float = Field(default=0.5, gt=0, description="Hölder region radius")

    @field_validator("beta")
    @classmethod
    def validate_beta(cls, value: List[float]) -> List[float]:
        if any(b <= 0 for b in value):
            raise ValueError("beta values must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("beta values must be strictly ascending")
        return value


class SpectralConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(default=2, ge=1, le=2)
    theta_points: int = Field(default=THETA_GRID_POINTS, ge=2)
    n_azimuth: int = Field(default=SPECTRAL_N_AZIMUTH, ge=8)
    n_polar: int = Field(default=SPECTRAL_N_POLAR, ge=4)


class DecayConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    M: float = Field(default=10.0, gt=0, description="Robin coefficient")
    delta: float = Field(default=0.0, ge=0)
    h: float = Field(default=1.0 / 200.0, gt=0, le=0.5)
    slack: float = Field(default=DECAY_SLACK, ge=0, lt=1)


class ExperimentConfig(BaseModel):
    """A named experiment: solve, scan, sweep and optional spectral and decay stages."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str = Field(..., description="Run name; also the default output folder")
    grid: GridConfig
    system: SystemConfig
    solver: SolverConfig = Field(default_factory=SolverConfig)
    dirichlet: DirichletConfig
    scan: Optional[ScanConfig] = Field(default=None)
    sweep: Optional[SweepConfig] = Field(default=None)
    spectral: Optional[SpectralConfig] = Field(default=None)
    decay: Optional[DecayConfig] = Field(default=None)
    output: Optional[str] = Field(default=None, description="Output directory override")

    @field_validator("name")
    @classmethod
    def validate_name(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("name must be non-empty")
        return value

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        expected = self.dirichlet.components()
        if expected is not None and expected not in (1, self.system.k):
            raise ValueError(
                f"dirichlet data has {expected} components, system has {self.system.k}"
            )
        if self.dirichlet.kind == "classified-pair" and self.system.k != CLASSIFIED_COMPONENTS:
            raise ValueError("classified-pair data needs k = 2")
        if self.scan is not None:
            grid = self.grid.build()
            for center in self.scan.centers:
                for r in self.scan.radii:
                    if not grid.contains_half_ball(center, r):
                        raise ValueError(f"scan radius {r} about {center} leaves the grid")
        return self

    def betas(self) -> list[float]:
        return list(self.sweep.beta) if self.sweep is not None else [self.system.beta]

    def canonical(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude={"output"})

    def config_hash(self) -> str:
        return payload_hash(self.canonical())


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate an experiment TOML file.

    Raises:
        ConfigError: If the file is missing or not valid TOML.
        pydantic.ValidationError: If the content does not match the schema.
    """
    path = Path(path)
    try:
        with path.open("rb") as handle:
            payload = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(str(path), "file not found") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"invalid TOML: {exc}") from exc
    return ExperimentConfig.model_validate(payload)


def describe_validation_error(exc: ValidationError) -> list[str]:
    """One ``dotted.location: message`` line per error."""
    lines = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{location}: {error['msg']}")
    return lines


__all__ = [
    "ConfigError",
    "DecayConfig",
    "DirichletConfig",
    "ExperimentConfig",
    "GridConfig",
    "ScanConfig",
    "SolverConfig",
    "SpectralConfig",
    "SweepConfig",
    "SystemConfig",
    "describe_validation_error",
    "load_config",
]
