"""Uniform half-domain grids and the immutable fields sampled on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

MIN_NODES = 3
SPACING_RTOL = 1e-12


@dataclass(frozen=True)
class HalfGrid:
    """Tensor grid on [x_min, x_max] x [0, y_max]; the row y=0 is the flat boundary."""

    x_min: float
    x_max: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < MIN_NODES or self.ny < MIN_NODES:
            raise ValueError(
                f"grid too small: nx={self.nx}, ny={self.ny} (need at least {MIN_NODES})"
            )
        if not self.x_max > self.x_min or not self.y_max > 0:
            raise ValueError("grid extents must be positive")
        hx = (self.x_max - self.x_min) / (self.nx - 1)
        hy = self.y_max / (self.ny - 1)
        if not np.isclose(hx, hy, rtol=SPACING_RTOL, atol=0.0):
            raise ValueError(f"non-uniform spacing: hx={hx!r}, hy={hy!r}")

    @classmethod
    def from_spacing(
        cls,
        h: float,
        *,
        x_min: float = -1.0,
        x_max: float = 1.0,
        y_max: float = 1.0,
    ) -> HalfGrid:
        """Build the grid whose spacing is ``h`` on the given extents."""
        if h <= 0:
            raise ValueError("spacing must be positive")
        nx = int(round((x_max - x_min) / h)) + 1
        ny = int(round(y_max / h)) + 1
        return cls(x_min=x_min, x_max=x_max, y_max=y_max, nx=nx, ny=ny)

    @classmethod
    def from_mapping(cls, payload: Mapping[str, Any]) -> HalfGrid:
        try:
            return cls(
                x_min=float(payload["x_min"]),
                x_max=float(payload["x_max"]),
                y_max=float(payload["y_max"]),
                nx=int(payload["nx"]),
                ny=int(payload["ny"]),
            )
        except KeyError as exc:
            raise ValueError(f"Missing required key: {exc.args[0]}") from exc

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.y_max, self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return node coordinates with ``indexing="ij"`` so arrays are (nx, ny)."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def refined(self) -> HalfGrid:
        """Grid with half the spacing on the same extents; coarse nodes are every other node."""
        return HalfGrid(self.x_min, self.x_max, self.y_max, 2 * self.nx - 1, 2 * self.ny - 1)

    def contains_half_ball(self, x0: float, r: float, *, tol: float = 1e-12) -> bool:
        return (
            x0 - r >= self.x_min - tol and x0 + r <= self.x_max + tol and r <= self.y_max + tol
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "y_max": self.y_max,
            "nx": self.nx,
            "ny": self.ny,
            "h": self.h,
        }


@dataclass(frozen=True, eq=False)
class Field:
    """k-component samples on a :class:`HalfGrid`, stored read-only with shape (k, nx, ny)."""

    grid: HalfGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim == 2:
            values = values[np.newaxis]
        if values.ndim != 3 or values.shape[1:] != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def stack(cls, components: list[Field]) -> Field:
        if not components:
            raise ValueError("cannot stack an empty component list")
        grid = components[0].grid
        if any(part.grid != grid for part in components):
            raise ValueError("components live on different grids")
        return cls(grid, np.concatenate([part.values for part in components], axis=0))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    def component(self, i: int) -> Field:
        return Field(self.grid, self.values[i : i + 1])

    def trace(self) -> np.ndarray:
        """Flat-boundary values, shape (k, nx)."""
        return self.values[:, :, 0]

    def scaled(self, factor: float) -> Field:
        return Field(self.grid, factor * self.values)


@dataclass(frozen=True)
class VolumeGrid:
    """Uniform grid on [x1_min, x1_max] x [x2_min, x2_max] x [0, y_max] for lifted samples."""

    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    y_max: float
    n1: int
    n2: int
    ny: int

    def __post_init__(self) -> None:
        if min(self.n1, self.n2, self.ny) < MIN_NODES:
            raise ValueError("volume grid too small")
        spacings = np.array(
            [
                (self.x1_max - self.x1_min) / (self.n1 - 1),
                (self.x2_max - self.x2_min) / (self.n2 - 1),
                self.y_max / (self.ny - 1),
            ]
        )
        if np.any(spacings <= 0) or not np.allclose(spacings, spacings[0], rtol=1e-9, atol=0.0):
            raise ValueError(f"non-uniform volume spacing: {spacings.tolist()}")

    @classmethod
    def from_spacing(
        cls,
        h: float,
        *,
        x1: tuple[float, float] = (-1.0, 1.0),
        x2: tuple[float, float] = (-1.0, 1.0),
        y_max: float = 1.0,
    ) -> VolumeGrid:
        return cls(
            x1_min=x1[0],
            x1_max=x1[1],
            x2_min=x2[0],
            x2_max=x2[1],
            y_max=y_max,
            n1=int(round((x1[1] - x1[0]) / h)) + 1,
            n2=int(round((x2[1] - x2[0]) / h)) + 1,
            ny=int(round(y_max / h)) + 1,
        )

    @property
    def h(self) -> float:
        return (self.x1_max - self.x1_min) / (self.n1 - 1)

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.linspace(self.x1_min, self.x1_max, self.n1),
            np.linspace(self.x2_min, self.x2_max, self.n2),
            np.linspace(0.0, self.y_max, self.ny),
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.ny)


@dataclass(frozen=True, eq=False)
class VolumeField:
    """k-component samples on a :class:`VolumeGrid`, shape (k, n1, n2, ny)."""

    grid: VolumeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 4 or values.shape[1:] != self.grid.shape:
            raise ValueError(f"volume field shape {values.shape} does not match grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("volume field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @classmethod
    def lift(cls, planar: Field, x2: tuple[float, float]) -> VolumeField:
        """Extend a planar field constantly in the second horizontal variable."""
        grid = planar.grid
        n2 = int(round((x2[1] - x2[0]) / grid.h)) + 1
        vgrid = VolumeGrid(grid.x_min, grid.x_max, x2[0], x2[1], grid.y_max, grid.nx, n2, grid.ny)
        values = np.repeat(planar.values[:, :, np.newaxis, :], n2, axis=2)
        return cls(vgrid, values)


__all__ = [
    "Field",
    "HalfGrid",
    "MIN_NODES",
    "VolumeField",
    "VolumeGrid",
]
