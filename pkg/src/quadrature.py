"""Quadrature on half-balls, arcs and flat-boundary segments of a :class:`HalfGrid`.

Volume integrals use cell-centre masking with 4-point cell gradients. Arc integrals
use midpoint samples with bilinear interpolation of values and central-difference
nodal gradients. Flat integrals use the trapezoid rule at spacing h/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from .constants import ARC_SAMPLES
from .grid import Field, HalfGrid

EXTENT_TOL = 1e-12


def snap_radius(r: float, h: float) -> float:
    """Round ``r`` to the nearest positive multiple of h/2."""
    half = 0.5 * h
    return max(1, int(round(r / half))) * half


def validate_radii(grid: HalfGrid, x0: float, radii) -> np.ndarray:
    """Snap radii to multiples of h/2 and check each half-ball B_r+(x0) lies in the grid.

    Raises:
        ValueError: If the center is outside the grid, a radius exceeds the domain or the
            snapped radii are not strictly increasing.
    """
    if not grid.x_min - EXTENT_TOL <= x0 <= grid.x_max + EXTENT_TOL:
        raise ValueError(f"center {x0} outside grid [{grid.x_min}, {grid.x_max}]")
    snapped = np.array([snap_radius(float(r), grid.h) for r in np.atleast_1d(radii)])
    if snapped.size == 0:
        raise ValueError("radius list is empty")
    if np.any(np.diff(snapped) <= 0):
        raise ValueError("radii must be strictly increasing after snapping to h/2")
    for r in snapped:
        if not grid.contains_half_ball(x0, r, tol=EXTENT_TOL):
            raise ValueError(f"radius {r} exceeds domain around center {x0}")
    return snapped


def cell_centers(grid: HalfGrid) -> tuple[np.ndarray, np.ndarray]:
    xc = 0.5 * (grid.x[:-1] + grid.x[1:])
    yc = 0.5 * (grid.y[:-1] + grid.y[1:])
    return np.meshgrid(xc, yc, indexing="ij")


def cell_gradients(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradient at cell centres from the four corner nodes, shapes (k, nx-1, ny-1)."""
    a = values[:, :-1, :-1]
    b = values[:, 1:, :-1]
    c = values[:, :-1, 1:]
    d = values[:, 1:, 1:]
    gx = (b + d - a - c) / (2.0 * h)
    gy = (c + d - a - b) / (2.0 * h)
    return gx, gy


def ball_mask(grid: HalfGrid, center: tuple[float, float], r: float) -> np.ndarray:
    """Cells whose centre lies in the open ball B_r(center); y > 0 holds for every cell."""
    XC, YC = cell_centers(grid)
    return (XC - center[0]) ** 2 + (YC - center[1]) ** 2 < r * r


def half_ball_mask(grid: HalfGrid, x0: float, r: float) -> np.ndarray:
    return ball_mask(grid, (x0, 0.0), r)


@dataclass(frozen=True)
class ArcSamples:
    """Midpoint samples on the half circle of radius r about (x0, 0)."""

    theta: np.ndarray
    points: np.ndarray
    values: np.ndarray
    gradient: np.ndarray
    weight: float

    @property
    def normal(self) -> np.ndarray:
        return np.stack([np.cos(self.theta), np.sin(self.theta)])

    @property
    def normal_derivative(self) -> np.ndarray:
        """(k, n) array of grad v . nu."""
        return np.einsum("kdn,dn->kn", self.gradient, self.normal)

    def integrate(self, density: np.ndarray) -> float:
        return float(self.weight * np.sum(density))


class FieldSampler:
    """Bilinear interpolation of a field and its nodal gradient."""

    def __init__(self, field_: Field):
        self.field = field_
        self.grid = field_.grid

    @cached_property
    def cell_gradients(self) -> tuple[np.ndarray, np.ndarray]:
        return cell_gradients(self.field.values, self.grid.h)

    @cached_property
    def cell_energy(self) -> np.ndarray:
        """|grad v_i|^2 at cell centres, shape (k, nx-1, ny-1)."""
        gx, gy = self.cell_gradients
        return gx * gx + gy * gy

    @cached_property
    def _interpolator(self) -> RegularGridInterpolator:
        values = self.field.values
        gx, gy = np.gradient(values, self.grid.h, self.grid.h, axis=(1, 2), edge_order=2)
        stacked = np.concatenate([values, gx, gy], axis=0)
        return RegularGridInterpolator(
            (self.grid.x, self.grid.y), np.moveaxis(stacked, 0, -1), method="linear"
        )

    def at(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values (k, n) and gradients (k, 2, n) at points of shape (2, n)."""
        k = self.field.k
        x = np.clip(points[0], self.grid.x_min, self.grid.x_max)
        y = np.clip(points[1], 0.0, self.grid.y_max)
        sampled = self._interpolator(np.column_stack([x, y])).T
        values = sampled[:k]
        gradient = np.stack([sampled[k : 2 * k], sampled[2 * k :]], axis=1)
        return values, gradient

    def arc(self, x0: float, r: float, samples: int = ARC_SAMPLES) -> ArcSamples:
        theta = (np.arange(samples) + 0.5) * math.pi / samples
        points = np.stack([x0 + r * np.cos(theta), r * np.sin(theta)])
        values, gradient = self.at(points)
        return ArcSamples(
            theta=theta,
            points=points,
            values=values,
            gradient=gradient,
            weight=r * math.pi / samples,
        )

    def volume_integral(self, density: np.ndarray, mask: np.ndarray) -> float:
        """Integral of a cell-centred density over the masked cells."""
        return float(np.sum(density[..., mask]) * self.grid.h**2)

    def flat_samples(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Trace samples at spacing <= h/2 on [lo, hi], shapes (m,) and (k, m)."""
        xs = flat_abscissae(lo, hi, self.grid.h)
        trace = self.field.trace()
        return xs, np.stack([np.interp(xs, self.grid.x, row) for row in trace])

    def endpoint_values(self, points) -> np.ndarray:
        """Trace values (k, len(points)) at flat-boundary abscissae."""
        trace = self.field.trace()
        xs = np.asarray(points, dtype=float)
        return np.stack([np.interp(xs, self.grid.x, row) for row in trace])


def flat_abscissae(lo: float, hi: float, h: float) -> np.ndarray:
    """Uniform abscissae on [lo, hi] with spacing at most h/2."""
    count = max(3, int(math.ceil((hi - lo) / (0.5 * h) - 1e-9)) + 1)
    return np.linspace(lo, hi, count)


def flat_integral(xs: np.ndarray, density: np.ndarray) -> float:
    return float(trapezoid(density, xs))


__all__ = [
    "ArcSamples",
    "FieldSampler",
    "ball_mask",
    "cell_centers",
    "cell_gradients",
    "flat_abscissae",
    "flat_integral",
    "half_ball_mask",
    "snap_radius",
    "validate_radii",
]
