"""Pohozaev identity on cylinders B_r+ x Q_l for three-dimensional samples.

The split dimension selects how many horizontal directions form the half-ball: split 2
is the half-ball identity in R^3_+, split 1 is the half-disk in (x1, y) times the
interval |x2 - c2| < l, with the lateral term on the two faces x2 = c2 +- l.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .constants import ARC_SAMPLES, H_FLOOR
from .grid import VolumeField, VolumeGrid
from .quadrature import flat_abscissae, flat_integral
from .reactions import SystemParams

logger = logging.getLogger(__name__)

VOLUME_DIMENSION = 2
EXTENT_TOL = 1e-12


@dataclass(frozen=True)
class CylinderSpec:
    split: int
    radius: float
    half_edge: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.split == 1 and not self.half_edge > 0:
            raise ValueError(f"half edge must be positive, got {self.half_edge}")

    def check(self, grid: VolumeGrid) -> None:
        """Raises ValueError if the split is out of range or the cylinder leaves the grid."""
        if not 1 <= self.split <= VOLUME_DIMENSION:
            raise ValueError(f"split dimension out of range: {self.split}")
        c1, c2 = self.center
        reach2 = self.radius if self.split == VOLUME_DIMENSION else self.half_edge
        inside = (
            c1 - self.radius >= grid.x1_min - EXTENT_TOL
            and c1 + self.radius <= grid.x1_max + EXTENT_TOL
            and c2 - reach2 >= grid.x2_min - EXTENT_TOL
            and c2 + reach2 <= grid.x2_max + EXTENT_TOL
            and self.radius <= grid.y_max + EXTENT_TOL
        )
        if not inside:
            raise ValueError(f"cylinder {self.to_dict()} is not contained in the grid")

    def to_dict(self) -> dict[str, Any]:
        return {
            "split": self.split,
            "radius": self.radius,
            "half_edge": self.half_edge,
            "center": list(self.center),
        }


class VolumeSampler:
    """Trilinear interpolation of a volume field and its nodal gradient."""

    def __init__(self, field_: VolumeField):
        self.field = field_
        self.grid = field_.grid

    @cached_property
    def cell_gradients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Gradient at cell centres from the eight corners, each (k, n1-1, n2-1, ny-1)."""
        v = self.field.values
        h = self.grid.h

        def difference(axis: int) -> np.ndarray:
            upper = [slice(None)] + [slice(None, -1)] * 3
            lower = [slice(None)] + [slice(None, -1)] * 3
            upper[axis] = slice(1, None)
            lower[axis] = slice(None, -1)
            others = [a for a in (1, 2, 3) if a != axis]
            total = np.zeros_like(v[tuple([slice(None)] + [slice(None, -1)] * 3)])
            for s in (0, 1):
                for t in (0, 1):
                    up, low = list(upper), list(lower)
                    up[others[0]] = low[others[0]] = slice(s, v.shape[others[0]] - 1 + s)
                    up[others[1]] = low[others[1]] = slice(t, v.shape[others[1]] - 1 + t)
                    total = total + v[tuple(up)] - v[tuple(low)]
            return total / (4.0 * h)

        return difference(1), difference(2), difference(3)

    @cached_property
    def cell_centers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        centres = [0.5 * (axis[:-1] + axis[1:]) for axis in self.grid.axes]
        return tuple(np.meshgrid(*centres, indexing="ij"))

    @cached_property
    def _interpolator(self) -> RegularGridInterpolator:
        values = self.field.values
        h = self.grid.h
        gradients = np.gradient(values, h, h, h, axis=(1, 2, 3), edge_order=2)
        stacked = np.concatenate([values, *gradients], axis=0)
        return RegularGridInterpolator(self.grid.axes, np.moveaxis(stacked, 0, -1), method="linear")

    def at(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values (k, n) and gradients (k, 3, n) at points of shape (3, n)."""
        k = self.field.k
        g = self.grid
        clipped = np.column_stack(
            [
                np.clip(points[0], g.x1_min, g.x1_max),
                np.clip(points[1], g.x2_min, g.x2_max),
                np.clip(points[2], 0.0, g.y_max),
            ]
        )
        sampled = self._interpolator(clipped).T
        gradient = np.stack([sampled[k : 2 * k], sampled[2 * k : 3 * k], sampled[3 * k :]], axis=1)
        return sampled[:k], gradient


def _midpoints(lo: float, hi: float, count: int) -> tuple[np.ndarray, float]:
    step = (hi - lo) / count
    return lo + (np.arange(count) + 0.5) * step, step


@dataclass(frozen=True)
class CylinderResult:
    spec: CylinderSpec
    terms: dict[str, float]
    surface_normal: float
    lateral: float

    @property
    def lhs(self) -> float:
        return float(sum(self.terms.values()))

    @property
    def rhs(self) -> float:
        return self.surface_normal - self.lateral

    @property
    def residual(self) -> float:
        scale = max(
            [abs(t) for t in self.terms.values()] + [abs(self.surface_normal), abs(self.lateral)]
        )
        if scale < H_FLOOR:
            return 0.0
        return (self.lhs - self.rhs) / scale

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.spec.to_dict(),
            "terms": self.terms,
            "surface_normal": self.surface_normal,
            "lateral": self.lateral,
            "residual": self.residual,
        }


def _slab_terms(
    sampler: VolumeSampler, params: SystemParams, spec: CylinderSpec
) -> CylinderResult:
    """Half-disk in (x1, y) times the x2 interval."""
    h = sampler.grid.h
    r, l = spec.radius, spec.half_edge
    c1, c2 = spec.center
    n = spec.split
    XC, X2C, YC = sampler.cell_centers
    mask = ((XC - c1) ** 2 + YC**2 < r * r) & (np.abs(X2C - c2) < l)
    g1, g2, gy = sampler.cell_gradients
    planar = g1**2 + gy**2
    full = planar + g2**2
    density = np.sum(2.0 * planar - (n + 1) * full, axis=0)
    volume = float(np.sum(density[mask]) * h**3)

    x2_count = max(2, int(math.ceil(2.0 * l / (0.5 * h) - 1e-9)))
    x2, dx2 = _midpoints(c2 - l, c2 + l, x2_count)
    theta, dtheta = _midpoints(0.0, math.pi, ARC_SAMPLES)
    T, S = np.meshgrid(theta, x2, indexing="ij")
    arc_points = np.stack([c1 + r * np.cos(T).ravel(), S.ravel(), r * np.sin(T).ravel()])
    _, arc_gradient = sampler.at(arc_points)
    normal = np.stack([np.cos(T).ravel(), np.zeros(T.size), np.sin(T).ravel()])
    arc_weight = r * dtheta * dx2
    gradient_sq = float(np.sum(arc_gradient**2)) * arc_weight
    normal_sq = float(np.sum(np.einsum("kdn,dn->kn", arc_gradient, normal) ** 2)) * arc_weight

    xs = flat_abscissae(c1 - r, c1 + r, h)
    XS, SS = np.meshgrid(xs, x2, indexing="ij")
    flat_values, _ = sampler.at(np.stack([XS.ravel(), SS.ravel(), np.zeros(XS.size)]))
    flat_values = flat_values.reshape((-1,) + XS.shape)
    reaction = params.reaction
    primitive_line = np.sum(reaction.primitives(flat_values), axis=0).sum(axis=1) * dx2
    interaction_line = params.interaction_density(flat_values).sum(axis=1) * dx2

    ends = []
    for x_end in (c1 - r, c1 + r):
        values, _ = sampler.at(np.stack([np.full(x2.size, x_end), x2, np.zeros(x2.size)]))
        ends.append(values)
    ends = np.concatenate(ends, axis=1)

    rho_count = max(8, int(math.ceil(r / (0.5 * h))))
    rho, drho = _midpoints(0.0, r, rho_count)
    R, A = np.meshgrid(rho, theta, indexing="ij")
    lateral = 0.0
    for side in (-1.0, 1.0):
        points = np.stack(
            [c1 + (R * np.cos(A)).ravel(), np.full(R.size, c2 + side * l), (R * np.sin(A)).ravel()]
        )
        _, gradient = sampler.at(points)
        radial = gradient[:, 0] * (points[0] - c1) + gradient[:, 2] * points[2]
        lateral += float(np.sum(side * gradient[:, 1] * radial * R.ravel())) * drho * dtheta

    terms = {
        "volume": volume,
        "surface": r * gradient_sq,
        "flat_reaction": 2 * n * flat_integral(xs, primitive_line),
        "flat_interaction": -n * params.beta * flat_integral(xs, interaction_line),
        "sphere_reaction": -2.0 * r * float(np.sum(reaction.primitives(ends))) * dx2,
        "sphere_interaction": r
        * params.beta
        * float(np.sum(params.interaction_density(ends)))
        * dx2,
    }
    return CylinderResult(
        spec=spec, terms=terms, surface_normal=2.0 * r * normal_sq, lateral=2.0 * lateral
    )


def _ball_terms(
    sampler: VolumeSampler, params: SystemParams, spec: CylinderSpec
) -> CylinderResult:
    """Half-ball in R^3_+; Q_l is empty."""
    h = sampler.grid.h
    r = spec.radius
    c1, c2 = spec.center
    n = VOLUME_DIMENSION
    XC, X2C, YC = sampler.cell_centers
    mask = (XC - c1) ** 2 + (X2C - c2) ** 2 + YC**2 < r * r
    g1, g2, gy = sampler.cell_gradients
    density = np.sum(g1**2 + g2**2 + gy**2, axis=0)
    volume = (1 - n) * float(np.sum(density[mask]) * h**3)

    polar, dpolar = _midpoints(0.0, 0.5 * math.pi, ARC_SAMPLES // 2)
    azimuth, dazimuth = _midpoints(0.0, 2.0 * math.pi, 2 * ARC_SAMPLES)
    P, A = np.meshgrid(polar, azimuth, indexing="ij")
    normal = np.stack(
        [(np.sin(P) * np.cos(A)).ravel(), (np.sin(P) * np.sin(A)).ravel(), np.cos(P).ravel()]
    )
    _, gradient = sampler.at(np.array([[c1], [c2], [0.0]]) + r * normal)
    weight = r * r * np.sin(P).ravel() * dpolar * dazimuth
    gradient_sq = float(np.sum(np.sum(gradient**2, axis=(0, 1)) * weight))
    normal_sq = float(
        np.sum(np.sum(np.einsum("kdn,dn->kn", gradient, normal) ** 2, axis=0) * weight)
    )

    rho, drho = _midpoints(0.0, r, max(8, int(math.ceil(r / (0.5 * h)))))
    R, B = np.meshgrid(rho, azimuth, indexing="ij")
    disk_points = np.stack(
        [c1 + (R * np.cos(B)).ravel(), c2 + (R * np.sin(B)).ravel(), np.zeros(R.size)]
    )
    disk_values, _ = sampler.at(disk_points)
    disk_weight = R.ravel() * drho * dazimuth
    circle_points = np.stack(
        [c1 + r * np.cos(azimuth), c2 + r * np.sin(azimuth), np.zeros(azimuth.size)]
    )
    circle_values, _ = sampler.at(circle_points)
    reaction = params.reaction
    disk_primitive = float(np.sum(np.sum(reaction.primitives(disk_values), axis=0) * disk_weight))
    disk_interaction = float(np.sum(params.interaction_density(disk_values) * disk_weight))
    circle_primitive = float(np.sum(reaction.primitives(circle_values))) * r * dazimuth
    circle_interaction = float(np.sum(params.interaction_density(circle_values))) * r * dazimuth

    terms = {
        "volume": volume,
        "surface": r * gradient_sq,
        "flat_reaction": 2 * n * disk_primitive,
        "flat_interaction": -n * params.beta * disk_interaction,
        "sphere_reaction": -2.0 * r * circle_primitive,
        "sphere_interaction": r * params.beta * circle_interaction,
    }
    return CylinderResult(spec=spec, terms=terms, surface_normal=2.0 * r * normal_sq, lateral=0.0)


def pohozaev_cylinder_terms(
    field_: VolumeField, params: SystemParams, spec: CylinderSpec
) -> CylinderResult:
    if field_.k != params.k:
        raise ValueError(f"field has {field_.k} components, params expect {params.k}")
    spec.check(field_.grid)
    sampler = VolumeSampler(field_)
    if spec.split == VOLUME_DIMENSION:
        return _ball_terms(sampler, params, spec)
    return _slab_terms(sampler, params, spec)


def pohozaev_residual_cylinder(
    field_: VolumeField, params: SystemParams, spec: CylinderSpec
) -> float:
    """Normalised residual of the cylinder Pohozaev identity.

    Raises:
        ValueError: If the split dimension is out of range or the cylinder leaves the grid.
    """
    result = pohozaev_cylinder_terms(field_, params, spec)
    logger.info("cylinder: split=%d r=%.4g residual %.3e", spec.split, spec.radius, result.residual)
    return result.residual


__all__ = [
    "CylinderResult",
    "CylinderSpec",
    "VolumeSampler",
    "pohozaev_cylinder_terms",
    "pohozaev_residual_cylinder",
]
