"""Arctan supersolution for the Robin decay comparison, and its property check."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..constants import DECAY_BOUND_CONSTANT
from .base import BaseProfile

logger = logging.getLogger(__name__)

CHECK_RTOL = 1e-12
HARMONIC_H2_FACTOR = 1.0
INTERIOR_SPACING_FLOOR = 0.02


def _arctan_pair(t: np.ndarray, y: np.ndarray, lift: float) -> np.ndarray:
    """(2/pi)[pi - arctan((t+1)/Y) - arctan((1-t)/Y)] with Y = y + lift."""
    Y = y + lift
    return (2.0 / math.pi) * (math.pi - np.arctan((t + 1.0) / Y) - np.arctan((1.0 - t) / Y))


def _arctan_pair_gradient(
    t: np.ndarray, y: np.ndarray, lift: float
) -> tuple[np.ndarray, np.ndarray]:
    Y = y + lift
    a = t + 1.0
    b = 1.0 - t
    da = Y * Y + a * a
    db = Y * Y + b * b
    scale = 2.0 / math.pi
    d_t = scale * (-Y / da + Y / db)
    d_y = scale * (a / da + b / db)
    return d_t, d_y


@dataclass(frozen=True)
class Supersolution(BaseProfile):
    """w = delta/M + sum over i of g(x_i, y), optionally divided by N.

    ``normalization="mean"`` divides the sum by N; ``"sum"`` does not. The two agree for
    N = 1. ``"auto"`` picks mean for N = 1 and sum otherwise, since the mean form falls
    below 1 on the outer boundary once N >= 2.
    """

    decay: float
    delta: float = 0.0
    dimension: int = 1
    normalization: str = "auto"

    kind = "supersolution-wdelta"

    def __post_init__(self) -> None:
        if not self.decay > 0:
            raise ValueError("M must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.normalization not in ("auto", "mean", "sum"):
            raise ValueError(f"Unsupported normalization: {self.normalization}")

    @property
    def components(self) -> int:
        return 1

    @property
    def lift(self) -> float:
        return 2.0 / self.decay

    @property
    def weight(self) -> float:
        mode = self.normalization
        if mode == "auto":
            mode = "mean" if self.dimension == 1 else "sum"
        return 1.0 / self.dimension if mode == "mean" else 1.0

    def flat_bound(self, bound_constant: float = DECAY_BOUND_CONSTANT) -> float:
        """Upper bound of w on the flat half-ball of radius 1/2."""
        return self.dimension * self.weight * bound_constant * (1.0 + self.delta) / self.decay

    def value_nd(self, coords: Sequence[np.ndarray], y: np.ndarray) -> np.ndarray:
        if len(coords) != self.dimension:
            raise ValueError(f"expected {self.dimension} horizontal coordinates")
        y = np.asarray(y, dtype=float)
        total = sum(_arctan_pair(np.asarray(t, dtype=float), y, self.lift) for t in coords)
        return self.delta / self.decay + self.weight * total

    def gradient_nd(self, coords: Sequence[np.ndarray], y: np.ndarray) -> np.ndarray:
        """Gradient with shape (N + 1, ...): horizontal derivatives then d/dy."""
        y = np.asarray(y, dtype=float)
        parts = [_arctan_pair_gradient(np.asarray(t, dtype=float), y, self.lift) for t in coords]
        rows = [self.weight * d_t for d_t, _ in parts]
        rows.append(self.weight * sum(d_y for _, d_y in parts))
        return np.stack(np.broadcast_arrays(*rows))

    def _planar(self) -> None:
        if self.dimension != 1:
            raise ValueError("planar evaluation requires dimension 1")

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self._planar()
        return self.value_nd([x], y)[np.newaxis]

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self._planar()
        return self.gradient_nd([x], y)[np.newaxis]

    def singular_points(self) -> tuple[tuple[float, float], ...]:
        return ((-1.0, -self.lift), (1.0, -self.lift))

    def parameters(self) -> dict[str, Any]:
        return {
            "M": self.decay,
            "delta": self.delta,
            "N": self.dimension,
            "normalization": self.normalization,
        }


def supersolution_wdelta(
    M: float, delta: float = 0.0, N: int = 1, normalization: str = "auto"
) -> Supersolution:
    return Supersolution(decay=M, delta=delta, dimension=N, normalization=normalization)


@dataclass(frozen=True)
class ConditionResult:
    name: str
    checked: int
    violations: int
    worst_margin: float
    worst_point: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "checked": self.checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "worst_point": list(self.worst_point),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class SupersolutionReport:
    profile: dict[str, Any]
    spacing: float
    bound_constant: float
    conditions: tuple[ConditionResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(condition.passed for condition in self.conditions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile": self.profile,
            "h": self.spacing,
            "bound_constant": self.bound_constant,
            "passed": self.passed,
            "conditions": [condition.to_dict() for condition in self.conditions],
        }


def _condition(
    name: str, margin: np.ndarray, points: np.ndarray, slack: np.ndarray
) -> ConditionResult:
    """Condition holds where margin >= -slack; points has shape (N + 1, n)."""
    margin = np.ravel(margin)
    failing = margin < -np.ravel(slack)
    worst = int(np.argmin(margin))
    return ConditionResult(
        name=name,
        checked=int(margin.size),
        violations=int(np.count_nonzero(failing)),
        worst_margin=float(margin[worst]),
        worst_point=tuple(float(c) for c in points[:, worst]),
    )


def _lattice(h: float, lo: float, hi: float) -> np.ndarray:
    count = int(round((hi - lo) / h)) + 1
    return np.linspace(lo, hi, count)


def _flat_points(dimension: int, h: float, radius: float) -> np.ndarray:
    axis = _lattice(h, -1.0, 1.0)
    grids = np.meshgrid(*([axis] * dimension), indexing="ij")
    coords = np.stack([g.ravel() for g in grids])
    keep = np.sum(coords**2, axis=0) <= radius * radius + 1e-12
    if dimension == 1:
        keep = np.abs(coords[0]) <= radius + 1e-12
    return np.vstack([coords[:, keep], np.zeros(int(keep.sum()))])


def _outer_points(dimension: int, h: float) -> np.ndarray:
    """Unit half-circle for N = 1; the faces of the half-box (-1, 1)^N x (0, 1) otherwise."""
    if dimension == 1:
        count = int(math.ceil(math.pi / h)) + 1
        theta = np.linspace(0.0, math.pi, count)
        return np.stack([np.cos(theta), np.sin(theta)])
    axis = _lattice(h, -1.0, 1.0)
    height = _lattice(h, 0.0, 1.0)
    faces = []
    for i in range(dimension):
        others = [axis] * (dimension - 1) + [height]
        grids = np.meshgrid(*others, indexing="ij")
        flat = [g.ravel() for g in grids]
        for side in (-1.0, 1.0):
            coords = flat[: dimension - 1]
            coords = coords[:i] + [np.full(flat[0].size, side)] + coords[i:]
            faces.append(np.stack(coords + [flat[-1]]))
    top = np.meshgrid(*([axis] * dimension), indexing="ij")
    faces.append(np.stack([g.ravel() for g in top] + [np.ones(top[0].size)]))
    return np.hstack(faces)


def _interior_points(dimension: int, h: float) -> np.ndarray:
    step = h if dimension == 1 else max(h, INTERIOR_SPACING_FLOOR)
    axis = _lattice(step, -1.0, 1.0)[1:-1]
    height = _lattice(step, 0.0, 1.0)[1:-1]
    grids = np.meshgrid(*([axis] * dimension + [height]), indexing="ij")
    coords = np.stack([g.ravel() for g in grids])
    if dimension == 1:
        coords = coords[:, np.sum(coords**2, axis=0) < 1.0]
    return coords


def _harmonic_scale(profile: Supersolution, points: np.ndarray, h: float) -> np.ndarray:
    """weight * sum of (rho - h)^-4 over the arctan singular lines.

    Each arctan term has fourth derivatives at most 6 / rho^4, so the 5-point Laplacian of w
    is bounded by (2/pi) h^2 times this scale.
    """
    N = profile.dimension
    Y = points[N] + profile.lift
    total = np.zeros(points.shape[1])
    for t in points[:N]:
        for rho in (np.hypot(t + 1.0, Y), np.hypot(1.0 - t, Y)):
            total += (rho - h) ** -4
    return profile.weight * total


def check_supersolution(
    profile: Supersolution,
    h: float = 1.0 / 200.0,
    *,
    bound_constant: float = DECAY_BOUND_CONSTANT,
) -> SupersolutionReport:
    """Verify harmonicity, the Robin inequality, the outer lower bound and the flat upper bound.

    Points are the lattice of spacing ``h`` (the solver's grid nodes for N = 1).
    """
    N = profile.dimension
    conditions: list[ConditionResult] = []

    def evaluate(points: np.ndarray) -> np.ndarray:
        return profile.value_nd(list(points[:N]), points[N])

    interior = _interior_points(N, h)
    centre = evaluate(interior)
    second = []
    for axis in range(N + 1):
        shift = np.zeros((N + 1, 1))
        shift[axis] = h
        second.append(evaluate(interior + shift) + evaluate(interior - shift) - 2.0 * centre)
    laplacian = np.abs(np.sum(second, axis=0)) / (h * h)
    bound = HARMONIC_H2_FACTOR * h * h * _harmonic_scale(profile, interior, h)
    conditions.append(_condition("harmonic", bound - laplacian, interior, np.zeros(1)))

    flat = _flat_points(N, h, 1.0)
    w = evaluate(flat)
    d_y = profile.gradient_nd(list(flat[:N]), flat[N])[N]
    robin = -d_y + profile.decay * w - profile.delta
    conditions.append(
        _condition("robin", robin, flat, CHECK_RTOL * np.maximum(1.0, profile.decay * w))
    )

    outer = _outer_points(N, h)
    conditions.append(_condition("outer", evaluate(outer) - 1.0, outer, np.full(1, CHECK_RTOL)))

    everywhere = np.hstack([interior, flat, outer])
    conditions.append(_condition("positive", evaluate(everywhere), everywhere, np.zeros(1)))

    inner = _flat_points(N, h, 0.5)
    bound = profile.flat_bound(bound_constant)
    conditions.append(
        _condition("flat-bound", bound - evaluate(inner), inner, np.full(1, CHECK_RTOL * bound))
    )
    report = SupersolutionReport(
        profile=profile.to_dict(),
        spacing=h,
        bound_constant=bound_constant,
        conditions=tuple(conditions),
    )
    for condition in report.conditions:
        if not condition.passed:
            logger.warning(
                "supersolution: %s violated at %d node(s); worst margin %.3e at %s",
                condition.name,
                condition.violations,
                condition.worst_margin,
                condition.worst_point,
            )
    return report


__all__ = [
    "ConditionResult",
    "Supersolution",
    "SupersolutionReport",
    "check_supersolution",
    "supersolution_wdelta",
]
