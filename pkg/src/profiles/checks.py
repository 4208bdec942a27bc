"""Consistency checks run against any profile."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..extension_solver import interior_residual
from ..grid import HalfGrid
from .base import BaseProfile
from .factory import ProfileFactory
from .harmonic import ClassifiedPair
from .supersolution import Supersolution, check_supersolution

logger = logging.getLogger(__name__)

GRADIENT_RTOL = 1e-6
RATIO_RANGE = (3.5, 4.5)
EXACT_RESIDUAL = 1e-9
SEGREGATION_ATOL = 1e-12


@dataclass(frozen=True)
class GradientCheck:
    max_error: float
    worst_point: tuple[float, float]
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_error < GRADIENT_RTOL


def _far_from(profile: BaseProfile, x: np.ndarray, y: np.ndarray, radius: float) -> np.ndarray:
    keep = np.ones(x.shape, dtype=bool)
    for px, py in profile.singular_points():
        keep &= np.hypot(x - px, y - py) >= radius
    return keep


def gradient_consistency(
    profile: BaseProfile,
    samples: int = 1000,
    step: float = 1e-5,
    *,
    seed: int = 0,
    exclude: float = 0.05,
) -> GradientCheck:
    """Compare the analytic gradient with central differences at random points of B+ box.

    The error at a point is max |analytic - difference| / max(1, |analytic|).
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, 4 * samples)
    y = rng.uniform(2.0 * step, 1.0, 4 * samples)
    keep = _far_from(profile, x, y, exclude)
    x, y = x[keep][:samples], y[keep][:samples]
    analytic = profile.gradient(x, y)
    d_x = (profile.value(x + step, y) - profile.value(x - step, y)) / (2.0 * step)
    d_y = (profile.value(x, y + step) - profile.value(x, y - step)) / (2.0 * step)
    numeric = np.stack([d_x, d_y], axis=1)
    scale = np.maximum(1.0, np.abs(analytic))
    error = np.max(np.abs(analytic - numeric) / scale, axis=(0, 1))
    worst = int(np.argmax(error))
    return GradientCheck(
        max_error=float(error[worst]),
        worst_point=(float(x[worst]), float(y[worst])),
        samples=int(x.size),
    )


@dataclass(frozen=True)
class RefinementResult:
    """Max interior residuals at h and h/2 on shared nodes; ratio is None when both vanish."""

    coarse_max: float
    fine_max: float
    ratio: float | None
    worst_point: tuple[float, float]

    @property
    def passed(self) -> bool:
        return self.ratio is None or RATIO_RANGE[0] <= self.ratio <= RATIO_RANGE[1]


def harmonic_refinement_ratio(
    profile: BaseProfile,
    h: float,
    *,
    exclude: float = 0.05,
    grid: HalfGrid | None = None,
) -> RefinementResult:
    """Interior 5-point residual at spacing h versus h/2, compared on the coarse nodes."""
    coarse_grid = grid or HalfGrid.from_spacing(h)
    fine_grid = coarse_grid.refined()
    coarse = np.abs(interior_residual(profile.sample(coarse_grid)))
    fine = np.abs(interior_residual(profile.sample(fine_grid)))[:, 1::2, 1::2]
    X, Y = coarse_grid.mesh()
    X, Y = X[1:-1, 1:-1], Y[1:-1, 1:-1]
    keep = _far_from(profile, X, Y, exclude)
    coarse_max = float(np.max(coarse[:, keep])) if keep.any() else 0.0
    fine_max = float(np.max(fine[:, keep])) if keep.any() else 0.0
    flat_index = int(np.argmax(np.max(np.where(keep, coarse, -np.inf), axis=0)))
    i, j = np.unravel_index(flat_index, keep.shape)
    worst = (float(X[i, j]), float(Y[i, j]))
    if coarse_max < EXACT_RESIDUAL and fine_max < EXACT_RESIDUAL:
        return RefinementResult(coarse_max, fine_max, None, worst)
    ratio = coarse_max / fine_max if fine_max > 0 else float("inf")
    return RefinementResult(coarse_max, fine_max, ratio, worst)


def trace_segregation(profile: BaseProfile, grid: HalfGrid) -> float:
    """Max over the flat boundary of |v_i v_j| for i < j."""
    trace = profile.sample(grid).trace()
    worst = 0.0
    for i in range(trace.shape[0]):
        for j in range(i + 1, trace.shape[0]):
            worst = max(worst, float(np.max(np.abs(trace[i] * trace[j]))))
    return worst


@dataclass
class ProfileCheckReport:
    kind: str
    parameters: dict[str, Any]
    h: float
    checks: dict[str, dict[str, Any]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check["passed"] for check in self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "parameters": self.parameters,
            "h": self.h,
            "passed": self.passed,
            "checks": self.checks,
        }


def run_profile_check(
    kind: str, params: dict[str, Any] | None = None, *, h: float = 1.0 / 100.0
) -> ProfileCheckReport:
    """Build a profile and run every check that applies to it."""
    profile = ProfileFactory.create(kind, params)
    report = ProfileCheckReport(kind=kind, parameters=profile.parameters(), h=h)
    planar = not isinstance(profile, Supersolution) or profile.dimension == 1

    if planar:
        gradient = gradient_consistency(profile)
        report.checks["gradient"] = {
            "passed": gradient.passed,
            "max_error": gradient.max_error,
            "worst_point": list(gradient.worst_point),
        }
        refinement = harmonic_refinement_ratio(profile, h)
        report.checks["refinement"] = {
            "passed": refinement.passed,
            "ratio": refinement.ratio,
            "coarse_max": refinement.coarse_max,
            "fine_max": refinement.fine_max,
            "worst_point": list(refinement.worst_point),
        }
    if isinstance(profile, ClassifiedPair):
        overlap = trace_segregation(profile, HalfGrid.from_spacing(h))
        report.checks["segregation"] = {
            "passed": overlap <= SEGREGATION_ATOL,
            "max_product": overlap,
        }
    if isinstance(profile, Supersolution):
        properties = check_supersolution(profile, h)
        report.checks["supersolution"] = properties.to_dict()
    for name, check in report.checks.items():
        if not check["passed"]:
            logger.warning("profiles: %s check failed for %s", name, kind)
    return report


__all__ = [
    "GradientCheck",
    "ProfileCheckReport",
    "RefinementResult",
    "gradient_consistency",
    "harmonic_refinement_ratio",
    "run_profile_check",
    "trace_segregation",
]
