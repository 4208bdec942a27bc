"""Blow-up measurements: rescaling, Hölder seminorms, zero sets, segregation and decay."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .constants import (
    ARC_SAMPLES,
    DECAY_BOUND_CONSTANT,
    DECAY_SLACK,
    HOLDER_EXACT_LIMIT,
    HOLDER_STRIDE,
    ZERO_SET_FACTOR,
    ZERO_SET_FLOOR,
)
from .extension_solver import DirichletData, solve_linear_bvp
from .grid import Field, HalfGrid
from .quadrature import FieldSampler, flat_integral
from .reactions import SystemParams

logger = logging.getLogger(__name__)

DOMAIN_TOL = 1e-9
BLOCK_SIZE = 256
ZERO_SET_PERCENTILE = 95.0


# Cutoff and rescaling


def eta_cutoff(rho: np.ndarray) -> np.ndarray:
    """Radial quintic cutoff: 1 for rho <= 1/2, 0 for rho >= 1, C^2 in between."""
    t = np.clip((np.asarray(rho, dtype=float) - 0.5) / 0.5, 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


@dataclass(frozen=True)
class RescaleSpec:
    """Blow-up frame: w(X) = eta(P) v(P + r X) / (L r^alpha) on [-extent, extent] x [0, extent]."""

    base: float
    scale: float
    normalization: float = 1.0
    alpha: float = 0.5
    cutoff: Callable[[np.ndarray], np.ndarray] | None = eta_cutoff
    extent: float = 1.0
    spacing: float | None = None

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not self.normalization > 0:
            raise ValueError(f"normalization must be positive, got {self.normalization}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.extent > 0:
            raise ValueError(f"extent must be positive, got {self.extent}")

    def factor(self) -> float:
        weight = 1.0 if self.cutoff is None else float(self.cutoff(abs(self.base)))
        return weight / (self.normalization * self.scale**self.alpha)

    def target_grid(self, source: HalfGrid) -> HalfGrid:
        return HalfGrid.from_spacing(
            self.spacing or source.h, x_min=-self.extent, x_max=self.extent, y_max=self.extent
        )


def rescale(field_: Field, spec: RescaleSpec) -> Field:
    """Sample eta(P) v(P + r X) / (L r^alpha) bilinearly on the target grid.

    Raises:
        ValueError: If a sample point leaves the source grid.
    """
    source = field_.grid
    target = spec.target_grid(source)
    X, Y = target.mesh()
    px = spec.base + spec.scale * X
    py = spec.scale * Y
    outside = (
        (px < source.x_min - DOMAIN_TOL)
        | (px > source.x_max + DOMAIN_TOL)
        | (py > source.y_max + DOMAIN_TOL)
    )
    if np.any(outside):
        raise ValueError("sample out of source domain")
    interpolator = RegularGridInterpolator(
        (source.x, source.y), np.moveaxis(field_.values, 0, -1), method="linear"
    )
    points = np.column_stack(
        [np.clip(px.ravel(), source.x_min, source.x_max), np.clip(py.ravel(), 0.0, source.y_max)]
    )
    samples = interpolator(points).T.reshape((field_.k,) + target.shape)
    return Field(target, spec.factor() * samples)


# Hölder seminorm


@dataclass(frozen=True)
class HolderRegion:
    """Nodes within ``radius`` of ``center``; ``flat_only`` keeps the y = 0 row."""

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    flat_only: bool = False

    def select(self, grid: HalfGrid) -> tuple[np.ndarray, np.ndarray]:
        """Raveled node indices and their coordinates, shape (n,) and (n, 2)."""
        X, Y = grid.mesh()
        inside = (X - self.center[0]) ** 2 + (Y - self.center[1]) ** 2 <= self.radius**2 + 1e-12
        if self.flat_only:
            inside &= Y == 0.0
        index = np.flatnonzero(inside.ravel())
        return index, np.column_stack([X.ravel()[index], Y.ravel()[index]])


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    value: float
    points: tuple[tuple[float, float], tuple[float, float]] | None
    component: int | None
    exact: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "value": self.value,
            "points": None if self.points is None else [list(p) for p in self.points],
            "component": self.component,
            "exact": self.exact,
        }


def _best_pair(
    values: np.ndarray,
    coords: np.ndarray,
    rows: np.ndarray,
    columns: np.ndarray,
    alpha: float,
    threads: int,
) -> tuple[float, int, int, int]:
    """Max quotient over pairs (rows x columns); returns value, component, row, column."""

    def block(start: int) -> tuple[float, int, int, int]:
        chunk = rows[start : start + BLOCK_SIZE]
        distance = np.linalg.norm(coords[chunk, None, :] - coords[None, columns, :], axis=-1)
        valid = distance > 0
        scaled = np.where(valid, distance, 1.0) ** alpha
        best = (-1.0, -1, -1, -1)
        for c in range(values.shape[0]):
            row = values[c]
            jumps = np.abs(row[chunk][:, None] - row[columns][None, :])
            quotient = np.where(valid, jumps / scaled, -1.0)
            flat = int(np.argmax(quotient))
            value = float(quotient.flat[flat])
            if value > best[0]:
                i, j = divmod(flat, columns.size)
                best = (value, c, int(chunk[i]), int(columns[j]))
        return best

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(block, range(0, rows.size, BLOCK_SIZE)))
    best = (-1.0, -1, -1, -1)
    for result in results:
        if result[0] > best[0]:
            best = result
    return best


def holder_seminorm(
    field_: Field,
    alpha: float,
    region: HolderRegion | None = None,
    subsample: int = 1,
    *,
    threads: int = 1,
) -> HolderEstimate:
    """Largest |v_i(X') - v_i(X'')| / |X' - X''|^alpha over node pairs of the region.

    All pairs are searched when the region has at most HOLDER_EXACT_LIMIT nodes and
    ``subsample`` is 1. Otherwise the search runs on a strided subset and is refined
    around the best pair. Ties resolve to the first pair in node order.

    Raises:
        ValueError: If alpha is outside (0, 1), subsample < 1 or the region is empty.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if subsample < 1:
        raise ValueError(f"subsample stride must be at least 1, got {subsample}")
    region = region or HolderRegion()
    index, coords = region.select(field_.grid)
    if index.size == 0:
        raise ValueError("Holder region contains no nodes")
    values = field_.values.reshape(field_.k, -1)[:, index]
    if index.size < 2:
        return HolderEstimate(alpha, 0.0, None, None, True)
    everything = np.arange(index.size)
    exact = subsample == 1 and index.size <= HOLDER_EXACT_LIMIT
    if exact:
        value, component, a, b = _best_pair(values, coords, everything, everything, alpha, threads)
    else:
        stride = subsample if subsample > 1 else HOLDER_STRIDE
        coarse = everything[::stride]
        value, component, a, b = _best_pair(values, coords, coarse, coarse, alpha, threads)
        reach = 2.0 * stride * field_.grid.h
        near = np.flatnonzero(
            (np.linalg.norm(coords - coords[a], axis=1) <= reach)
            | (np.linalg.norm(coords - coords[b], axis=1) <= reach)
        )
        refined = _best_pair(values, coords, near, everything, alpha, threads)
        if refined[0] > value:
            value, component, a, b = refined
    if value <= 0:
        return HolderEstimate(alpha, 0.0, None, None, exact)
    first, second = sorted((a, b))
    return HolderEstimate(
        alpha=alpha,
        value=value,
        points=(tuple(coords[first].tolist()), tuple(coords[second].tolist())),
        component=component,
        exact=exact,
    )


# Segregation and zero set


@dataclass(frozen=True)
class SegregationMass:
    weighted: float
    overlap: float
    region: tuple[float, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "weighted_mass": self.weighted,
            "overlap": self.overlap,
            "region": list(self.region),
        }


def segregation_mass(
    field_: Field, params: SystemParams, region: tuple[float, float] | None = None
) -> SegregationMass:
    """beta times the flat integral of sum_{i<j} a_ij v_i^2 v_j^2, and the unweighted overlap."""
    grid = field_.grid
    lo, hi = region or (grid.x_min, grid.x_max)
    if lo < grid.x_min - DOMAIN_TOL or hi > grid.x_max + DOMAIN_TOL or hi <= lo:
        raise ValueError(f"region [{lo}, {hi}] is not inside the flat boundary")
    xs, trace = FieldSampler(field_).flat_samples(lo, hi)
    squares = trace**2
    overlap = np.zeros(xs.shape)
    for i in range(field_.k):
        for j in range(i + 1, field_.k):
            overlap = overlap + squares[i] * squares[j]
    return SegregationMass(
        weighted=params.beta * flat_integral(xs, params.interaction_density(trace)),
        overlap=flat_integral(xs, overlap),
        region=(float(lo), float(hi)),
    )


@dataclass(frozen=True, eq=False)
class ZeroSet:
    """Flat-boundary nodes where every component is below ``tol``."""

    x: np.ndarray
    indices: np.ndarray
    tol: float
    node_x: np.ndarray = field(repr=False)

    @property
    def empty(self) -> bool:
        return self.indices.size == 0

    def clusters(self) -> list[tuple[float, float]]:
        """Runs of consecutive zero nodes as (x_first, x_last)."""
        if self.empty:
            return []
        breaks = np.flatnonzero(np.diff(self.indices) > 1)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [self.indices.size - 1]])
        return [(float(self.x[s]), float(self.x[e])) for s, e in zip(starts, ends, strict=True)]

    def distance(self, x0: float) -> float:
        if self.empty:
            return math.inf
        return float(np.min(np.abs(self.x - x0)))

    def distances(self) -> np.ndarray:
        """Distance from every flat node to the zero set."""
        if self.empty:
            return np.full(self.node_x.shape, np.inf)
        return np.min(np.abs(self.node_x[:, None] - self.x[None, :]), axis=1)


def zero_set(field_: Field, tol: float | None = None) -> ZeroSet:
    """Nodes with max_i |v_i(x, 0)| <= tol.

    The default tolerance is 10 h times the 95th percentile of |d/dx trace|, floored at
    1e-12; the percentile keeps square-root singularities from inflating it.
    """
    grid = field_.grid
    trace = field_.trace()
    if tol is None:
        slope = np.abs(np.gradient(trace, grid.h, axis=1))
        tol = max(
            ZERO_SET_FACTOR * grid.h * float(np.percentile(slope, ZERO_SET_PERCENTILE)),
            ZERO_SET_FLOOR,
        )
    elif not tol > 0:
        raise ValueError(f"zero-set tolerance must be positive, got {tol}")
    indices = np.flatnonzero(np.max(np.abs(trace), axis=0) <= tol)
    return ZeroSet(x=grid.x[indices], indices=indices, tol=float(tol), node_x=grid.x)


# Growth exponent


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    slope: float
    intercept: float
    residual: float
    count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "nu_hat": self.exponent,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "count": self.count,
        }


def fit_growth_exponent(
    radii: Sequence[float],
    H: Sequence[float],
    r_window: tuple[float, float] | None = None,
) -> GrowthFit:
    """Least-squares slope of log H against log r, halved.

    Raises:
        ValueError: If the window holds fewer than three radii or a nonpositive H.
    """
    radii = np.asarray(radii, dtype=float)
    H = np.asarray(H, dtype=float)
    if radii.shape != H.shape:
        raise ValueError("radii and H must have the same length")
    keep = np.ones(radii.shape, dtype=bool)
    if r_window is not None:
        keep = (radii >= r_window[0] - 1e-12) & (radii <= r_window[1] + 1e-12)
    r, h = radii[keep], H[keep]
    if r.size < 3:
        raise ValueError(f"growth fit needs at least 3 radii in the window, got {r.size}")
    if np.any(~np.isfinite(h)) or np.any(h <= 0):
        raise ValueError("H must be positive on the fit window")
    log_r, log_h = np.log(r), np.log(h)
    slope, intercept = np.polyfit(log_r, log_h, 1)
    residual = float(np.sqrt(np.mean((log_h - (slope * log_r + intercept)) ** 2)))
    return GrowthFit(
        exponent=float(slope) / 2.0,
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        count=int(r.size),
    )


# Decay comparison


@dataclass(frozen=True)
class DecayReport:
    M: float
    delta: float
    slack: float
    bound_constant: float
    sup_flat: float
    inf_flat: float
    sup_arc: float
    inf_arc: float

    @property
    def upper_bound(self) -> float:
        return self.bound_constant * (1.0 + self.delta) / self.M * self.sup_arc

    @property
    def literal_upper_bound(self) -> float:
        return (1.0 + self.delta) / self.M * self.sup_arc

    @property
    def lower_bound(self) -> float:
        return self.inf_arc / (1.0 + self.M)

    @property
    def upper_margin(self) -> float:
        return self.upper_bound * (1.0 + self.slack) - self.sup_flat

    @property
    def literal_margin(self) -> float:
        return self.literal_upper_bound * (1.0 + self.slack) - self.sup_flat

    @property
    def lower_margin(self) -> float:
        return self.inf_flat - self.lower_bound * (1.0 - self.slack)

    @property
    def passed(self) -> bool:
        return self.upper_margin >= 0 and self.lower_margin >= 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "M": self.M,
            "delta": self.delta,
            "slack": self.slack,
            "bound_constant": self.bound_constant,
            "sup_flat": self.sup_flat,
            "inf_flat": self.inf_flat,
            "sup_arc": self.sup_arc,
            "inf_arc": self.inf_arc,
            "upper_bound": self.upper_bound,
            "upper_margin": self.upper_margin,
            "literal_upper_bound": self.literal_upper_bound,
            "literal_passed": self.literal_margin >= 0,
            "lower_bound": self.lower_bound,
            "lower_margin": self.lower_margin,
            "passed": self.passed,
        }


def solve_decay_problem(M: float, delta: float = 0.0, h: float = 1.0 / 200.0) -> Field:
    """Harmonic v on the half-box with dv/dnu + M v = delta on y = 0 and v = 1 elsewhere."""
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    grid = HalfGrid.from_spacing(h)
    return solve_linear_bvp(grid, DirichletData.constant(1.0), M, delta)


def decay_check(
    field_: Field,
    M: float,
    *,
    delta: float = 0.0,
    slack: float = DECAY_SLACK,
    bound_constant: float = DECAY_BOUND_CONSTANT,
) -> DecayReport:
    """Compare flat values on |x| <= 1/2 with the unit arc.

    The supremum is checked against K(1+delta)/M and the infimum against 1/(1+M).
    """
    if field_.k != 1:
        raise ValueError(f"decay check needs a single-component field, got {field_.k}")
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    grid = field_.grid
    if not grid.contains_half_ball(0.0, 1.0):
        raise ValueError("decay check needs the unit half-ball inside the grid")
    if float(np.min(field_.values)) < -DOMAIN_TOL:
        logger.warning("blowup: decay check on a field with negative values")
    trace = field_.trace()[0]
    inner = trace[np.abs(grid.x) <= 0.5 + 1e-12]
    arc = FieldSampler(field_).arc(0.0, 1.0, ARC_SAMPLES).values[0]
    report = DecayReport(
        M=float(M),
        delta=float(delta),
        slack=float(slack),
        bound_constant=float(bound_constant),
        sup_flat=float(np.max(inner)),
        inf_flat=float(np.min(inner)),
        sup_arc=float(np.max(arc)),
        inf_arc=float(np.min(arc)),
    )
    logger.info(
        "blowup: decay M=%g sup_flat=%.6f bound=%.6f literal=%.6f",
        M,
        report.sup_flat,
        report.upper_bound,
        report.literal_upper_bound,
    )
    return report


__all__ = [
    "DecayReport",
    "GrowthFit",
    "HolderEstimate",
    "HolderRegion",
    "RescaleSpec",
    "SegregationMass",
    "ZeroSet",
    "decay_check",
    "eta_cutoff",
    "fit_growth_exponent",
    "holder_seminorm",
    "rescale",
    "segregation_mass",
    "solve_decay_problem",
]
