"""Radial monotonicity quantities about a flat-boundary center.

ACF functionals, the Almgren frequency (segregated, coexistence and limiting forms),
Pohozaev residuals on half-balls and the Morrey quotient, all computed from a planar
:class:`Field` with the quadrature of :mod:`src.quadrature`.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .blowup import zero_set
from .constants import (
    ARC_SAMPLES,
    DEFAULT_NU_PRIME,
    EPS_ASSUMPTION,
    H_FLOOR,
    KERNEL_EPS_FACTOR,
    LIMITING_C_FACTOR,
    MONOTONE_RTOL,
    SEGREGATION_TOL,
)
from .exponents import gamma
from .grid import Field, HalfGrid
from .quadrature import (
    FieldSampler,
    ball_mask,
    cell_centers,
    flat_integral,
    half_ball_mask,
    validate_radii,
)
from .reactions import Reaction, SystemParams
from .spectral import nu_acf_estimate

logger = logging.getLogger(__name__)

PLANAR_DIMENSION = 1
SINGULAR_CELL_RADIUS = 1.0
LOG_DERIVATIVE_TOL = 2e-2


@dataclass(frozen=True)
class Kernel:
    """Regularised fundamental-solution multiple Gamma_eps; ``eps = 0`` is |X|^(1-N)."""

    dimension: int = PLANAR_DIMENSION
    eps: float = 0.0

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError(f"kernel dimension must be positive, got {self.dimension}")
        if not self.eps >= 0:
            raise ValueError(f"kernel eps must be nonnegative, got {self.eps}")

    @classmethod
    def for_grid(cls, grid: HalfGrid, *, factor: float = KERNEL_EPS_FACTOR) -> Kernel:
        return cls(dimension=PLANAR_DIMENSION, eps=factor * grid.h)

    @property
    def exact(self) -> bool:
        return self.eps == 0

    def inner(self, s: np.ndarray) -> np.ndarray:
        n = self.dimension
        return 0.5 * (n + 1) - 0.5 * (n - 1) * np.asarray(s, dtype=float) ** 2

    def outer(self, s: np.ndarray) -> np.ndarray:
        return np.asarray(s, dtype=float) ** (1 - self.dimension)

    def inner_derivative(self, s: np.ndarray) -> np.ndarray:
        return -(self.dimension - 1) * np.asarray(s, dtype=float)

    def outer_derivative(self, s: np.ndarray) -> np.ndarray:
        return (1 - self.dimension) * np.asarray(s, dtype=float) ** (-self.dimension)

    def unit(self, s: np.ndarray) -> np.ndarray:
        """Gamma_1 evaluated at |X| = s."""
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(s < 1.0, self.inner(s), self.outer(np.maximum(s, 1.0)))

    def __call__(self, distance: np.ndarray) -> np.ndarray:
        distance = np.asarray(distance, dtype=float)
        if self.exact:
            with np.errstate(divide="ignore"):
                return np.where(distance > 0, np.abs(distance) ** (1 - self.dimension), np.inf)
        return self.unit(distance / self.eps) * self.eps ** (1 - self.dimension)

    def to_dict(self) -> dict[str, Any]:
        return {"dimension": self.dimension, "eps": self.eps}


def _require_planar(kernel: Kernel) -> None:
    if kernel.dimension != PLANAR_DIMENSION:
        raise ValueError(f"planar fields need a dimension-1 kernel, got {kernel.dimension}")


def _single(field_: Field, name: str) -> Field:
    if field_.k != 1:
        raise ValueError(f"{name} must be a single-component field, got {field_.k} components")
    return field_


def _default_nu() -> float:
    return nu_acf_estimate(PLANAR_DIMENSION).value


class _Context:
    """Shared per-field state for the radius loops."""

    def __init__(self, field_: Field, x0: float, kernel: Kernel | None = None):
        self.field = field_
        self.grid = field_.grid
        self.x0 = float(x0)
        self.sampler = FieldSampler(field_)
        self.kernel = kernel or Kernel.for_grid(self.grid)
        _require_planar(self.kernel)
        XC, YC = cell_centers(self.grid)
        self.distance = np.hypot(XC - self.x0, YC)

    def mask(self, r: float, kernel: Kernel) -> np.ndarray:
        mask = half_ball_mask(self.grid, self.x0, r)
        if kernel.exact:
            mask &= self.distance >= SINGULAR_CELL_RADIUS * self.grid.h
        return mask

    def weighted_energy(self, r: float, kernel: Kernel | None = None) -> np.ndarray:
        """Per-component integral of |grad v_i|^2 Gamma over B_r+, shape (k,)."""
        kernel = kernel or self.kernel
        weights = kernel(self.distance)
        mask = self.mask(r, kernel)
        energy = self.sampler.cell_energy * np.where(mask, weights, 0.0)
        return np.sum(energy, axis=(1, 2)) * self.grid.h**2

    def energy(self, r: float) -> float:
        density = np.sum(self.sampler.cell_energy, axis=0)
        return self.sampler.volume_integral(density, half_ball_mask(self.grid, self.x0, r))

    def flat(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        return self.sampler.flat_samples(self.x0 - r, self.x0 + r)

    def arc_mass(self, r: float) -> float:
        arc = self.sampler.arc(self.x0, r, ARC_SAMPLES)
        return arc.integrate(np.sum(arc.values**2, axis=0))


def _check_segregated(trace: np.ndarray, tol: float, label: str) -> float:
    worst = 0.0
    for i in range(trace.shape[0]):
        for j in range(i + 1, trace.shape[0]):
            worst = max(worst, float(np.max(np.abs(trace[i] * trace[j]))))
    scale = max(1.0, float(np.max(np.abs(trace))) ** 2)
    if worst > tol * scale:
        logger.warning(
            "monotonicity: %s inputs not segregated (max |v_i v_j| = %.3e)", label, worst
        )
    return worst


@dataclass(frozen=True, eq=False)
class AcfSeries:
    """Phi per radius together with its factors (one row per function)."""

    radii: np.ndarray
    phi: np.ndarray
    factors: np.ndarray
    exponent: float

    @property
    def above_unit(self) -> np.ndarray:
        """Radii beyond 1, where the perturbed formula is expected to be monotone."""
        return self.radii > 1.0

    def ratios(self) -> np.ndarray:
        return self.phi / self.phi[0] if self.phi[0] != 0 else np.full(self.phi.shape, np.nan)


def acf_segregated(
    v1: Field,
    v2: Field,
    x0: float,
    radii: Sequence[float],
    kernel: Kernel | None = None,
    *,
    nu: float | None = None,
    tol: float = SEGREGATION_TOL,
) -> AcfSeries:
    """Product over i of r^(-2 nu) times the kernel-weighted Dirichlet energy of v_i on B_r+."""
    _single(v1, "v1")
    _single(v2, "v2")
    if v1.grid != v2.grid:
        raise ValueError("v1 and v2 live on different grids")
    nu = _default_nu() if nu is None else float(nu)
    radii = validate_radii(v1.grid, x0, radii)
    pair = Field.stack([v1, v2])
    _check_segregated(pair.trace(), tol, "acf_segregated")
    context = _Context(pair, x0, kernel)
    factors = np.array([context.weighted_energy(r) * r ** (-2.0 * nu) for r in radii]).T
    return AcfSeries(radii=radii, phi=np.prod(factors, axis=0), factors=factors, exponent=nu)


def acf_perturbed(
    v1: Field,
    v2: Field,
    x0: float,
    radii: Sequence[float],
    kernel: Kernel | None = None,
    *,
    nu_prime: float = DEFAULT_NU_PRIME,
    coupling: float = 1.0,
) -> AcfSeries:
    """Phi_1 Phi_2 under the Gamma_1 kernel.

    Phi_i = r^(-2 nu') (volume energy + coupling * flat v_1^2 v_2^2).

    Raises:
        ValueError: If ``nu_prime`` is not in (0, nu_ACF) or the radii leave the grid.
    """
    _single(v1, "v1")
    _single(v2, "v2")
    if v1.grid != v2.grid:
        raise ValueError("v1 and v2 live on different grids")
    nu = _default_nu()
    if not 0 < nu_prime < nu:
        raise ValueError(f"nu_prime must lie in (0, {nu}), got {nu_prime}")
    kernel = kernel or Kernel(dimension=PLANAR_DIMENSION, eps=1.0)
    radii = validate_radii(v1.grid, x0, radii)
    context = _Context(Field.stack([v1, v2]), x0, kernel)
    rows = []
    for r in radii:
        energy = context.weighted_energy(r)
        xs, trace = context.flat(r)
        boundary = coupling * flat_integral(xs, trace[0] ** 2 * trace[1] ** 2 * kernel(xs - x0))
        rows.append((energy + boundary) * r ** (-2.0 * nu_prime))
    factors = np.array(rows).T
    return AcfSeries(radii=radii, phi=np.prod(factors, axis=0), factors=factors, exponent=nu_prime)


def acf_boundary(
    v: Field,
    radii: Sequence[float],
    *,
    x0: float = 0.0,
    kernel: Kernel | None = None,
    tol: float = SEGREGATION_TOL,
    check: bool = True,
) -> AcfSeries:
    """(1/r) times the integral of |grad v|^2 / |X|^(N-1) over B_r+, for v vanishing on x <= x0."""
    _single(v, "v")
    radii = validate_radii(v.grid, x0, radii)
    if check:
        trace = v.trace()[0]
        left = np.abs(trace[v.grid.x <= x0 + 1e-12])
        worst = float(np.max(left)) if left.size else 0.0
        if worst > tol * max(1.0, float(np.max(np.abs(trace)))):
            logger.warning("monotonicity: acf_boundary trace nonzero on x <= x0 (max %.3e)", worst)
    context = _Context(v, x0, kernel)
    factors = np.array([context.weighted_energy(r) / r for r in radii]).T
    return AcfSeries(radii=radii, phi=factors[0], factors=factors, exponent=0.5)


@dataclass(frozen=True, eq=False)
class AlmgrenSeries:
    """E, H and N per radius; N is NaN where H falls below the floor."""

    radii: np.ndarray
    E: np.ndarray
    H: np.ndarray
    N: np.ndarray
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.N)

    def log_derivative(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Midpoint radii, finite-difference slope of log H and 2 N / r at the midpoints."""
        r_mid = 0.5 * (self.radii[1:] + self.radii[:-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.diff(np.log(self.H)) / np.diff(self.radii)
        predicted = (self.N[1:] + self.N[:-1]) / r_mid
        return r_mid, slope, predicted

    def log_derivative_gap(self) -> np.ndarray:
        _, slope, predicted = self.log_derivative()
        return slope - predicted


def _frequency(E: np.ndarray, H: np.ndarray, offset: float = 0.0) -> np.ndarray:
    undefined = H < H_FLOOR
    if np.any(undefined):
        logger.warning("monotonicity: H below %.0e at %d radius(es)", H_FLOOR, int(undefined.sum()))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(undefined, np.nan, E / np.where(undefined, 1.0, H) + offset)


def _energy_height(context: _Context, r: float) -> tuple[float, float]:
    n = PLANAR_DIMENSION
    return r ** (1 - n) * context.energy(r), r ** (-n) * context.arc_mass(r)


def almgren_segregated(
    field_: Field,
    x0: float,
    radii: Sequence[float],
    *,
    tol: float = SEGREGATION_TOL,
) -> AlmgrenSeries:
    """E = r^(1-N) int sum |grad v_i|^2, H = r^(-N) int_arc sum v_i^2, N = E / H."""
    radii = validate_radii(field_.grid, x0, radii)
    _check_segregated(field_.trace(), tol, "almgren_segregated")
    context = _Context(field_, x0)
    E, H = np.array([_energy_height(context, r) for r in radii]).T
    return AlmgrenSeries(radii=radii, E=E, H=H, N=_frequency(E, H))


def almgren_coexistence(
    field_: Field,
    params: SystemParams,
    x0: float,
    radii: Sequence[float],
    *,
    tol: float = LOG_DERIVATIVE_TOL,
) -> AlmgrenSeries:
    """Frequency of the coexistence class; raw beta is absorbed by rescaling v to sqrt(beta) v.

    E adds r^(1-N) times the flat integral of sum_{i<j} a_ij v_i^2 v_j^2. The extras carry
    the log-derivative gap d/dr log H - 2N/r per radius interval, which should be >= -tol.
    """
    if field_.k != params.k:
        raise ValueError(f"field has {field_.k} components, params expect {params.k}")
    radii = validate_radii(field_.grid, x0, radii)
    scaled = field_.scaled(math.sqrt(params.beta)) if params.beta > 0 else field_
    context = _Context(scaled, x0)
    n = PLANAR_DIMENSION
    E, H = [], []
    for r in radii:
        energy, height = _energy_height(context, r)
        xs, trace = context.flat(r)
        interaction = flat_integral(xs, params.interaction_density(trace))
        E.append(energy + r ** (1 - n) * interaction)
        H.append(height)
    E_arr, H_arr = np.array(E), np.array(H)
    series = AlmgrenSeries(radii=radii, E=E_arr, H=H_arr, N=_frequency(E_arr, H_arr))
    gap = series.log_derivative_gap()
    series.extras["log_derivative_gap"] = gap
    if np.any(gap[np.isfinite(gap)] < -tol * np.maximum(1.0, np.abs(series.log_derivative()[2]))):
        logger.warning(
            "monotonicity: log-derivative inequality violated (min gap %.3e)", np.nanmin(gap)
        )
    return series


def limiting_exponent(dimension: int = PLANAR_DIMENSION, eps: float = EPS_ASSUMPTION) -> float:
    """p = min(2 + eps, 2N / (N - 1)); the second bound is infinite for N = 1."""
    cap = math.inf if dimension == 1 else 2.0 * dimension / (dimension - 1)
    return min(2.0 + eps, cap)


def default_limiting_constant(field_: Field, reaction: Reaction) -> float:
    if reaction.is_zero():
        return 0.0
    values = field_.values
    bound = reaction.lipschitz_bound(float(values.min()), float(values.max()), field_.k)
    return LIMITING_C_FACTOR * bound


def almgren_limiting(
    field_: Field,
    reaction: Reaction,
    x0: float,
    radii: Sequence[float],
    *,
    eps: float = EPS_ASSUMPTION,
    constant: float | None = None,
) -> AlmgrenSeries:
    """N = E / H + 1 with E = r^(1-N)(int sum |grad v_i|^2 - int_flat sum f_i(v_i) v_i).

    Extras: ``psi`` = (r^(-N) int_flat sum |v_i|^p)^(1 - 2/p) and ``compensated`` =
    exp(C r (1 + psi)) N, with C defaulting to ten times the Lipschitz bound of f on the
    field range.
    """
    radii = validate_radii(field_.grid, x0, radii)
    zeros = zero_set(field_)
    if zeros.distance(x0) > field_.grid.h:
        logger.warning("monotonicity: center %.6g is not in the zero set", x0)
    context = _Context(field_, x0)
    n = PLANAR_DIMENSION
    p = limiting_exponent(n, eps)
    C = default_limiting_constant(field_, reaction) if constant is None else float(constant)
    E, H, psi = [], [], []
    for r in radii:
        energy, height = _energy_height(context, r)
        xs, trace = context.flat(r)
        work = flat_integral(xs, np.sum(reaction.values(trace) * trace, axis=0))
        E.append(energy - r ** (1 - n) * work)
        H.append(height)
        moment = r ** (-n) * flat_integral(xs, np.sum(np.abs(trace) ** p, axis=0))
        psi.append(moment ** (1.0 - 2.0 / p))
    E_arr, H_arr, psi_arr = np.array(E), np.array(H), np.array(psi)
    N = _frequency(E_arr, H_arr, offset=1.0)
    compensated = np.exp(C * radii * (1.0 + psi_arr)) * N
    return AlmgrenSeries(
        radii=radii,
        E=E_arr,
        H=H_arr,
        N=N,
        extras={"psi": psi_arr, "compensated": compensated, "constant": np.full(radii.shape, C)},
    )


@dataclass(frozen=True)
class PohozaevTerms:
    terms: dict[str, float]
    rhs: float

    @property
    def lhs(self) -> float:
        return float(sum(self.terms.values()))

    @property
    def residual(self) -> float:
        """(lhs - rhs) over the largest term magnitude; 0 when every term vanishes."""
        scale = max([abs(t) for t in self.terms.values()] + [abs(self.rhs)])
        if scale < H_FLOOR:
            return 0.0
        return (self.lhs - self.rhs) / scale


def _pohozaev_terms(context: _Context, params: SystemParams, r: float) -> PohozaevTerms:
    n = PLANAR_DIMENSION
    x0 = context.x0
    arc = context.sampler.arc(x0, r, ARC_SAMPLES)
    gradient_sq = np.sum(arc.gradient**2, axis=(0, 1))
    normal_sq = np.sum(arc.normal_derivative**2, axis=0)
    xs, trace = context.flat(r)
    ends = context.sampler.endpoint_values([x0 - r, x0 + r])
    reaction = params.reaction
    terms = {
        "volume": (1 - n) * context.energy(r),
        "surface": r * arc.integrate(gradient_sq),
        "flat_reaction": 2 * n * flat_integral(xs, np.sum(reaction.primitives(trace), axis=0)),
        "flat_interaction": -n * params.beta * flat_integral(xs, params.interaction_density(trace)),
        "sphere_reaction": -2.0 * r * float(np.sum(reaction.primitives(ends))),
        "sphere_interaction": r * params.beta * float(np.sum(params.interaction_density(ends))),
    }
    return PohozaevTerms(terms=terms, rhs=2.0 * r * arc.integrate(normal_sq))


def pohozaev_terms(field_: Field, params: SystemParams, x0: float, r: float) -> PohozaevTerms:
    """Every term of the half-ball Pohozaev identity at one radius."""
    radius = validate_radii(field_.grid, x0, [r])[0]
    return _pohozaev_terms(_Context(field_, x0), params, radius)


def pohozaev_residual_sphere(
    field_: Field, params: SystemParams, x0: float, radii: Sequence[float]
) -> np.ndarray:
    """Normalised residual of the half-ball Pohozaev identity per radius."""
    if field_.k != params.k:
        raise ValueError(f"field has {field_.k} components, params expect {params.k}")
    radii = validate_radii(field_.grid, x0, radii)
    context = _Context(field_, x0)
    return np.array([_pohozaev_terms(context, params, r).residual for r in radii])


def _check_ball(grid: HalfGrid, center: tuple[float, float], r: float) -> None:
    cx, cy = center
    if cy < 0:
        raise ValueError(f"center height must be nonnegative, got {cy}")
    tol = 1e-12
    inside = (
        cx - r >= grid.x_min - tol and cx + r <= grid.x_max + tol and cy + r <= grid.y_max + tol
    )
    if not inside:
        raise ValueError(f"radius {r} exceeds domain around center {center}")


def morrey_phi(field_: Field, center: tuple[float, float], radii: Sequence[float]) -> np.ndarray:
    """r^(-N) times the integral of sum |grad v_i|^2 over B_r(X) in the upper half-plane."""
    sampler = FieldSampler(field_)
    density = np.sum(sampler.cell_energy, axis=0)
    values = []
    for r in np.atleast_1d(np.asarray(radii, dtype=float)):
        _check_ball(field_.grid, center, r)
        mask = ball_mask(field_.grid, center, r)
        values.append(sampler.volume_integral(density, mask) / r**PLANAR_DIMENSION)
    return np.array(values)


@dataclass(frozen=True, eq=False)
class MorreySweep:
    centers: np.ndarray
    radii: np.ndarray
    values: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(self.values))

    @property
    def argmax(self) -> tuple[tuple[float, float], float]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return (float(self.centers[i, 0]), float(self.centers[i, 1])), float(self.radii[j])


def morrey_sweep(
    field_: Field,
    centers: Iterable[tuple[float, float]],
    radii: Sequence[float],
    *,
    threads: int = 1,
) -> MorreySweep:
    """Morrey quotient over every center and radius; ``sup`` bounds the Hölder-1/2 seminorm."""
    centers = np.array([tuple(c) for c in centers], dtype=float)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if centers.size == 0:
        raise ValueError("center list is empty")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda c: morrey_phi(field_, (c[0], c[1]), radii), centers))
    return MorreySweep(centers=centers, radii=radii, values=np.array(rows))


def monotone_onset(
    radii: Sequence[float], values: Sequence[float], rel_tol: float = MONOTONE_RTOL
) -> float | None:
    """Smallest radius from which ``values`` never drops by more than ``rel_tol`` (relative)."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return None
    onset = values.size - 1
    for j in range(values.size - 2, -1, -1):
        a, b = values[j], values[j + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            break
        if b < a - rel_tol * max(abs(a), H_FLOOR):
            break
        onset = j
    return float(radii[onset])


@dataclass(frozen=True)
class Dip:
    r_prev: float
    r: float
    drop: float


def find_dips(
    radii: Sequence[float], values: Sequence[float], rel_tol: float = MONOTONE_RTOL
) -> list[Dip]:
    """Adjacent radius pairs where the value falls by more than ``rel_tol`` (relative)."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    dips = []
    for j in range(values.size - 1):
        a, b = values[j], values[j + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        drop = (a - b) / max(abs(a), H_FLOOR)
        if drop > rel_tol:
            dips.append(Dip(float(radii[j]), float(radii[j + 1]), float(drop)))
    return dips


BASE_COLUMNS = (
    "r",
    "E",
    "H",
    "N",
    "Phi_seg",
    "Phi_pert",
    "Phi_boundary",
    "Phi_morrey",
    "poho_res",
    "psi",
)


@dataclass(frozen=True, eq=False)
class RadialScan:
    """Per-radius monotonicity records about one center."""

    x0: float
    radii: np.ndarray
    E: np.ndarray
    H: np.ndarray
    N: np.ndarray
    phi_seg: dict[tuple[int, int], np.ndarray]
    phi_pert: dict[tuple[int, int], np.ndarray]
    phi_boundary: np.ndarray
    phi_morrey: np.ndarray
    poho_residual: np.ndarray
    psi: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.phi_seg)

    def _pair_column(self, table: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
        if not table:
            return np.full(self.radii.shape, np.nan)
        return table[self.pairs[0]]

    @property
    def columns(self) -> list[str]:
        extra = []
        for i, j in self.pairs[1:]:
            extra += [f"Phi_seg_{i}_{j}", f"Phi_pert_{i}_{j}"]
        return list(BASE_COLUMNS) + extra

    def rows(self) -> list[list[float]]:
        columns = [
            self.radii,
            self.E,
            self.H,
            self.N,
            self._pair_column(self.phi_seg),
            self._pair_column(self.phi_pert),
            self.phi_boundary,
            self.phi_morrey,
            self.poho_residual,
            self.psi,
        ]
        for pair in self.pairs[1:]:
            columns += [self.phi_seg[pair], self.phi_pert[pair]]
        return [[float(c[j]) for c in columns] for j in range(self.radii.size)]

    def column(self, name: str) -> np.ndarray:
        index = self.columns.index(name)
        return np.array([row[index] for row in self.rows()])


def radial_scan(
    field_: Field,
    params: SystemParams,
    x0: float,
    radii: Sequence[float],
    *,
    kernel: Kernel | None = None,
    nu: float | None = None,
    nu_prime: float = DEFAULT_NU_PRIME,
    eps: float = EPS_ASSUMPTION,
    threads: int = 1,
) -> RadialScan:
    """Every monotonicity quantity at each radius; radii are processed in parallel.

    Pair functionals use sqrt(beta)-rescaled components; the frequency is the coexistence
    form, which reduces to the segregated one when traces are disjoint.
    """
    if field_.k != params.k:
        raise ValueError(f"field has {field_.k} components, params expect {params.k}")
    grid = field_.grid
    radii = validate_radii(grid, x0, radii)
    nu = _default_nu() if nu is None else float(nu)
    kernel = kernel or Kernel.for_grid(grid)
    unit_kernel = Kernel(dimension=PLANAR_DIMENSION, eps=1.0)
    scaled = field_.scaled(math.sqrt(params.beta)) if params.beta > 0 else field_
    context = _Context(scaled, x0, kernel)
    raw = _Context(field_, x0, kernel)
    pairs = [(i, j) for i in range(field_.k) for j in range(i + 1, field_.k)]
    n = PLANAR_DIMENSION
    p = limiting_exponent(n, eps)

    def record(r: float) -> dict[str, Any]:
        energy, height = _energy_height(context, r)
        xs, trace = context.flat(r)
        E = energy + r ** (1 - n) * flat_integral(xs, params.interaction_density(trace))
        weighted = context.weighted_energy(r)
        unit = context.weighted_energy(r, unit_kernel)
        seg, pert = {}, {}
        for i, j in pairs:
            seg[(i, j)] = weighted[i] * weighted[j] * r ** (-4.0 * nu)
            cross = flat_integral(
                xs, params.a[i, j] * trace[i] ** 2 * trace[j] ** 2 * unit_kernel(xs - x0)
            )
            pert[(i, j)] = (unit[i] + cross) * (unit[j] + cross) * r ** (-4.0 * nu_prime)
        raw_xs, raw_trace = raw.flat(r)
        moment = r ** (-n) * flat_integral(raw_xs, np.sum(np.abs(raw_trace) ** p, axis=0))
        return {
            "E": E,
            "H": height,
            "seg": seg,
            "pert": pert,
            "boundary": raw.weighted_energy(r)[0] / r,
            "morrey": raw.energy(r) / r**n,
            "poho": _pohozaev_terms(raw, params, r).residual,
            "psi": moment ** (1.0 - 2.0 / p),
        }

    with ThreadPoolExecutor(max_workers=threads) as pool:
        records = list(pool.map(record, radii))

    E = np.array([rec["E"] for rec in records])
    H = np.array([rec["H"] for rec in records])
    scan = RadialScan(
        x0=float(x0),
        radii=radii,
        E=E,
        H=H,
        N=_frequency(E, H),
        phi_seg={pair: np.array([rec["seg"][pair] for rec in records]) for pair in pairs},
        phi_pert={pair: np.array([rec["pert"][pair] for rec in records]) for pair in pairs},
        phi_boundary=np.array([rec["boundary"] for rec in records]),
        phi_morrey=np.array([rec["morrey"] for rec in records]),
        poho_residual=np.array([rec["poho"] for rec in records]),
        psi=np.array([rec["psi"] for rec in records]),
        metadata={
            "center": float(x0),
            "nu": nu,
            "nu_prime": nu_prime,
            "kernel": kernel.to_dict(),
            "limiting_p": p,
            "grid": grid.to_dict(),
            "params": params.to_dict(),
        },
    )
    logger.info("monotonicity: scanned %d radii about x0=%.6g", radii.size, x0)
    return scan


__all__ = [
    "AcfSeries",
    "AlmgrenSeries",
    "BASE_COLUMNS",
    "Dip",
    "Kernel",
    "MorreySweep",
    "PohozaevTerms",
    "RadialScan",
    "acf_boundary",
    "acf_perturbed",
    "acf_segregated",
    "almgren_coexistence",
    "almgren_limiting",
    "almgren_segregated",
    "default_limiting_constant",
    "find_dips",
    "gamma",
    "limiting_exponent",
    "monotone_onset",
    "morrey_phi",
    "morrey_sweep",
    "pohozaev_residual_sphere",
    "pohozaev_terms",
    "radial_scan",
]
