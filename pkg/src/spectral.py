"""First eigenvalue of the hemisphere with a vanishing trace outside an equatorial cap.

N = 1 uses closed forms on the half circle. N = 2 discretises the upper hemisphere on a
latitude-longitude grid (pole lumped into one node) with finite-volume weights, imposes
the constraint on equator nodes and runs shifted inverse power iteration.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .constants import (
    SPECTRAL_MAX_ITER,
    SPECTRAL_N_AZIMUTH,
    SPECTRAL_N_POLAR,
    SPECTRAL_TOLERANCE,
    THETA_GRID_POINTS,
)
from .exponents import gamma
from .extension_solver import SolverError

logger = logging.getLogger(__name__)

ANGLE_TOL = 1e-9
MIN_CONSTRAINED_NODES = 3
SHIFT = -1.0
SIGN_TOL = 1e-8
CAVEAT = (
    "minimum over cap partitions only; an upper bound for the cap-restricted infimum, "
    "not for arbitrary partitions"
)


class RegionKind(str, Enum):
    CAP = "cap"
    FULL = "full"
    EMPTY = "empty"


@dataclass(frozen=True)
class SpectralProblem:
    """Constraint region: the open equatorial cap of angular radius ``theta`` about e_1."""

    dimension: int
    theta: float = math.pi / 2
    region: RegionKind = RegionKind.CAP
    n_azimuth: int = SPECTRAL_N_AZIMUTH
    n_polar: int = SPECTRAL_N_POLAR

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not -ANGLE_TOL <= self.theta <= math.pi + ANGLE_TOL:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.n_azimuth < 8 or self.n_azimuth % 2 or self.n_polar < 4:
            raise ValueError("mesh needs an even n_azimuth >= 8 and n_polar >= 4")
        region = RegionKind(self.region)
        if region is RegionKind.CAP and self.theta <= ANGLE_TOL:
            region = RegionKind.EMPTY
        elif region is RegionKind.CAP and self.theta >= math.pi - ANGLE_TOL:
            region = RegionKind.FULL
        object.__setattr__(self, "region", region)

    @classmethod
    def cap(cls, dimension: int, theta: float, **mesh: int) -> SpectralProblem:
        return cls(dimension=dimension, theta=theta, **mesh)

    @classmethod
    def full(cls, dimension: int, **mesh: int) -> SpectralProblem:
        return cls(dimension=dimension, theta=math.pi, region=RegionKind.FULL, **mesh)

    @classmethod
    def empty(cls, dimension: int, **mesh: int) -> SpectralProblem:
        return cls(dimension=dimension, theta=0.0, region=RegionKind.EMPTY, **mesh)

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.n_azimuth

    def azimuth_distance(self) -> np.ndarray:
        """Integer distance (in azimuth steps) of each equator node from the cap centre."""
        k = np.arange(self.n_azimuth)
        return np.minimum(k, self.n_azimuth - k)

    def free_equator(self, *, include_edge: bool = False) -> np.ndarray:
        """Equator nodes inside the cap; ``include_edge`` also frees nodes exactly on its edge."""
        if self.region is RegionKind.FULL:
            return np.ones(self.n_azimuth, dtype=bool)
        if self.region is RegionKind.EMPTY:
            return np.zeros(self.n_azimuth, dtype=bool)
        units = self.theta / self.step
        distance = self.azimuth_distance()
        if include_edge:
            return distance <= units + ANGLE_TOL
        return distance < units - ANGLE_TOL

    def edge_aligned(self) -> bool:
        units = self.theta / self.step
        return self.region is RegionKind.CAP and abs(units - round(units)) <= ANGLE_TOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension,
            "theta": self.theta,
            "region": self.region.value,
            "n_azimuth": self.n_azimuth,
            "n_polar": self.n_polar,
        }


@dataclass(frozen=True, eq=False)
class EigenResult:
    problem: SpectralProblem
    lambda1: float
    gamma: float
    eigenfunction: np.ndarray
    residual: float
    iterations: int
    one_signed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.problem.to_dict(),
            "lambda1": self.lambda1,
            "gamma": self.gamma,
            "residual": self.residual,
            "iterations": self.iterations,
            "one_signed": self.one_signed,
        }


@dataclass(frozen=True, eq=False)
class Hemisphere:
    stiffness: sp.csr_matrix
    mass: np.ndarray
    equator: np.ndarray


@lru_cache(maxsize=8)
def assemble_hemisphere(n_azimuth: int, n_polar: int) -> Hemisphere:
    """Finite-volume Laplace-Beltrami stiffness and lumped mass on the upper hemisphere.

    Node 0 is the pole; ring j (1..n_polar) at polar angle j*dtheta holds n_azimuth nodes,
    ring n_polar being the equator with a half-width cell.
    """
    d_theta = 0.5 * math.pi / n_polar
    d_alpha = 2.0 * math.pi / n_azimuth
    k = np.arange(n_azimuth)

    def ring(j: int) -> np.ndarray:
        return 1 + (j - 1) * n_azimuth + k

    heads: list[np.ndarray] = []
    tails: list[np.ndarray] = []
    weights: list[np.ndarray] = []

    heads.append(np.zeros(n_azimuth, dtype=int))
    tails.append(ring(1))
    weights.append(np.full(n_azimuth, math.sin(0.5 * d_theta) * d_alpha / d_theta))
    for j in range(1, n_polar):
        heads.append(ring(j))
        tails.append(ring(j + 1))
        weights.append(np.full(n_azimuth, math.sin((j + 0.5) * d_theta) * d_alpha / d_theta))
    for j in range(1, n_polar + 1):
        band = d_theta if j < n_polar else 0.5 * d_theta
        heads.append(ring(j))
        tails.append(ring(j)[(k + 1) % n_azimuth])
        weights.append(np.full(n_azimuth, band / (math.sin(j * d_theta) * d_alpha)))

    a = np.concatenate(heads)
    b = np.concatenate(tails)
    w = np.concatenate(weights)
    size = 1 + n_polar * n_azimuth
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    stiffness = sp.coo_matrix(
        (np.concatenate([w, w, -w, -w]), (rows, cols)), shape=(size, size)
    ).tocsr()

    mass = np.empty(size)
    mass[0] = 2.0 * math.pi * (1.0 - math.cos(0.5 * d_theta))
    for j in range(1, n_polar):
        mass[ring(j)] = d_alpha * (math.cos((j - 0.5) * d_theta) - math.cos((j + 0.5) * d_theta))
    mass[ring(n_polar)] = d_alpha * math.cos((n_polar - 0.5) * d_theta)
    return Hemisphere(stiffness=stiffness, mass=mass, equator=ring(n_polar))


def _inverse_iteration(
    hemisphere: Hemisphere,
    free_equator: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[float, np.ndarray, float, int]:
    free = np.ones(hemisphere.mass.size, dtype=bool)
    free[hemisphere.equator[~free_equator]] = False
    stiffness = hemisphere.stiffness[free][:, free]
    mass = hemisphere.mass[free]
    solver = splu((stiffness - SHIFT * sp.diags(mass)).tocsc())
    x = np.ones(mass.size)
    x /= math.sqrt(float(x @ (mass * x)))
    lam, residual = float("nan"), float("inf")
    for iteration in range(1, max_iter + 1):
        y = solver.solve(mass * x)
        x = y / math.sqrt(float(y @ (mass * y)))
        kx = stiffness @ x
        lam = float(x @ kx)
        r = kx - lam * (mass * x)
        residual = math.sqrt(float(r @ (r / mass)))
        if residual < tol * max(1.0, lam):
            break
    else:
        raise SolverError(
            "spectral", f"inverse iteration did not converge (residual {residual:.3e})"
        )
    full = np.zeros(hemisphere.mass.size)
    full[free] = x if np.sum(x) >= 0 else -x
    return max(lam, 0.0), full, residual, iteration


def _closed_form(problem: SpectralProblem, samples: int = 129) -> EigenResult:
    t = np.linspace(0.0, math.pi, samples)
    if problem.region is RegionKind.FULL:
        lam, eigenfunction = 0.0, np.ones(samples)
    elif problem.region is RegionKind.EMPTY:
        lam, eigenfunction = 1.0, np.sin(t)
    else:
        lam, eigenfunction = 0.25, np.cos(0.5 * t)
    return EigenResult(
        problem=problem,
        lambda1=lam,
        gamma=gamma(lam, 1),
        eigenfunction=eigenfunction,
        residual=0.0,
        iterations=0,
        one_signed=True,
    )


def lambda1(
    problem: SpectralProblem,
    *,
    tol: float = SPECTRAL_TOLERANCE,
    max_iter: int = SPECTRAL_MAX_ITER,
) -> EigenResult:
    """First eigenvalue with u = 0 on the equator outside the cap.

    For N = 2, when the cap edge falls exactly on equator nodes the problem is solved with
    those nodes constrained and with them free, and the two eigenvalues are averaged.

    Raises:
        ValueError: If fewer than three equator nodes span the constrained arc.
        SolverError: If the inverse iteration does not converge.
    """
    if problem.dimension == 1:
        result = _closed_form(problem)
    else:
        closed = problem.free_equator()
        constrained = int(np.count_nonzero(~closed))
        if problem.region is RegionKind.CAP and constrained < MIN_CONSTRAINED_NODES:
            raise ValueError(
                f"mesh too coarse: {constrained} equator node(s) across the constrained arc"
            )
        hemisphere = assemble_hemisphere(problem.n_azimuth, problem.n_polar)
        lam, eigenfunction, residual, iterations = _inverse_iteration(
            hemisphere, closed, tol, max_iter
        )
        if problem.edge_aligned():
            opened = problem.free_equator(include_edge=True)
            lam_open, _, residual_open, iterations_open = _inverse_iteration(
                hemisphere, opened, tol, max_iter
            )
            lam = 0.5 * (lam + lam_open)
            residual = max(residual, residual_open)
            iterations += iterations_open
        one_signed = bool(np.min(eigenfunction) >= -SIGN_TOL * np.max(np.abs(eigenfunction)))
        if not one_signed:
            logger.warning("spectral: eigenfunction changes sign for %s", problem.to_dict())
        result = EigenResult(
            problem=problem,
            lambda1=lam,
            gamma=gamma(lam, 2),
            eigenfunction=eigenfunction,
            residual=residual,
            iterations=iterations,
            one_signed=one_signed,
        )
    if problem.region is RegionKind.EMPTY:
        logger.warning(
            "spectral: lambda1(empty) = %.6f for N=%d (Rayleigh quotient of u=y gives %d; "
            "the stated value 2N = %d disagrees)",
            result.lambda1,
            problem.dimension,
            problem.dimension,
            2 * problem.dimension,
        )
    return result


def lambda1_refinement(problem: SpectralProblem, levels: int = 3) -> list[tuple[int, int, float]]:
    """lambda1 on the problem's mesh and ``levels - 1`` successive doublings."""
    rows = []
    for level in range(levels):
        scale = 2**level
        refined = SpectralProblem(
            dimension=problem.dimension,
            theta=problem.theta,
            region=problem.region,
            n_azimuth=problem.n_azimuth * scale,
            n_polar=problem.n_polar * scale,
        )
        rows.append((refined.n_azimuth, refined.n_polar, lambda1(refined).lambda1))
    return rows


def default_theta_grid(points: int = THETA_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, math.pi, points)


def _key(theta: float) -> float:
    return round(float(theta), 12)


@dataclass(frozen=True, eq=False)
class CapScan:
    dimension: int
    theta: np.ndarray
    lambda1: np.ndarray
    gamma: np.ndarray
    phi: np.ndarray

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.phi))

    @property
    def min_phi(self) -> float:
        return float(self.phi[self.argmin])

    @property
    def argmin_theta(self) -> float:
        return float(self.theta[self.argmin])

    def rows(self) -> list[list[float]]:
        return [
            [float(t), float(lam), float(g), float(p)]
            for t, lam, g, p in zip(self.theta, self.lambda1, self.gamma, self.phi, strict=True)
        ]


def phi_caps(
    dimension: int,
    theta_grid: Sequence[float] | None = None,
    *,
    n_azimuth: int = SPECTRAL_N_AZIMUTH,
    n_polar: int = SPECTRAL_N_POLAR,
    threads: int = 1,
) -> CapScan:
    """Tabulate phi(theta) = (Gamma(theta) + Gamma(pi - theta)) / 2 with Gamma = gamma(lambda1)."""
    thetas = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if thetas.size == 0 or np.any(thetas < -ANGLE_TOL) or np.any(thetas > math.pi + ANGLE_TOL):
        raise ValueError("theta grid must be a nonempty subset of [0, pi]")
    keys = sorted({_key(t) for t in thetas} | {_key(math.pi - t) for t in thetas})

    def solve(key: float) -> EigenResult:
        problem = SpectralProblem(
            dimension=dimension,
            theta=min(max(key, 0.0), math.pi),
            n_azimuth=n_azimuth,
            n_polar=n_polar,
        )
        return lambda1(problem)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = dict(zip(keys, pool.map(solve, keys), strict=True))
    lam = np.array([results[_key(t)].lambda1 for t in thetas])
    big_gamma = np.array([results[_key(t)].gamma for t in thetas])
    mirror = np.array([results[_key(math.pi - t)].gamma for t in thetas])
    scan = CapScan(
        dimension=dimension,
        theta=thetas,
        lambda1=lam,
        gamma=big_gamma,
        phi=0.5 * (big_gamma + mirror),
    )
    logger.info(
        "spectral: N=%d min phi %.6f at theta %.6f", dimension, scan.min_phi, scan.argmin_theta
    )
    return scan


@dataclass(frozen=True)
class NuEstimate:
    dimension: int
    value: float
    cap_minimum: float | None
    degenerate: float
    argmin_theta: float | None
    caveat: str = CAVEAT

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension,
            "nu_acf": self.value,
            "cap_minimum": self.cap_minimum,
            "degenerate": self.degenerate,
            "argmin_theta": self.argmin_theta,
            "caveat": self.caveat,
        }


def _enumerate_two_points() -> float:
    """Half the least gamma sum over pairs of disjoint subsets of the two-point equator."""
    exponents = {
        size: lambda1(SpectralProblem(dimension=1, theta=theta)).gamma
        for size, theta in ((0, 0.0), (1, math.pi / 2), (2, math.pi))
    }
    best = math.inf
    # Each point goes to the first region, the second region, or neither.
    for owner_a in (0, 1, 2):
        for owner_b in (0, 1, 2):
            first = (owner_a == 0) + (owner_b == 0)
            second = (owner_a == 1) + (owner_b == 1)
            best = min(best, exponents[first] + exponents[second])
    return 0.5 * best


def nu_acf_estimate(
    dimension: int,
    theta_grid: Sequence[float] | None = None,
    *,
    n_azimuth: int = SPECTRAL_N_AZIMUTH,
    n_polar: int = SPECTRAL_N_POLAR,
    threads: int = 1,
    scan: CapScan | None = None,
) -> NuEstimate:
    """Cap-restricted partition value: exact enumeration for N = 1, cap scan for N = 2.

    A precomputed ``scan`` on the same mesh is reused instead of solving again.
    """
    if dimension == 1:
        value = _enumerate_two_points()
        return NuEstimate(
            dimension=1, value=value, cap_minimum=None, degenerate=0.5, argmin_theta=None
        )
    mesh = {"n_azimuth": n_azimuth, "n_polar": n_polar}
    full = lambda1(SpectralProblem.full(dimension, **mesh))
    empty = lambda1(SpectralProblem.empty(dimension, **mesh))
    degenerate = 0.5 * (full.gamma + empty.gamma)
    if scan is None:
        scan = phi_caps(dimension, theta_grid, threads=threads, **mesh)
    elif scan.dimension != dimension:
        raise ValueError(f"cap scan is for N={scan.dimension}, not N={dimension}")
    return NuEstimate(
        dimension=dimension,
        value=min(scan.min_phi, degenerate),
        cap_minimum=scan.min_phi,
        degenerate=degenerate,
        argmin_theta=scan.argmin_theta,
    )


__all__ = [
    "CapScan",
    "EigenResult",
    "Hemisphere",
    "NuEstimate",
    "RegionKind",
    "SpectralProblem",
    "assemble_hemisphere",
    "default_theta_grid",
    "lambda1",
    "lambda1_refinement",
    "nu_acf_estimate",
    "phi_caps",
]
