"""Base profile class and polar helpers."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, ClassVar

import numpy as np

from ..extension_solver import DirichletData
from ..grid import Field, HalfGrid, VolumeField, VolumeGrid


class BaseProfile(ABC):
    """Closed-form reference solution with exact value and gradient."""

    kind: ClassVar[str]

    @property
    @abstractmethod
    def components(self) -> int:
        """Number of components."""
        ...

    @abstractmethod
    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Values with shape (components, *broadcast(x, y).shape)."""
        ...

    @abstractmethod
    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Gradients with shape (components, 2, *broadcast(x, y).shape)."""
        ...

    @abstractmethod
    def parameters(self) -> dict[str, Any]:
        """Parameters that reproduce this profile through the factory."""
        ...

    def singular_points(self) -> tuple[tuple[float, float], ...]:
        return ()

    @property
    def harmonic(self) -> bool:
        return True

    def sample(self, grid: HalfGrid) -> Field:
        X, Y = grid.mesh()
        return Field(grid, self.value(X, Y))

    def sample_volume(self, grid: VolumeGrid) -> VolumeField:
        """Tensor lift: the planar profile evaluated at (x1, y), constant in x2."""
        x1, _, y = grid.axes
        X1, Y = np.meshgrid(x1, y, indexing="ij")
        planar = self.value(X1, Y)
        return VolumeField(grid, np.repeat(planar[:, :, np.newaxis, :], grid.n2, axis=2))

    def dirichlet(self) -> DirichletData:
        return DirichletData(evaluator=self.value)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.parameters()}


def polar(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Radius and angle in [0, pi] for y >= 0, measured from the positive x-axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.hypot(x, y), np.arctan2(y, x)


def power_parts(
    x: np.ndarray, y: np.ndarray, a: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Real and imaginary parts of z^a with their gradients, z = x + iy.

    Returns ``(re, im, grad_re, grad_im)``; gradients carry a leading axis of length 2.
    Values vanish at the origin for a > 0.
    """
    rho, theta = polar(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        magnitude = rho**a
        re = magnitude * np.cos(a * theta)
        im = magnitude * np.sin(a * theta)
        if a == 0:
            slope = np.zeros_like(rho)
        else:
            slope = a * rho ** (a - 1.0)
        cos_b = np.cos((a - 1.0) * theta)
        sin_b = np.sin((a - 1.0) * theta)
        grad_re = np.stack([slope * cos_b, -slope * sin_b])
        grad_im = np.stack([slope * sin_b, slope * cos_b])
    return re, im, grad_re, grad_im


def integer_power(x: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """(x + iy)^k by repeated multiplication, exact at the origin."""
    z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    out = np.ones_like(z)
    for _ in range(k):
        out = out * z
    return out


__all__ = [
    "BaseProfile",
    "integer_power",
    "polar",
    "power_parts",
]
