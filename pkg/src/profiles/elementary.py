"""Linear and constant profiles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .base import BaseProfile


def _shape(x: np.ndarray, y: np.ndarray) -> tuple[int, ...]:
    return np.broadcast(np.asarray(x), np.asarray(y)).shape


@dataclass(frozen=True)
class LinearProfile(BaseProfile):
    """(y, 0, ..., 0): the first component is the height, the rest vanish."""

    count: int = 2

    kind = "linear-y"

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("linear profile needs at least one component")

    @property
    def components(self) -> int:
        return self.count

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.count,) + _shape(x, y))
        out[0] = y
        return out

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.count, 2) + _shape(x, y))
        out[0, 1] = 1.0
        return out

    def parameters(self) -> dict[str, Any]:
        return {"components": self.count}


@dataclass(frozen=True)
class ConstantProfile(BaseProfile):
    levels: tuple[float, ...] = (1.0,)

    kind = "constant"

    @property
    def components(self) -> int:
        return len(self.levels)

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        shape = _shape(x, y)
        return np.stack([np.full(shape, level) for level in self.levels])

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.zeros((self.components, 2) + _shape(x, y))

    def parameters(self) -> dict[str, Any]:
        return {"values": list(self.levels)}


@dataclass(frozen=True)
class LinearSubsolution(BaseProfile):
    """w = (1 + M y) / (1 + M), which satisfies dw/dnu + M w = 0 on y = 0."""

    decay: float

    kind = "subsolution-linear"

    def __post_init__(self) -> None:
        if self.decay < 0:
            raise ValueError("M must be nonnegative")

    @property
    def components(self) -> int:
        return 1

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        shape = _shape(x, y)
        y = np.broadcast_to(np.asarray(y, dtype=float), shape)
        return ((1.0 + self.decay * y) / (1.0 + self.decay))[np.newaxis]

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.zeros((1, 2) + _shape(x, y))
        out[0, 1] = self.decay / (1.0 + self.decay)
        return out

    def normal_derivative(self) -> float:
        """-dw/dy on the flat boundary."""
        return -self.decay / (1.0 + self.decay)

    def parameters(self) -> dict[str, Any]:
        return {"M": self.decay}


def linear_y(components: int = 2) -> LinearProfile:
    return LinearProfile(count=components)


def constant(values: tuple[float, ...] | float = (1.0,)) -> ConstantProfile:
    levels = (float(values),) if np.isscalar(values) else tuple(float(v) for v in values)
    return ConstantProfile(levels=levels)


def subsolution_linear(M: float) -> LinearSubsolution:
    return LinearSubsolution(decay=M)


__all__ = [
    "ConstantProfile",
    "LinearProfile",
    "LinearSubsolution",
    "constant",
    "linear_y",
    "subsolution_linear",
]
