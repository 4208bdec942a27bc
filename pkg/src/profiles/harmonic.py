"""Homogeneous harmonic profiles on the upper half-plane."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .base import BaseProfile, integer_power, power_parts


@dataclass(frozen=True)
class ClassifiedPair(BaseProfile):
    """v = c rho^a cos(a theta), w = d rho^a sin(a theta) with a = 1/2 + mode.

    ``second`` overrides d; by default d = sign * c.
    """

    mode: int = 0
    coefficient: float = 1.0
    sign: int = 1
    second: float | None = None

    kind = "classified-pair"

    def __post_init__(self) -> None:
        if self.mode < 0:
            raise ValueError("mode must be a nonnegative integer")
        if self.coefficient == 0:
            raise ValueError("coefficient must be nonzero")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def components(self) -> int:
        return 2

    @property
    def exponent(self) -> float:
        return 0.5 + self.mode

    @property
    def second_coefficient(self) -> float:
        return self.sign * self.coefficient if self.second is None else self.second

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        re, im, _, _ = power_parts(x, y, self.exponent)
        return np.stack([self.coefficient * re, self.second_coefficient * im])

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _, _, grad_re, grad_im = power_parts(x, y, self.exponent)
        return np.stack([self.coefficient * grad_re, self.second_coefficient * grad_im])

    def singular_points(self) -> tuple[tuple[float, float], ...]:
        return ((0.0, 0.0),)

    def parameters(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"k": self.mode, "c": self.coefficient, "sign": self.sign}
        if self.second is not None:
            payload["d"] = self.second
        return payload


@dataclass(frozen=True)
class SqrtExtension(BaseProfile):
    """Harmonic extension of sqrt(x+): v = sqrt((rho + x) / 2)."""

    kind = "sqrt-extension"

    @property
    def components(self) -> int:
        return 1

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x, y)
        return np.sqrt(np.maximum(0.5 * (rho + x), 0.0))[np.newaxis]

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _, _, grad_re, _ = power_parts(x, y, 0.5)
        return grad_re[np.newaxis]

    def singular_points(self) -> tuple[tuple[float, float], ...]:
        return ((0.0, 0.0),)

    def parameters(self) -> dict[str, Any]:
        return {}


@dataclass(frozen=True)
class PolynomialPair(BaseProfile):
    """Harmonic polynomial family of degree k.

    Components, in order: c rho^k cos(k theta), then c_i rho^k sin(k theta) for each
    ``sin_coefficients`` entry, then d_i rho^(k+1) sin((k+1) theta) for each
    ``dirichlet_coefficients`` entry. Every sine component vanishes on y = 0.
    """

    degree: int
    coefficient: float = 1.0
    sin_coefficients: tuple[float, ...] = (1.0,)
    dirichlet_coefficients: tuple[float, ...] = ()

    kind = "polynomial-harmonic"

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValueError("degree must be a nonnegative integer")

    @property
    def components(self) -> int:
        return 1 + len(self.sin_coefficients) + len(self.dirichlet_coefficients)

    def _parts(self, x: np.ndarray, y: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        power = integer_power(x, y, k)
        if k == 0:
            slope = np.zeros_like(power)
        else:
            slope = k * integer_power(x, y, k - 1)
        return power, slope

    def value(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        power, _ = self._parts(x, y, self.degree)
        rows = [self.coefficient * power.real]
        rows.extend(c * power.imag for c in self.sin_coefficients)
        if self.dirichlet_coefficients:
            higher, _ = self._parts(x, y, self.degree + 1)
            rows.extend(d * higher.imag for d in self.dirichlet_coefficients)
        return np.stack(rows)

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _, slope = self._parts(x, y, self.degree)
        rows = [self.coefficient * np.stack([slope.real, -slope.imag])]
        rows.extend(c * np.stack([slope.imag, slope.real]) for c in self.sin_coefficients)
        if self.dirichlet_coefficients:
            _, higher = self._parts(x, y, self.degree + 1)
            rows.extend(
                d * np.stack([higher.imag, higher.real]) for d in self.dirichlet_coefficients
            )
        return np.stack(rows)

    def parameters(self) -> dict[str, Any]:
        return {
            "k": self.degree,
            "c": self.coefficient,
            "sin": list(self.sin_coefficients),
            "dirichlet": list(self.dirichlet_coefficients),
        }


def classified_pair(
    k: int = 0, c: float = 1.0, sign: int = 1, *, d: float | None = None
) -> ClassifiedPair:
    """Two-component profile with segregated traces: v = 0 on x <= 0, w = 0 on x >= 0."""
    return ClassifiedPair(mode=k, coefficient=c, sign=sign, second=d)


def sqrt_extension() -> SqrtExtension:
    return SqrtExtension()


def polynomial_pair(
    k: int,
    c: float = 1.0,
    sin: tuple[float, ...] = (1.0,),
    dirichlet: tuple[float, ...] = (),
) -> PolynomialPair:
    return PolynomialPair(
        degree=k,
        coefficient=c,
        sin_coefficients=tuple(sin),
        dirichlet_coefficients=tuple(dirichlet),
    )


__all__ = [
    "ClassifiedPair",
    "PolynomialPair",
    "SqrtExtension",
    "classified_pair",
    "polynomial_pair",
    "sqrt_extension",
]
