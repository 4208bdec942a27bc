"""Boundary reactions f_i, their primitives, and the coupled system parameters."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import integrate


PRIMITIVE_RTOL = 1e-8
_SPOT_POINTS = (-1.5, -0.5, 0.25, 1.0, 2.0)


class ReactionKind(str, Enum):
    """Named reaction families accepted in configuration."""

    ZERO = "zero"
    LINEAR = "linear"
    GROSS_PITAEVSKII = "gross-pitaevskii"
    LOGISTIC = "logistic"
    CUSTOM = "custom"


class Reaction(ABC):
    """Per-component scalar reaction with primitive and derivative."""

    kind: ReactionKind

    @property
    @abstractmethod
    def components(self) -> int | None:
        """Number of components the coefficients cover, or None when any k is accepted."""

    @abstractmethod
    def value(self, i: int, s: np.ndarray) -> np.ndarray:
        """Return f_i(s)."""

    @abstractmethod
    def primitive(self, i: int, s: np.ndarray) -> np.ndarray:
        """Return F_i(s) with F_i(0) = 0."""

    @abstractmethod
    def derivative(self, i: int, s: np.ndarray) -> np.ndarray:
        """Return f_i'(s)."""

    def values(self, stack: np.ndarray) -> np.ndarray:
        return np.stack([self.value(i, stack[i]) for i in range(stack.shape[0])])

    def primitives(self, stack: np.ndarray) -> np.ndarray:
        return np.stack([self.primitive(i, stack[i]) for i in range(stack.shape[0])])

    def derivatives(self, stack: np.ndarray) -> np.ndarray:
        return np.stack([self.derivative(i, stack[i]) for i in range(stack.shape[0])])

    def is_zero(self) -> bool:
        return False

    def lipschitz_bound(self, lower: float, upper: float, k: int, samples: int = 257) -> float:
        """Sampled sup of |f_i'| over [lower, upper], all components."""
        s = np.linspace(lower, upper, samples)
        return max(float(np.max(np.abs(self.derivative(i, s)))) for i in range(k))

    def check_primitive(self, k: int, points: Sequence[float] = _SPOT_POINTS) -> None:
        """Spot-test F_i(0) = 0 and F_i(b) - F_i(a) = integral of f_i by adaptive quadrature."""
        for i in range(k):
            at_zero = float(self.primitive(i, np.asarray(0.0)))
            if abs(at_zero) > PRIMITIVE_RTOL:
                raise ValueError(f"reaction component {i}: F(0) = {at_zero!r}, expected 0")
            for b in points:
                quad, _ = integrate.quad(lambda s, i=i: float(self.value(i, np.asarray(s))), 0.0, b)
                prim = float(self.primitive(i, np.asarray(b)))
                if abs(prim - quad) > PRIMITIVE_RTOL * max(1.0, abs(quad)):
                    raise ValueError(
                        f"reaction component {i}: F({b}) = {prim!r} but integral of f is {quad!r}"
                    )


class ZeroReaction(Reaction):
    kind = ReactionKind.ZERO

    @property
    def components(self) -> int | None:
        return None

    def value(self, i: int, s: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(s, dtype=float))

    def primitive(self, i: int, s: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(s, dtype=float))

    def derivative(self, i: int, s: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(s, dtype=float))

    def is_zero(self) -> bool:
        return True


@dataclass(frozen=True)
class GrossPitaevskiiReaction(Reaction):
    """f_i(s) = omega_i s^3 + lambda_i s; ``omega`` all zero gives the linear family."""

    omega: tuple[float, ...]
    lam: tuple[float, ...]
    kind: ReactionKind = ReactionKind.GROSS_PITAEVSKII

    def __post_init__(self) -> None:
        if len(self.omega) != len(self.lam):
            raise ValueError("omega and lambda must have one entry per component")

    @property
    def components(self) -> int | None:
        return len(self.omega)

    def value(self, i: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.omega[i] * s**3 + self.lam[i] * s

    def primitive(self, i: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return 0.25 * self.omega[i] * s**4 + 0.5 * self.lam[i] * s**2

    def derivative(self, i: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return 3.0 * self.omega[i] * s**2 + self.lam[i]

    def is_zero(self) -> bool:
        return not any(self.omega) and not any(self.lam)


@dataclass(frozen=True)
class LogisticReaction(Reaction):
    """f_i(s) = r_i s (1 - s / K_i)."""

    rate: tuple[float, ...]
    capacity: tuple[float, ...]
    kind: ReactionKind = ReactionKind.LOGISTIC

    def __post_init__(self) -> None:
        if len(self.rate) != len(self.capacity):
            raise ValueError("rate and capacity must have one entry per component")
        if any(cap <= 0 for cap in self.capacity):
            raise ValueError("logistic capacity must be positive")

    @property
    def components(self) -> int | None:
        return len(self.rate)

    def value(self, i: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.rate[i] * s * (1.0 - s / self.capacity[i])

    def primitive(self, i: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.rate[i] * (0.5 * s**2 - s**3 / (3.0 * self.capacity[i]))

    def derivative(self, i: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.rate[i] * (1.0 - 2.0 * s / self.capacity[i])


@dataclass(frozen=True)
class CallableReaction(Reaction):
    """User-supplied reaction; callables take (i, s) and are vectorized over s."""

    f: Callable[[int, np.ndarray], np.ndarray]
    primitive_fn: Callable[[int, np.ndarray], np.ndarray]
    derivative_fn: Callable[[int, np.ndarray], np.ndarray]
    k: int | None = None
    kind: ReactionKind = ReactionKind.CUSTOM

    @property
    def components(self) -> int | None:
        return self.k

    def value(self, i: int, s: np.ndarray) -> np.ndarray:
        return np.asarray(self.f(i, np.asarray(s, dtype=float)), dtype=float)

    def primitive(self, i: int, s: np.ndarray) -> np.ndarray:
        return np.asarray(self.primitive_fn(i, np.asarray(s, dtype=float)), dtype=float)

    def derivative(self, i: int, s: np.ndarray) -> np.ndarray:
        return np.asarray(self.derivative_fn(i, np.asarray(s, dtype=float)), dtype=float)


def _coefficients(
    payload: Mapping[str, Any], key: str, k: int, default: float
) -> tuple[float, ...]:
    raw = payload.get(key)
    if raw is None or len(raw) == 0:
        return (default,) * k
    if len(raw) != k:
        raise ValueError(f"{key} must have {k} entries, got {len(raw)}")
    return tuple(float(value) for value in raw)


def _create_zero(payload: Mapping[str, Any], k: int) -> Reaction:
    return ZeroReaction()


def _create_linear(payload: Mapping[str, Any], k: int) -> Reaction:
    return GrossPitaevskiiReaction(
        omega=(0.0,) * k,
        lam=_coefficients(payload, "lambda", k, 0.0),
        kind=ReactionKind.LINEAR,
    )


def _create_gross_pitaevskii(payload: Mapping[str, Any], k: int) -> Reaction:
    return GrossPitaevskiiReaction(
        omega=_coefficients(payload, "omega", k, 0.0),
        lam=_coefficients(payload, "lambda", k, 0.0),
    )


def _create_logistic(payload: Mapping[str, Any], k: int) -> Reaction:
    return LogisticReaction(
        rate=_coefficients(payload, "rate", k, 1.0),
        capacity=_coefficients(payload, "capacity", k, 1.0),
    )


class ReactionFactory:
    """Factory for building reactions from config payloads."""

    _registry: dict[str, Callable[[Mapping[str, Any], int], Reaction]] = {
        ReactionKind.ZERO.value: _create_zero,
        ReactionKind.LINEAR.value: _create_linear,
        ReactionKind.GROSS_PITAEVSKII.value: _create_gross_pitaevskii,
        ReactionKind.LOGISTIC.value: _create_logistic,
    }

    @classmethod
    def create(cls, kind: str, payload: Mapping[str, Any], k: int) -> Reaction:
        """Create a reaction of the given kind for ``k`` components.

        Raises:
            ValueError: If the kind is not registered or coefficients are malformed.
        """
        key = kind.value if isinstance(kind, ReactionKind) else kind
        creator = cls._registry.get(key)
        if creator is None:
            raise ValueError(f"Unsupported reaction kind: {kind}")
        return creator(payload, k)

    @classmethod
    def get_supported_types(cls) -> list[str]:
        return list(cls._registry.keys())

    @classmethod
    def register(cls, kind: str, creator: Callable[[Mapping[str, Any], int], Reaction]) -> None:
        cls._registry[kind] = creator


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Component count, competition strength, reaction and interaction weights."""

    k: int
    beta: float
    reaction: Reaction = field(default_factory=ZeroReaction)
    a: np.ndarray | None = None
    mass: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"component count must be positive, got {self.k}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and nonnegative, got {self.beta!r}")
        if self.reaction.components is not None and self.reaction.components != self.k:
            raise ValueError(
                f"reaction covers {self.reaction.components} components, system has {self.k}"
            )
        weights = np.ones((self.k, self.k)) if self.a is None else np.array(self.a, dtype=float)
        if weights.shape != (self.k, self.k):
            raise ValueError(f"a_ij must be {self.k}x{self.k}, got {weights.shape}")
        if not np.allclose(weights, weights.T, rtol=0.0, atol=1e-14):
            raise ValueError("a_ij must be symmetric")
        off = ~np.eye(self.k, dtype=bool)
        if np.any(weights[off] <= 0):
            raise ValueError("a_ij must be positive")
        weights.setflags(write=False)
        object.__setattr__(self, "a", weights)
        mass = (0.0,) * self.k if self.mass is None else tuple(float(m) for m in self.mass)
        if len(mass) != self.k or any(m < 0 for m in mass):
            raise ValueError("mass must list one nonnegative entry per component")
        object.__setattr__(self, "mass", mass)

    @property
    def off_diagonal(self) -> np.ndarray:
        return np.where(np.eye(self.k, dtype=bool), 0.0, self.a)

    def with_beta(self, beta: float) -> SystemParams:
        return SystemParams(k=self.k, beta=beta, reaction=self.reaction, a=self.a, mass=self.mass)

    def coupling(self, stack: np.ndarray) -> np.ndarray:
        """Return sum over j != i of a_ij v_j^2 for every component, same shape as ``stack``."""
        squares = np.asarray(stack, dtype=float) ** 2
        flat = squares.reshape(self.k, -1)
        return (self.off_diagonal @ flat).reshape(squares.shape)

    def interaction_density(self, stack: np.ndarray) -> np.ndarray:
        """Return sum over i < j of a_ij v_i^2 v_j^2."""
        squares = np.asarray(stack, dtype=float) ** 2
        total = np.zeros(squares.shape[1:])
        for i in range(self.k):
            for j in range(i + 1, self.k):
                total = total + self.a[i, j] * squares[i] * squares[j]
        return total

    def is_decoupled(self) -> bool:
        return self.beta == 0 or self.k == 1

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "k": self.k,
            "beta": self.beta,
            "reaction": self.reaction.kind.value,
            "a_ij": self.a.tolist(),
            "mass": list(self.mass),
        }
        if isinstance(self.reaction, GrossPitaevskiiReaction):
            payload["omega"] = list(self.reaction.omega)
            payload["lambda"] = list(self.reaction.lam)
        elif isinstance(self.reaction, LogisticReaction):
            payload["rate"] = list(self.reaction.rate)
            payload["capacity"] = list(self.reaction.capacity)
        return payload


__all__ = [
    "CallableReaction",
    "GrossPitaevskiiReaction",
    "LogisticReaction",
    "Reaction",
    "ReactionFactory",
    "ReactionKind",
    "SystemParams",
    "ZeroReaction",
]
