"""Factory for creating profile instances from JSON payloads."""

from __future__ import annotations

from typing import Any, Callable

from .base import BaseProfile
from .elementary import constant, linear_y, subsolution_linear
from .harmonic import classified_pair, polynomial_pair, sqrt_extension
from .supersolution import supersolution_wdelta


def _require(payload: dict[str, Any], key: str) -> Any:
    try:
        return payload[key]
    except KeyError as exc:
        raise ValueError(f"Missing required key: {exc.args[0]}") from exc


def _create_classified_pair(payload: dict[str, Any]) -> BaseProfile:
    d = payload.get("d")
    return classified_pair(
        k=int(payload.get("k", 0)),
        c=float(payload.get("c", 1.0)),
        sign=int(payload.get("sign", 1)),
        d=None if d is None else float(d),
    )


def _create_sqrt_extension(payload: dict[str, Any]) -> BaseProfile:
    return sqrt_extension()


def _create_linear_y(payload: dict[str, Any]) -> BaseProfile:
    return linear_y(int(payload.get("components", 2)))


def _create_constant(payload: dict[str, Any]) -> BaseProfile:
    values = payload.get("values", payload.get("c", 1.0))
    return constant(values if isinstance(values, (int, float)) else tuple(values))


def _create_supersolution(payload: dict[str, Any]) -> BaseProfile:
    return supersolution_wdelta(
        M=float(_require(payload, "M")),
        delta=float(payload.get("delta", 0.0)),
        N=int(payload.get("N", 1)),
        normalization=str(payload.get("normalization", "auto")),
    )


def _create_subsolution(payload: dict[str, Any]) -> BaseProfile:
    return subsolution_linear(float(_require(payload, "M")))


def _create_polynomial(payload: dict[str, Any]) -> BaseProfile:
    return polynomial_pair(
        k=int(_require(payload, "k")),
        c=float(payload.get("c", 1.0)),
        sin=tuple(float(c) for c in payload.get("sin", (1.0,))),
        dirichlet=tuple(float(d) for d in payload.get("dirichlet", ())),
    )


class ProfileFactory:
    """Factory for creating profile instances from JSON payloads."""

    _registry: dict[str, Callable[[dict[str, Any]], BaseProfile]] = {
        "classified-pair": _create_classified_pair,
        "sqrt-extension": _create_sqrt_extension,
        "linear-y": _create_linear_y,
        "constant": _create_constant,
        "supersolution-wdelta": _create_supersolution,
        "subsolution-linear": _create_subsolution,
        "polynomial-harmonic": _create_polynomial,
    }

    @classmethod
    def create(cls, kind: str, payload: dict[str, Any] | None = None) -> BaseProfile:
        """Create a profile from its kind and parameters.

        Args:
            kind: Registered profile kind, e.g. ``"classified-pair"``.
            payload: Parameters for the kind.

        Returns:
            The profile instance.

        Raises:
            ValueError: If the kind is not supported or a required parameter is missing.
        """
        creator = cls._registry.get(kind)
        if creator is None:
            raise ValueError(f"Unsupported profile kind: {kind}")
        return creator(dict(payload or {}))

    @classmethod
    def get_supported_types(cls) -> list[str]:
        """Return the list of supported profile kinds."""
        return list(cls._registry.keys())

    @classmethod
    def register(cls, kind: str, creator: Callable[[dict[str, Any]], BaseProfile]) -> None:
        """Register a new profile kind.

        Args:
            kind: The kind identifier.
            creator: Callable that builds the profile from a payload.
        """
        cls._registry[kind] = creator


__all__ = [
    "ProfileFactory",
]
