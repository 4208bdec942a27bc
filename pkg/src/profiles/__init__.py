"""Closed-form reference profiles.

Exact harmonic solutions, the linear subsolution and the arctan supersolution used
as oracles for the solver, the quadrature and the monotonicity scans.
"""

from __future__ import annotations

# Base classes
from .base import BaseProfile

# Homogeneous harmonic profiles
from .harmonic import (
    ClassifiedPair,
    PolynomialPair,
    SqrtExtension,
    classified_pair,
    polynomial_pair,
    sqrt_extension,
)

# Linear and constant profiles
from .elementary import (
    ConstantProfile,
    LinearProfile,
    LinearSubsolution,
    constant,
    linear_y,
    subsolution_linear,
)

# Decay supersolution
from .supersolution import (
    ConditionResult,
    Supersolution,
    SupersolutionReport,
    check_supersolution,
    supersolution_wdelta,
)

# Factory
from .factory import ProfileFactory

# Checks
from .checks import (
    GradientCheck,
    ProfileCheckReport,
    RefinementResult,
    gradient_consistency,
    harmonic_refinement_ratio,
    run_profile_check,
    trace_segregation,
)

__all__ = [
    # Base
    "BaseProfile",
    # Harmonic
    "ClassifiedPair",
    "PolynomialPair",
    "SqrtExtension",
    "classified_pair",
    "polynomial_pair",
    "sqrt_extension",
    # Elementary
    "ConstantProfile",
    "LinearProfile",
    "LinearSubsolution",
    "constant",
    "linear_y",
    "subsolution_linear",
    # Supersolution
    "ConditionResult",
    "Supersolution",
    "SupersolutionReport",
    "check_supersolution",
    "supersolution_wdelta",
    # Factory
    "ProfileFactory",
    # Checks
    "GradientCheck",
    "ProfileCheckReport",
    "RefinementResult",
    "gradient_consistency",
    "harmonic_refinement_ratio",
    "run_profile_check",
    "trace_segregation",
]
