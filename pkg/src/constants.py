"""Numeric defaults shared across the laboratory.

Provides centralized definitions for solver tolerances, quadrature resolutions,
scan exponents and spectral grid sizes used throughout the package.
"""

from __future__ import annotations

import math

# Nonlinear solver
DEFAULT_DAMPING: float = 0.5
DEFAULT_TOLERANCE: float = 1e-10
DEFAULT_MAX_ITER: int = 500
# Relative residual accepted from a direct sparse solve
LINEAR_RTOL: float = 1e-9

# Quadrature on half-balls
ARC_SAMPLES: int = 128
KERNEL_EPS_FACTOR: float = 2.0  # eps = KERNEL_EPS_FACTOR * h
H_FLOOR: float = 1e-14
SEGREGATION_TOL: float = 1e-6

# Monotonicity exponents
DEFAULT_NU_PRIME: float = 0.45
EPS_ASSUMPTION: float = 1.0
LIMITING_C_FACTOR: float = 10.0
MONOTONE_RTOL: float = 1e-3

# Spectral problem
THETA_GRID_POINTS: int = 65
SPECTRAL_N_AZIMUTH: int = 128
SPECTRAL_N_POLAR: int = 64
SPECTRAL_TOLERANCE: float = 1e-10
SPECTRAL_MAX_ITER: int = 5000

# Blow-up measurements
HOLDER_EXACT_LIMIT: int = 10_000
HOLDER_STRIDE: int = 4
ZERO_SET_FACTOR: float = 10.0
ZERO_SET_FLOOR: float = 1e-12

# Decay comparison: sup of the arctan supersolution on |x| <= 1/2 is at most K/M
DECAY_BOUND_CONSTANT: float = 32.0 / (3.0 * math.pi)
DECAY_SLACK: float = 0.05

# Fields are written and compared with this many significant digits
CSV_DIGITS: int = 17


__all__ = [
    "ARC_SAMPLES",
    "CSV_DIGITS",
    "DECAY_BOUND_CONSTANT",
    "DECAY_SLACK",
    "DEFAULT_DAMPING",
    "DEFAULT_MAX_ITER",
    "DEFAULT_NU_PRIME",
    "DEFAULT_TOLERANCE",
    "EPS_ASSUMPTION",
    "H_FLOOR",
    "HOLDER_EXACT_LIMIT",
    "HOLDER_STRIDE",
    "KERNEL_EPS_FACTOR",
    "LIMITING_C_FACTOR",
    "LINEAR_RTOL",
    "MONOTONE_RTOL",
    "SEGREGATION_TOL",
    "SPECTRAL_MAX_ITER",
    "SPECTRAL_N_AZIMUTH",
    "SPECTRAL_N_POLAR",
    "SPECTRAL_TOLERANCE",
    "THETA_GRID_POINTS",
    "ZERO_SET_FACTOR",
    "ZERO_SET_FLOOR",
]
