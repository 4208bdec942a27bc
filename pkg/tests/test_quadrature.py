import math

import numpy as np
import pytest

from src.grid import Field
from src.quadrature import (
    FieldSampler,
    flat_abscissae,
    flat_integral,
    half_ball_mask,
    snap_radius,
    validate_radii,
)
from tests.factories import build_grid


def _field(grid, fn):
    X, Y = grid.mesh()
    return Field(grid, fn(X, Y))


def test_snap_radius_rounds_to_half_spacing():
    assert snap_radius(0.23, 0.1) == pytest.approx(0.25)
    assert snap_radius(0.001, 0.1) == pytest.approx(0.05)


def test_validate_radii_errors():
    grid = build_grid(h=0.1)

    with pytest.raises(ValueError, match="outside grid"):
        validate_radii(grid, 1.5, [0.2])
    with pytest.raises(ValueError, match="exceeds domain"):
        validate_radii(grid, 0.5, [0.2, 0.6])
    with pytest.raises(ValueError, match="strictly increasing"):
        validate_radii(grid, 0.0, [0.21, 0.22])
    np.testing.assert_allclose(validate_radii(grid, 0.0, [0.2, 0.42]), [0.2, 0.4])


def test_volume_integral_of_linear_energy_matches_half_disk_area():
    grid = build_grid(h=0.02)
    sampler = FieldSampler(_field(grid, lambda x, y: x))

    energy = sampler.volume_integral(sampler.cell_energy[0], half_ball_mask(grid, 0.0, 0.5))

    assert energy == pytest.approx(math.pi * 0.25 / 2, rel=0.03)


def test_arc_integral_of_constant_is_arc_length():
    grid = build_grid(h=0.1)
    arc = FieldSampler(_field(grid, lambda x, y: np.ones_like(x))).arc(0.2, 0.5)

    assert arc.integrate(arc.values[0]) == pytest.approx(math.pi * 0.5)


def test_arc_normal_derivative_of_quadratic_is_exact():
    grid = build_grid(h=0.05)
    arc = FieldSampler(_field(grid, lambda x, y: x**2 - y**2)).arc(0.0, 0.4, samples=64)

    expected = 2 * 0.4 * np.cos(2 * arc.theta)
    np.testing.assert_allclose(arc.normal_derivative[0], expected, atol=1e-10)


def test_flat_abscissae_spacing():
    xs = flat_abscissae(-0.3, 0.3, 0.1)

    assert xs[0] == -0.3 and xs[-1] == 0.3
    assert np.max(np.diff(xs)) <= 0.05 + 1e-12
    assert flat_abscissae(0.0, 1e-6, 0.1).size == 3


@pytest.mark.parametrize("h", [0.05, 0.025])
def test_flat_integral_of_trace(h):
    """Linear interpolation of the nodal trace integrates x^2 with error h^2 / 3."""
    sampler = FieldSampler(_field(build_grid(h=h), lambda x, y: x**2 + y))

    xs, trace = sampler.flat_samples(-1.0, 1.0)

    assert flat_integral(xs, trace[0]) == pytest.approx(2.0 / 3.0 + h * h / 3.0, rel=1e-9)
    assert flat_integral(xs, trace[0]) == pytest.approx(2.0 / 3.0, rel=2.0 * h * h)


def test_endpoint_values_interpolate_trace():
    grid = build_grid(h=0.1)
    sampler = FieldSampler(_field(grid, lambda x, y: 3 * x + y))

    np.testing.assert_allclose(sampler.endpoint_values([-0.25, 0.55]), [[-0.75, 1.65]])
