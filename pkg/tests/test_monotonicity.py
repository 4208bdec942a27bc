import math

import numpy as np
import pytest

from src.grid import Field
from src.monotonicity import (
    BASE_COLUMNS,
    Kernel,
    acf_boundary,
    acf_perturbed,
    acf_segregated,
    almgren_coexistence,
    almgren_limiting,
    almgren_segregated,
    find_dips,
    monotone_onset,
    morrey_phi,
    morrey_sweep,
    pohozaev_residual_sphere,
    radial_scan,
)
from src.profiles import classified_pair, polynomial_pair, sqrt_extension
from src.reactions import ReactionFactory
from tests.factories import build_grid, build_params

SCAN_RADII = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]


@pytest.fixture(scope="module")
def fine_pair() -> Field:
    return classified_pair(0, 1.0).sample(build_grid(h=1.0 / 200.0))


def test_kernel_is_identically_one_in_the_plane():
    kernel = Kernel(eps=0.1)

    np.testing.assert_allclose(kernel(np.array([0.0, 0.05, 0.2, 3.0])), 1.0)
    assert Kernel.for_grid(build_grid(h=0.1), factor=2.0).eps == pytest.approx(0.2)


def test_kernel_validation():
    with pytest.raises(ValueError, match="dimension must be positive"):
        Kernel(dimension=0)
    with pytest.raises(ValueError, match="eps must be nonnegative"):
        Kernel(eps=-1.0)


def test_frequency_of_classified_pair_is_one_half(fine_pair):
    series = almgren_segregated(fine_pair, 0.0, SCAN_RADII)

    np.testing.assert_allclose(series.N, 0.5, atol=0.02)
    assert series.defined.all()


def test_coexistence_frequency_is_scale_free_for_segregated_traces(fine_pair):
    """Rescaling by sqrt(beta) cancels in E/H and the flat coupling vanishes."""
    plain = almgren_segregated(fine_pair, 0.0, SCAN_RADII)

    series = almgren_coexistence(fine_pair, build_params(beta=10.0), 0.0, SCAN_RADII)

    np.testing.assert_allclose(series.N, plain.N, rtol=1e-6)
    np.testing.assert_allclose(series.E, 10.0 * plain.E, rtol=1e-6)
    assert series.extras["log_derivative_gap"].shape == (len(SCAN_RADII) - 1,)


def test_coexistence_rejects_component_mismatch(fine_pair):
    with pytest.raises(ValueError, match="field has 2 components, params expect 3"):
        almgren_coexistence(fine_pair, build_params(k=3, beta=1.0), 0.0, SCAN_RADII)


def test_log_derivative_of_height_is_twice_the_frequency():
    """(x + x^2 - y^2, y + 2xy) is not homogeneous, so N varies with r."""
    grid = build_grid(h=0.01)
    linear = polynomial_pair(1, 1.0, (1.0,)).sample(grid)
    mixed = Field(grid, linear.values + polynomial_pair(2, 1.0, (1.0,)).sample(grid).values)

    series = almgren_segregated(mixed, 0.0, [0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7])

    _, slope, predicted = series.log_derivative()
    np.testing.assert_allclose(slope, predicted, rtol=0.02)
    assert series.N[-1] > series.N[0] + 0.05


def test_scaling_leaves_frequency_and_ratios_unchanged(fine_pair):
    scaled = Field(fine_pair.grid, 3.0 * fine_pair.values)
    radii = [0.3, 0.5, 0.7]

    plain = almgren_segregated(fine_pair, 0.0, radii)
    series = almgren_segregated(scaled, 0.0, radii)

    np.testing.assert_allclose(series.N, plain.N, rtol=1e-10)
    np.testing.assert_allclose(series.E, 9.0 * plain.E, rtol=1e-10)
    np.testing.assert_allclose(series.H, 9.0 * plain.H, rtol=1e-10)
    for functional in (acf_segregated, acf_perturbed):
        before = functional(fine_pair.component(0), fine_pair.component(1), 0.0, radii)
        after = functional(scaled.component(0), scaled.component(1), 0.0, radii)
        np.testing.assert_allclose(after.ratios(), before.ratios(), rtol=1e-8)


def test_limiting_frequency_adds_one(fine_pair):
    series = almgren_limiting(fine_pair, ReactionFactory.create("zero", {}, 2), 0.0, [0.3, 0.6])

    np.testing.assert_allclose(series.N, 1.5, atol=0.02)
    np.testing.assert_allclose(series.extras["compensated"], series.N)


def test_frequency_of_harmonic_polynomial_is_its_degree():
    field = polynomial_pair(2, 1.0, (1.0,)).sample(build_grid(h=0.01))

    series = almgren_segregated(field, 0.0, [0.3, 0.5])

    np.testing.assert_allclose(series.N, 2.0, atol=0.05)


def test_boundary_functional_of_sqrt_extension():
    field = sqrt_extension().sample(build_grid(h=1.0 / 200.0))

    series = acf_boundary(field, [0.25, 0.5, 0.75])

    np.testing.assert_allclose(series.phi, math.pi / 4, rtol=0.02)


def test_segregated_acf_is_constant_for_the_classified_pair(fine_pair):
    series = acf_segregated(
        fine_pair.component(0), fine_pair.component(1), 0.0, [0.3, 0.5, 0.7], nu=0.5
    )

    np.testing.assert_allclose(series.ratios(), 1.0, rtol=0.03)


def test_perturbed_acf_rejects_exponent_above_limit():
    field = classified_pair(0, 1.0).sample(build_grid(h=0.1))

    with pytest.raises(ValueError, match="nu_prime must lie in"):
        acf_perturbed(field.component(0), field.component(1), 0.0, [0.2, 0.4], nu_prime=0.6)


def test_perturbed_acf_flags_radii_above_one():
    grid = build_grid(h=0.1, x_min=-2.0, x_max=2.0, y_max=2.0)
    field = classified_pair(0, 1.0).sample(grid)

    series = acf_perturbed(field.component(0), field.component(1), 0.0, [0.5, 1.5])

    assert series.above_unit.tolist() == [False, True]
    assert np.all(series.phi > 0)


def test_perturbed_acf_of_constant_pair_is_a_pure_boundary_term():
    grid = build_grid(h=0.05)
    c = 1.5
    level = Field(grid, np.full(grid.shape, c))

    series = acf_perturbed(level, level, 0.0, [0.2, 0.4, 0.6], nu_prime=0.25)

    factor = 2.0 * c**4 * series.radii ** (1.0 - 2.0 * 0.25)
    np.testing.assert_allclose(series.factors, [factor, factor], rtol=1e-10)
    np.testing.assert_allclose(series.phi, factor**2, rtol=1e-10)


def _max_residual(h: float, x0: float) -> float:
    field = classified_pair(0, 1.0).sample(build_grid(h=h))
    residual = pohozaev_residual_sphere(field, build_params(), x0, [0.45, 0.6])
    return float(np.max(np.abs(residual)))


@pytest.mark.parametrize("x0", [0.0, -0.3, 0.3])
def test_pohozaev_residual_decreases_under_refinement(x0):
    coarse = _max_residual(1.0 / 50.0, x0)
    fine = _max_residual(1.0 / 100.0, x0)

    assert coarse / fine >= 1.8


def test_morrey_quotient_of_linear_field():
    grid = build_grid(h=0.01)
    X, _ = grid.mesh()
    field = Field(grid, X)

    value = morrey_phi(field, (0.0, 0.5), [0.3])[0]

    assert value == pytest.approx(math.pi * 0.3, rel=0.03)
    with pytest.raises(ValueError, match="exceeds domain"):
        morrey_phi(field, (0.9, 0.5), [0.3])


def test_morrey_sweep_finds_largest_energy():
    grid = build_grid(h=0.05)
    X, _ = grid.mesh()
    field = Field(grid, X**2)

    sweep = morrey_sweep(field, [(0.0, 0.3), (0.5, 0.3)], [0.2], threads=2)

    assert sweep.values.shape == (2, 1)
    assert sweep.argmax == ((0.5, 0.3), 0.2)
    with pytest.raises(ValueError, match="center list is empty"):
        morrey_sweep(field, [], [0.2])


def test_find_dips_and_onset():
    radii = [0.1, 0.2, 0.3, 0.4]

    dips = find_dips(radii, [1.0, 2.0, 1.5, 3.0])

    assert len(dips) == 1
    assert (dips[0].r_prev, dips[0].r) == (0.2, 0.3)
    assert dips[0].drop == pytest.approx(0.25)
    assert monotone_onset(radii, [3.0, 1.0, 2.0, 2.5]) == pytest.approx(0.2)
    assert monotone_onset(radii, [1.0, 2.0, 3.0, 4.0]) == pytest.approx(0.1)


def test_radial_scan_columns_for_two_components():
    field = classified_pair(0, 1.0).sample(build_grid(h=0.05))

    scan = radial_scan(field, build_params(), 0.0, [0.2, 0.4, 0.6])

    assert scan.columns == list(BASE_COLUMNS)
    assert len(scan.rows()) == 3
    np.testing.assert_allclose(scan.column("r"), [0.2, 0.4, 0.6])
    assert scan.metadata["nu"] == pytest.approx(0.5)


def test_radial_scan_adds_columns_per_extra_pair():
    field = polynomial_pair(1, 1.0, (1.0,), (1.0,)).sample(build_grid(h=0.1))

    scan = radial_scan(field, build_params(k=3), 0.0, [0.3, 0.5], threads=2)

    assert scan.pairs == [(0, 1), (0, 2), (1, 2)]
    assert scan.columns[-4:] == ["Phi_seg_0_2", "Phi_pert_0_2", "Phi_seg_1_2", "Phi_pert_1_2"]
    assert all(len(row) == len(scan.columns) for row in scan.rows())


def test_radial_scan_rejects_component_mismatch():
    field = sqrt_extension().sample(build_grid(h=0.1))

    with pytest.raises(ValueError, match="params expect 2"):
        radial_scan(field, build_params(), 0.0, [0.2, 0.4])
