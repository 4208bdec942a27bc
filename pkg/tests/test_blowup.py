import numpy as np
import pytest

from src.blowup import (
    BLOCK_SIZE,
    HolderRegion,
    RescaleSpec,
    decay_check,
    eta_cutoff,
    fit_growth_exponent,
    holder_seminorm,
    rescale,
    segregation_mass,
    solve_decay_problem,
    zero_set,
)
from src.constants import DECAY_BOUND_CONSTANT
from src.grid import Field
from src.monotonicity import almgren_segregated
from src.profiles import classified_pair, linear_y, sqrt_extension
from tests.factories import build_grid, build_params

GROWTH_RADII = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]


@pytest.fixture(scope="module")
def decay_field() -> Field:
    return solve_decay_problem(10.0, 0.0, 1.0 / 200.0)


def test_eta_cutoff_profile():
    rho = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.2])

    np.testing.assert_allclose(eta_cutoff(rho), [1, 1, 1, 0.5, 0, 0])


@pytest.mark.parametrize(
    ("profile", "expected"),
    [(classified_pair(0, 1.0), 0.5), (linear_y(2), 1.0)],
)
def test_growth_exponent_of_homogeneous_profiles(profile, expected):
    field = profile.sample(build_grid(h=0.01))
    series = almgren_segregated(field, 0.0, GROWTH_RADII)

    fit = fit_growth_exponent(series.radii, series.H)

    assert fit.exponent == pytest.approx(expected, abs=0.02)
    assert fit.count == len(GROWTH_RADII)
    assert set(fit.to_dict()) == {"nu_hat", "slope", "intercept", "residual", "count"}


def test_growth_fit_window_and_errors():
    radii = np.array([0.1, 0.2, 0.4, 0.8])
    H = radii**3

    assert fit_growth_exponent(radii, H, (0.15, 0.9)).exponent == pytest.approx(1.5)
    with pytest.raises(ValueError, match="at least 3 radii"):
        fit_growth_exponent(radii, H, (0.3, 0.9))
    with pytest.raises(ValueError, match="H must be positive"):
        fit_growth_exponent(radii, [1.0, 0.0, 1.0, 2.0])
    with pytest.raises(ValueError, match="same length"):
        fit_growth_exponent(radii, H[:3])


def test_holder_seminorm_of_linear_trace():
    grid = build_grid(h=0.05)
    X, _ = grid.mesh()

    estimate = holder_seminorm(Field(grid, X), 0.5, HolderRegion(radius=0.5, flat_only=True))

    assert estimate.exact
    assert estimate.value == pytest.approx(1.0)
    np.testing.assert_allclose(estimate.points, [[-0.5, 0.0], [0.5, 0.0]])


def test_strided_holder_search_stays_close_to_exact():
    field = sqrt_extension().sample(build_grid(h=0.05))
    region = HolderRegion(radius=0.5)

    exact = holder_seminorm(field, 0.5, region)
    strided = holder_seminorm(field, 0.5, region, subsample=2, threads=2)

    assert not strided.exact
    assert strided.value <= exact.value + 1e-12
    assert strided.value >= 0.95 * exact.value


def test_exact_holder_search_matches_all_pairs_across_blocks():
    grid = build_grid(h=0.025)
    field = classified_pair(0, 1.0).sample(grid)
    region = HolderRegion(radius=0.5)
    index, coords = region.select(grid)
    values = field.values.reshape(field.k, -1)[:, index]
    distance = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)
    apart = distance > 0
    jumps = np.abs(values[:, :, None] - values[:, None, :])[:, apart]

    estimate = holder_seminorm(field, 0.45, region, threads=2)

    assert index.size > 2 * BLOCK_SIZE
    assert estimate.exact
    assert estimate.value == pytest.approx(np.max(jumps / distance[apart] ** 0.45), rel=1e-12)


def test_holder_seminorm_grows_with_region_and_ignores_constant_shift():
    grid = build_grid(h=0.025)
    field = sqrt_extension().sample(grid)

    small = holder_seminorm(field, 0.45, HolderRegion(radius=0.3))
    large = holder_seminorm(field, 0.45, HolderRegion(radius=0.6))
    shifted = holder_seminorm(Field(grid, field.values + 3.0), 0.45, HolderRegion(radius=0.3))

    assert large.value >= small.value
    assert shifted.value == pytest.approx(small.value, rel=1e-9)


def test_rescale_carries_the_holder_seminorm_over():
    source = sqrt_extension().sample(build_grid(h=0.01))
    spec = RescaleSpec(base=0.0, scale=0.5, alpha=0.5, spacing=0.02)

    blown_up = rescale(source, spec)

    before = holder_seminorm(source, 0.5, HolderRegion(radius=0.4))
    after = holder_seminorm(blown_up, 0.5, HolderRegion(radius=0.8))
    assert after.value == pytest.approx(before.value, rel=0.02)


def test_holder_seminorm_validation():
    field = sqrt_extension().sample(build_grid(h=0.1))

    with pytest.raises(ValueError, match="alpha must lie"):
        holder_seminorm(field, 1.0)
    with pytest.raises(ValueError, match="subsample stride"):
        holder_seminorm(field, 0.5, subsample=0)
    with pytest.raises(ValueError, match="no nodes"):
        holder_seminorm(field, 0.5, HolderRegion(center=(0.05, 0.55), radius=0.01))


def test_segregation_mass_of_constant_levels():
    grid = build_grid(h=0.1)
    field = Field(grid, np.stack([np.ones(grid.shape), 2.0 * np.ones(grid.shape)]))

    mass = segregation_mass(field, build_params(beta=5.0))

    assert mass.overlap == pytest.approx(8.0)
    assert mass.weighted == pytest.approx(40.0)
    with pytest.raises(ValueError, match="not inside the flat boundary"):
        segregation_mass(field, build_params(), (-2.0, 0.0))


def test_classified_pair_has_no_overlap():
    field = classified_pair(0, 1.0).sample(build_grid(h=0.05))

    assert segregation_mass(field, build_params(beta=1.0)).overlap == pytest.approx(0.0, abs=1e-20)


def test_zero_set_of_classified_pair_is_the_origin():
    grid = build_grid(h=0.005)
    zeros = zero_set(classified_pair(0, 1.0).sample(grid))

    assert not zeros.empty
    assert zeros.distance(0.0) == pytest.approx(0.0, abs=1e-12)
    assert all(abs(a) < 0.2 and abs(b) < 0.2 for a, b in zeros.clusters())
    assert zeros.distances().shape == grid.x.shape


def test_zero_set_tolerance_ignores_square_root_slope_spike():
    grid = build_grid(h=0.005)
    field = classified_pair(0, 1.0).sample(grid)
    steepest = np.max(np.abs(np.gradient(field.trace(), grid.h, axis=1)))

    zeros = zero_set(field)

    assert zeros.tol < 0.5 * 10.0 * grid.h * steepest
    assert np.max(np.abs(zeros.x)) < 0.02


def test_zero_set_of_positive_field_is_empty():
    grid = build_grid(h=0.1)
    zeros = zero_set(Field(grid, np.ones(grid.shape)))

    assert zeros.empty
    assert zeros.distance(0.3) == float("inf")
    with pytest.raises(ValueError, match="tolerance must be positive"):
        zero_set(Field(grid, np.ones(grid.shape)), tol=0.0)


def test_rescale_preserves_homogeneous_profile():
    grid = build_grid(h=0.02)
    field = classified_pair(0, 1.0).sample(grid)

    blown = rescale(field, RescaleSpec(base=0.0, scale=0.5))

    X, Y = grid.mesh()
    away = np.hypot(X, Y) >= 0.1
    np.testing.assert_allclose(blown.values[:, away], field.values[:, away], atol=0.01)


def test_rescale_validation():
    field = classified_pair(0, 1.0).sample(build_grid(h=0.1))

    with pytest.raises(ValueError, match="sample out of source domain"):
        rescale(field, RescaleSpec(base=0.5, scale=1.0))
    with pytest.raises(ValueError, match="scale must be positive"):
        RescaleSpec(base=0.0, scale=0.0)
    with pytest.raises(ValueError, match="alpha must lie"):
        RescaleSpec(base=0.0, scale=0.5, alpha=1.0)


def test_decay_check_brackets_flat_values(decay_field):
    report = decay_check(decay_field, 10.0)
    payload = report.to_dict()

    assert report.lower_margin >= 0
    assert report.passed
    assert report.bound_constant == pytest.approx(DECAY_BOUND_CONSTANT)
    assert 0.1 < report.sup_flat < 0.2
    assert payload["literal_passed"] is False
    assert report.sup_arc == pytest.approx(1.0, abs=0.01)


def test_decay_check_literal_constant_fails(decay_field):
    report = decay_check(decay_field, 10.0, bound_constant=1.0)

    assert not report.passed


def test_decay_check_validation():
    with pytest.raises(ValueError, match="M must be positive"):
        solve_decay_problem(0.0)
    with pytest.raises(ValueError, match="single-component"):
        decay_check(classified_pair(0, 1.0).sample(build_grid(h=0.1)), 10.0)
