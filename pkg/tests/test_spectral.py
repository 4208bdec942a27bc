import logging
import math

import numpy as np
import pytest

from src.spectral import (
    RegionKind,
    SpectralProblem,
    default_theta_grid,
    lambda1,
    lambda1_refinement,
    nu_acf_estimate,
    phi_caps,
)


@pytest.mark.parametrize(
    ("problem", "expected"),
    [
        (SpectralProblem.full(1), 0.0),
        (SpectralProblem.cap(1, math.pi / 2), 0.25),
        (SpectralProblem.empty(1), 1.0),
    ],
)
def test_half_circle_closed_forms(problem, expected):
    assert lambda1(problem).lambda1 == pytest.approx(expected)


def test_cap_endpoints_collapse_to_full_and_empty():
    assert SpectralProblem.cap(2, 0.0).region is RegionKind.EMPTY
    assert SpectralProblem.cap(2, math.pi).region is RegionKind.FULL


def test_problem_validation():
    with pytest.raises(ValueError, match="dimension must be 1 or 2"):
        SpectralProblem(dimension=3)
    with pytest.raises(ValueError, match="theta must lie"):
        SpectralProblem(dimension=2, theta=4.0)
    with pytest.raises(ValueError, match="even n_azimuth"):
        SpectralProblem(dimension=2, n_azimuth=9)


def test_phi_is_one_half_for_every_planar_cap():
    scan = phi_caps(1, default_theta_grid(17))

    np.testing.assert_allclose(scan.phi, 0.5)
    assert len(scan.rows()) == 17


def test_planar_partition_value_is_one_half():
    estimate = nu_acf_estimate(1)

    assert estimate.value == pytest.approx(0.5)
    assert estimate.cap_minimum is None


def test_hemisphere_reference_eigenvalues(caplog):
    full = lambda1(SpectralProblem.full(2))
    half = lambda1(SpectralProblem.cap(2, math.pi / 2))
    with caplog.at_level(logging.WARNING, logger="src.spectral"):
        empty = lambda1(SpectralProblem.empty(2))

    assert abs(full.lambda1) <= 1e-3
    assert half.lambda1 == pytest.approx(0.75, rel=0.02)
    assert half.gamma == pytest.approx(0.5, rel=0.02)
    assert empty.lambda1 == pytest.approx(2.0, rel=0.02)
    assert empty.gamma == pytest.approx(1.0, rel=0.02)
    assert half.one_signed and empty.one_signed
    assert "2N = 4 disagrees" in caplog.text


def test_cap_with_too_few_constrained_nodes_is_rejected():
    problem = SpectralProblem.cap(2, math.pi - math.pi / 16, n_azimuth=16, n_polar=8)

    with pytest.raises(ValueError, match="mesh too coarse"):
        lambda1(problem)


def test_edge_aligned_caps_average_both_edge_treatments():
    problem = SpectralProblem.cap(2, math.pi / 2, n_azimuth=32, n_polar=16)

    assert problem.edge_aligned()
    closed = int(problem.free_equator().sum())
    opened = int(problem.free_equator(include_edge=True).sum())
    assert opened == closed + 2


def test_refinement_converges_at_second_order():
    rows = lambda1_refinement(SpectralProblem.empty(2, n_azimuth=32, n_polar=16), levels=3)
    values = [value for _, _, value in rows]

    assert [row[:2] for row in rows] == [(32, 16), (64, 32), (128, 64)]
    assert abs(values[1] - values[2]) < abs(values[0] - values[1]) / 2.5


def test_nu_estimate_reuses_a_precomputed_scan():
    mesh = {"n_azimuth": 32, "n_polar": 16}
    thetas = np.linspace(math.pi / 4, 3 * math.pi / 4, 3)
    scan = phi_caps(2, thetas, **mesh)

    estimate = nu_acf_estimate(2, thetas, scan=scan, **mesh)

    assert estimate.cap_minimum == pytest.approx(scan.min_phi)
    assert estimate.value == pytest.approx(min(scan.min_phi, estimate.degenerate))
    assert estimate.degenerate == pytest.approx(0.5, rel=0.05)
    assert "upper bound" in estimate.to_dict()["caveat"]


def test_nu_estimate_rejects_scan_of_other_dimension():
    scan = phi_caps(1, default_theta_grid(5))

    with pytest.raises(ValueError, match="cap scan is for N=1"):
        nu_acf_estimate(2, n_azimuth=32, n_polar=16, scan=scan)


def test_phi_caps_rejects_angles_outside_range():
    with pytest.raises(ValueError, match="theta grid"):
        phi_caps(1, [-1.0])


def test_first_eigenvalue_decreases_as_the_cap_opens():
    thetas = [0.0, math.pi / 4, 3 * math.pi / 8, math.pi / 2, 5 * math.pi / 8, 3 * math.pi / 4]
    thetas.append(math.pi)

    results = [lambda1(SpectralProblem.cap(2, t, n_azimuth=32, n_polar=16)) for t in thetas]

    values = np.array([result.lambda1 for result in results])
    assert np.all(np.diff(values) <= 1e-9)
    assert values[0] > values[-1]


@pytest.mark.parametrize("dimension", [1, 2])
def test_homogeneity_exponent_solves_the_indicial_equation(dimension):
    mesh = {"n_azimuth": 32, "n_polar": 16} if dimension == 2 else {}
    thetas = [math.pi / 4, math.pi / 2, 3 * math.pi / 4]

    for theta in thetas:
        result = lambda1(SpectralProblem.cap(dimension, theta, **mesh))
        g = result.gamma
        assert g * (g + dimension - 1) == pytest.approx(result.lambda1, abs=1e-8)
