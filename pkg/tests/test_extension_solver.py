import logging

import numpy as np
import pytest

from src.blowup import segregation_mass
from src.extension_solver import (
    DirichletData,
    SolverMethod,
    SolverOptions,
    assemble_discrete_laplacian,
    interior_residual,
    neumann_residual,
    solve_linear_bvp,
    solve_system,
)
from src.grid import Field
from src.profiles import classified_pair
from tests.factories import build_grid, build_params


def _cos_pair(x, y):
    return np.stack([x, x**2 - y**2])


def test_linear_profile_is_reproduced_exactly():
    """v = y has dv/dnu = -1 on the flat boundary; the scheme is exact for it."""
    grid = build_grid(h=0.1)
    dirichlet = DirichletData(evaluator=lambda x, y: y)

    field = solve_linear_bvp(grid, dirichlet, 0.0, -1.0)

    X, Y = grid.mesh()
    np.testing.assert_allclose(field.values[0], Y, atol=1e-12)


def test_decoupled_system_recovers_cos_pair():
    """With beta = 0 and no reaction the Neumann-harmonic pair (x, x^2 - y^2) is returned."""
    grid = build_grid(h=0.1)
    params = build_params(k=2, beta=0.0)

    field, report = solve_system(grid, params, DirichletData(evaluator=_cos_pair))

    X, Y = grid.mesh()
    assert report.converged
    np.testing.assert_allclose(field.values, _cos_pair(X, Y), atol=1e-10)
    np.testing.assert_allclose(interior_residual(field), 0.0, atol=1e-8)


def test_robin_problem_obeys_maximum_principle():
    grid = build_grid(h=0.05)

    field = solve_linear_bvp(grid, DirichletData.constant(1.0), 10.0, 0.0)

    trace = field.trace()[0]
    assert np.all(field.values > 0)
    assert np.all(field.values <= 1.0 + 1e-12)
    assert trace[grid.nx // 2] < 0.5


def test_newton_and_picard_agree():
    grid = build_grid(h=0.1)
    params = build_params(k=2, beta=1.0)
    dirichlet = classified_pair().dirichlet()

    picard, picard_report = solve_system(
        grid, params, dirichlet, SolverOptions(tol=1e-10, max_iter=500)
    )
    newton, newton_report = solve_system(
        grid, params, dirichlet, SolverOptions(tol=1e-10, max_iter=40, method="newton")
    )

    assert picard_report.converged and newton_report.converged
    assert newton_report.method == SolverMethod.NEWTON.value
    assert newton_report.iterations < picard_report.iterations
    np.testing.assert_allclose(picard.values, newton.values, atol=1e-7)


def test_solved_field_satisfies_discrete_flux_condition():
    grid = build_grid(h=0.1)
    params = build_params(k=2, beta=10.0)
    options = SolverOptions(tol=1e-10, max_iter=40, method=SolverMethod.NEWTON)

    field, report = solve_system(grid, params, classified_pair().dirichlet(), options)

    residual = neumann_residual(field, params, scheme="discrete")
    assert report.converged
    assert residual.max_norm == pytest.approx(report.absolute_residual, rel=1e-6, abs=1e-12)


def test_stronger_competition_reduces_overlap():
    grid = build_grid(h=0.1)
    dirichlet = classified_pair().dirichlet()
    options = SolverOptions(tol=1e-10, max_iter=60, method=SolverMethod.NEWTON)
    overlaps = []
    previous = None
    for beta in (10.0, 100.0, 1000.0):
        params = build_params(k=2, beta=beta)
        previous, report = solve_system(grid, params, dirichlet, options, initial=previous)
        assert report.converged
        overlaps.append(segregation_mass(previous, params).overlap)

    assert overlaps[0] > overlaps[1] > overlaps[2]


def test_classified_pair_satisfies_segregated_condition():
    grid = build_grid(h=0.01)
    field = classified_pair().sample(grid)
    params = build_params(k=2, beta=0.0)

    segregated = neumann_residual(
        field, params, segregated=True, exclude_center=0.0, exclude_radius=0.1
    )
    plain = neumann_residual(field, params, exclude_center=0.0, exclude_radius=0.1)

    assert segregated.max_norm < 0.02
    assert plain.max_norm > 0.4
    assert np.isnan(segregated.per_node[0, 0])


def test_unconverged_solve_returns_best_iterate_with_warning(caplog):
    grid = build_grid(h=0.1)
    params = build_params(k=2, beta=10.0)

    with caplog.at_level(logging.WARNING):
        field, report = solve_system(
            grid, params, classified_pair().dirichlet(), SolverOptions(max_iter=2)
        )

    assert not report.converged
    assert report.residual == min(report.history)
    assert "did not converge" in caplog.text
    assert np.all(np.isfinite(field.values))


def test_initial_iterate_must_match():
    grid = build_grid(h=0.1)
    params = build_params(k=2, beta=1.0)
    wrong = Field(build_grid(h=0.2), np.zeros((2,) + build_grid(h=0.2).shape))

    with pytest.raises(ValueError, match="initial iterate"):
        solve_system(grid, params, classified_pair().dirichlet(), initial=wrong)


def test_dirichlet_data_validation():
    grid = build_grid(h=0.5)
    with pytest.raises(ValueError, match="evaluator or all three"):
        DirichletData(left=np.zeros((1, grid.ny)))
    with pytest.raises(ValueError, match="discontinuous"):
        DirichletData(
            left=np.zeros((1, grid.ny)), right=np.zeros((1, grid.ny)), top=np.ones((1, grid.nx))
        )
    sampled = DirichletData.from_field(classified_pair().sample(grid))
    assert sampled.boundary_values(grid).shape == (2,) + grid.shape


def test_constant_data_broadcasts_to_components():
    grid = build_grid(h=0.5)

    boundary = DirichletData.constant(2.0).boundary_values(grid, 3)

    assert boundary.shape == (3,) + grid.shape
    assert np.all(boundary[:, 0, :] == 2.0)
    assert np.all(boundary[:, 1:-1, 0] == 0.0)


def test_linear_solver_rejects_bad_coefficients():
    grid = build_grid(h=0.25)
    with pytest.raises(ValueError, match="nonnegative"):
        solve_linear_bvp(grid, DirichletData.constant(1.0), -1.0, 0.0)
    with pytest.raises(ValueError, match="mass"):
        solve_linear_bvp(grid, DirichletData.constant(1.0), 0.0, 0.0, mass=-1.0)


def test_solver_options_validation():
    with pytest.raises(ValueError, match="damping"):
        SolverOptions(damping=0.0)
    with pytest.raises(ValueError):
        SolverOptions(method="gauss-seidel")
    options = SolverOptions.from_mapping({"damping": 0.25, "unused": 1, "method": "newton"})
    assert options.damping == 0.25
    assert options.method is SolverMethod.NEWTON


def test_assembled_operator_is_symmetric():
    lap = assemble_discrete_laplacian(build_grid(h=0.25))

    difference = lap.matrix - lap.matrix.T
    assert abs(difference).max() == pytest.approx(0.0)
    assert lap.flat_rows.size == build_grid(h=0.25).nx - 2


def test_decoupled_solution_stays_within_its_edge_data():
    grid = build_grid(h=0.05)
    params = build_params(k=2, beta=0.0)
    dirichlet = DirichletData(
        evaluator=lambda x, y: np.stack([np.cos(3 * x) * (1 + y), np.sin(2 * x) + y])
    )

    field, report = solve_system(grid, params, dirichlet)

    assert report.converged
    for values in field.values:
        edges = np.concatenate([values[0, :], values[-1, :], values[:, -1]])
        assert np.all(values >= edges.min() - 1e-12)
        assert np.all(values <= edges.max() + 1e-12)


def _mirrored_ramps(x, y):
    return np.stack([np.clip(-x, 0.0, None) * (1 - y), np.clip(x, 0.0, None) * (1 - y)])


def test_mirrored_data_gives_mirrored_components():
    grid = build_grid(h=0.1)
    options = SolverOptions(tol=1e-10, max_iter=40, method=SolverMethod.NEWTON)

    field, report = solve_system(
        grid, build_params(k=2, beta=10.0), DirichletData(evaluator=_mirrored_ramps), options
    )

    assert report.converged
    np.testing.assert_allclose(field.values[0], field.values[1][::-1, :], atol=1e-8)


def test_half_damped_picard_residual_never_increases():
    grid = build_grid(h=0.1)
    options = SolverOptions(damping=0.5, tol=1e-9, max_iter=500)

    _, report = solve_system(
        grid, build_params(k=2, beta=1.0), classified_pair().dirichlet(), options
    )

    history = np.array(report.history)
    assert report.converged
    assert np.all(np.diff(history[1:]) <= 1e-12)
