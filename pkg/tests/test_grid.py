import numpy as np
import pytest

from src.grid import Field, HalfGrid, VolumeField
from tests.factories import build_grid


def test_from_spacing_builds_uniform_grid():
    grid = build_grid(h=0.25)

    assert grid.shape == (9, 5)
    assert grid.h == pytest.approx(0.25)
    assert grid.x[0] == -1.0 and grid.x[-1] == 1.0
    assert grid.y[0] == 0.0


def test_grid_rejects_too_few_nodes():
    with pytest.raises(ValueError, match="grid too small"):
        HalfGrid(x_min=-1.0, x_max=1.0, y_max=1.0, nx=2, ny=5)


def test_grid_rejects_non_uniform_spacing():
    with pytest.raises(ValueError, match="non-uniform spacing"):
        HalfGrid(x_min=-1.0, x_max=1.0, y_max=1.0, nx=11, ny=21)


def test_refined_grid_keeps_coarse_nodes():
    grid = build_grid(h=0.25)
    fine = grid.refined()

    assert fine.h == pytest.approx(grid.h / 2)
    np.testing.assert_allclose(fine.x[::2], grid.x)
    np.testing.assert_allclose(fine.y[::2], grid.y)


def test_contains_half_ball():
    grid = build_grid(h=0.1)

    assert grid.contains_half_ball(0.0, 1.0)
    assert not grid.contains_half_ball(0.5, 0.6)
    assert not grid.contains_half_ball(0.0, 1.1)


def test_grid_mapping_round_trip_and_missing_key():
    grid = build_grid(h=0.1)

    assert HalfGrid.from_mapping(grid.to_dict()) == grid
    payload = grid.to_dict()
    payload.pop("ny")
    with pytest.raises(ValueError, match="Missing required key: ny"):
        HalfGrid.from_mapping(payload)


def test_field_is_read_only_and_promotes_single_component():
    grid = build_grid(h=0.5)
    field = Field(grid, np.ones(grid.shape))

    assert field.k == 1
    with pytest.raises(ValueError):
        field.values[0, 0, 0] = 2.0


def test_field_rejects_nan_and_wrong_shape():
    grid = build_grid(h=0.5)
    bad = np.ones((1,) + grid.shape)
    bad[0, 1, 1] = np.nan

    with pytest.raises(ValueError, match="non-finite"):
        Field(grid, bad)
    with pytest.raises(ValueError, match="does not match grid"):
        Field(grid, np.ones((1, 3, 3)))


def test_stack_component_and_trace():
    grid = build_grid(h=0.5)
    X, Y = grid.mesh()
    first, second = Field(grid, X), Field(grid, Y)
    both = Field.stack([first, second])

    assert both.k == 2
    np.testing.assert_array_equal(both.component(1).values[0], Y)
    np.testing.assert_array_equal(both.trace()[0], grid.x)
    np.testing.assert_array_equal(both.trace()[1], np.zeros(grid.nx))


def test_lift_repeats_planar_samples():
    grid = build_grid(h=0.25)
    X, Y = grid.mesh()
    planar = Field(grid, X * Y)
    volume = VolumeField.lift(planar, (-0.5, 0.5))

    assert volume.grid.shape == (grid.nx, 5, grid.ny)
    np.testing.assert_array_equal(volume.values[0, :, 3, :], planar.values[0])
