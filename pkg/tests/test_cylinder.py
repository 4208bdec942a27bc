import numpy as np
import pytest

from src.cylinder import CylinderSpec, pohozaev_cylinder_terms, pohozaev_residual_cylinder
from src.grid import Field, VolumeField
from src.monotonicity import pohozaev_residual_sphere
from src.profiles import classified_pair
from tests.factories import build_grid, build_params


def test_lifted_pair_reproduces_planar_residual():
    planar = classified_pair(0, 1.0).sample(build_grid(h=0.05))
    volume = VolumeField.lift(planar, (-0.5, 0.5))
    params = build_params()

    lifted = pohozaev_cylinder_terms(volume, params, CylinderSpec(1, 0.5, 0.25))
    expected = pohozaev_residual_sphere(planar, params, 0.0, [0.5])[0]

    assert lifted.residual == pytest.approx(expected, abs=1e-9)
    assert lifted.lateral == pytest.approx(0.0, abs=1e-12)
    assert lifted.terms["volume"] == pytest.approx(0.0, abs=1e-12)


def test_linear_field_satisfies_half_ball_identity():
    grid = build_grid(h=0.025)
    X, _ = grid.mesh()
    volume = VolumeField.lift(Field(grid, X), (-0.5, 0.5))

    residual = pohozaev_residual_cylinder(volume, build_params(k=1), CylinderSpec(2, 0.4, 0.0))

    assert abs(residual) < 0.03


def test_spec_validation():
    volume = VolumeField.lift(classified_pair(0, 1.0).sample(build_grid(h=0.1)), (-0.5, 0.5))
    params = build_params()

    with pytest.raises(ValueError, match="radius must be positive"):
        CylinderSpec(1, 0.0, 0.2)
    with pytest.raises(ValueError, match="half edge must be positive"):
        CylinderSpec(1, 0.3, 0.0)
    with pytest.raises(ValueError, match="split dimension out of range"):
        pohozaev_residual_cylinder(volume, params, CylinderSpec(3, 0.3, 0.2))
    with pytest.raises(ValueError, match="not contained in the grid"):
        pohozaev_residual_cylinder(volume, params, CylinderSpec(1, 0.3, 0.6))
    with pytest.raises(ValueError, match="params expect 3"):
        pohozaev_residual_cylinder(volume, build_params(k=3), CylinderSpec(1, 0.3, 0.2))


def test_result_payload_lists_terms():
    volume = VolumeField.lift(classified_pair(0, 1.0).sample(build_grid(h=0.1)), (-0.5, 0.5))

    payload = pohozaev_cylinder_terms(volume, build_params(), CylinderSpec(1, 0.4, 0.2)).to_dict()

    assert payload["split"] == 1
    assert set(payload["terms"]) == {
        "volume",
        "surface",
        "flat_reaction",
        "flat_interaction",
        "sphere_reaction",
        "sphere_interaction",
    }
    assert np.isfinite(payload["residual"])
