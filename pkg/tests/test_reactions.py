import numpy as np
import pytest

from src.exponents import gamma
from src.reactions import (
    CallableReaction,
    GrossPitaevskiiReaction,
    LogisticReaction,
    ReactionFactory,
    ReactionKind,
    SystemParams,
    ZeroReaction,
)
from tests.factories import build_params


def test_factory_lists_config_families():
    supported = ReactionFactory.get_supported_types()

    assert {"zero", "linear", "gross-pitaevskii", "logistic"} <= set(supported)
    with pytest.raises(ValueError, match="Unsupported reaction kind"):
        ReactionFactory.create("cubic-quintic", {}, 2)


@pytest.mark.parametrize(
    "kind,payload",
    [
        ("zero", {}),
        ("linear", {"lambda": [0.5, -1.0]}),
        ("gross-pitaevskii", {"omega": [1.0, 2.0], "lambda": [0.5, -1.0]}),
        ("logistic", {"rate": [1.0, 3.0], "capacity": [2.0, 0.5]}),
    ],
)
def test_primitives_integrate_reactions(kind, payload):
    """F_i(0) = 0 and F_i' = f_i for every configured family."""
    reaction = ReactionFactory.create(kind, payload, 2)

    reaction.check_primitive(2)


def test_check_primitive_detects_inconsistent_callable():
    reaction = CallableReaction(
        f=lambda i, s: s,
        primitive_fn=lambda i, s: s**2,
        derivative_fn=lambda i, s: np.ones_like(s),
    )

    with pytest.raises(ValueError, match="integral of f"):
        reaction.check_primitive(1)


def test_linear_family_is_gross_pitaevskii_without_cubic_term():
    reaction = ReactionFactory.create("linear", {"lambda": [2.0]}, 1)

    assert reaction.kind is ReactionKind.LINEAR
    assert float(reaction.value(0, np.asarray(3.0))) == pytest.approx(6.0)
    assert float(reaction.derivative(0, np.asarray(3.0))) == pytest.approx(2.0)


def test_logistic_values_and_lipschitz_bound():
    reaction = LogisticReaction(rate=(2.0,), capacity=(1.0,))

    assert float(reaction.value(0, np.asarray(0.5))) == pytest.approx(0.5)
    assert float(reaction.value(0, np.asarray(1.0))) == pytest.approx(0.0)
    assert reaction.lipschitz_bound(0.0, 1.0, 1) == pytest.approx(2.0)


def test_logistic_rejects_nonpositive_capacity():
    with pytest.raises(ValueError, match="capacity must be positive"):
        LogisticReaction(rate=(1.0,), capacity=(0.0,))


def test_coefficient_count_must_match_components():
    with pytest.raises(ValueError, match="must have 2 entries"):
        ReactionFactory.create("gross-pitaevskii", {"omega": [1.0, 2.0, 3.0]}, 2)


def test_zero_reaction_is_zero():
    assert ZeroReaction().is_zero()
    assert GrossPitaevskiiReaction(omega=(0.0,), lam=(0.0,)).is_zero()
    assert not GrossPitaevskiiReaction(omega=(1.0,), lam=(0.0,)).is_zero()


def test_system_params_validation():
    with pytest.raises(ValueError, match="beta must be finite and nonnegative"):
        build_params(beta=-1.0)
    with pytest.raises(ValueError, match="symmetric"):
        build_params(a=[[1.0, 1.0], [2.0, 1.0]])
    with pytest.raises(ValueError, match="positive"):
        build_params(a=[[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="reaction covers 3 components"):
        SystemParams(k=2, beta=1.0, reaction=GrossPitaevskiiReaction((1.0,) * 3, (0.0,) * 3))


def test_coupling_and_interaction_density_use_off_diagonal_weights():
    params = build_params(k=3, beta=2.0, a=[[5.0, 1.0, 2.0], [1.0, 5.0, 3.0], [2.0, 3.0, 5.0]])
    stack = np.array([[1.0], [2.0], [3.0]])

    coupling = params.coupling(stack)
    np.testing.assert_allclose(coupling[:, 0], [1 * 4 + 2 * 9, 1 * 1 + 3 * 9, 2 * 1 + 3 * 4])
    density = params.interaction_density(stack)
    assert density[0] == pytest.approx(1 * 1 * 4 + 2 * 1 * 9 + 3 * 4 * 9)


def test_with_beta_and_decoupling():
    params = build_params(beta=0.0)

    assert params.is_decoupled()
    assert not params.with_beta(5.0).is_decoupled()
    assert params.with_beta(5.0).to_dict()["beta"] == 5.0


@pytest.mark.parametrize("dimension", range(1, 11))
def test_gamma_endpoints(dimension):
    """gamma(0) = 0 and gamma(N) = 1 in every dimension."""
    assert gamma(0.0, dimension) == pytest.approx(0.0, abs=1e-12)
    assert gamma(float(dimension), dimension) == pytest.approx(1.0, abs=1e-12)


def test_gamma_solves_quadratic_and_rejects_negative():
    value = gamma(0.75, 2)

    assert value * (value + 1) == pytest.approx(0.75)
    assert gamma(0.25, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        gamma(-0.1, 1)
    with pytest.raises(ValueError):
        gamma(1.0, 0)
