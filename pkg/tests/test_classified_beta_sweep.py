"""The shipped classified-pair sweep, solved at full resolution."""

import pytest

from src.experiment import HOLDER_DRIFT, run
from src.run_store import PROJECT_ROOT, RunManifest

DEFAULT_CONFIG = PROJECT_ROOT / "configs" / "classified-beta-sweep.toml"
BETAS = [10.0, 100.0, 1000.0, 10000.0]


@pytest.fixture(scope="module")
def sweep_run(tmp_path_factory) -> RunManifest:
    out = tmp_path_factory.mktemp("classified-beta-sweep")
    return run(DEFAULT_CONFIG, out, threads=2, stages=["scan", "sweep"])


def test_every_beta_converges(sweep_run):
    solves = [f"solve[beta={beta:g}]" for beta in BETAS]

    assert all(sweep_run.suites[name]["passed"] for name in solves)


def test_overlap_collapses_while_weighted_mass_stays_bounded(sweep_run):
    suite = sweep_run.suites["sweep_segregation"]

    assert suite["overlap_decreasing"]
    assert suite["overlap_ratio"] < 1e-2
    assert suite["weighted_mass_bounded"]
    assert suite["passed"]


def test_holder_seminorm_settles_at_large_beta(sweep_run):
    suite = sweep_run.suites["holder_uniform"]

    assert all(value > 0 for value in suite["seminorms"])
    assert suite["drift"] <= HOLDER_DRIFT
    assert suite["passed"]


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("family", ["almgren", "acf_perturbed"])
def test_monotonicity_holds_on_solved_fields(sweep_run, family, beta):
    suite = sweep_run.suites[f"{family}[beta={beta:g},x0=0]"]

    assert suite["passed"], suite["dips"]
