import numpy as np
import pytest

from cvvqe.gaussian import GaussianParams, gaussian_covariance, purity
from cvvqe.ladder import number
from cvvqe.models import BoseHubbardParams, bose_hubbard_polynomial
from cvvqe.vqe import (
    AnsatzConfig,
    EnergyObjective,
    OptimizerConfig,
    circuit_subtraction_probability,
    energy,
    global_state,
    optimize,
    resource_report,
    squeezing_cost,
    subtraction_probability,
)

H2 = bose_hubbard_polynomial(BoseHubbardParams(2, 1.0, 1.0, 1.0))


def test_ansatz_validation():
    with pytest.raises(ValueError):
        AnsatzConfig(2, ((2, False),))
    with pytest.raises(ValueError):
        AnsatzConfig(2, purity_target=0.0)
    ans = AnsatzConfig.subtractions(3, 2, mode=1, layers=2)
    assert ans.n_params == 2 * 12
    assert len(ans.split(np.zeros(24))) == 2
    with pytest.raises(ValueError):
        ans.split(np.zeros(5))


def test_zero_params_vacuum_energy():
    assert energy(np.zeros(6), AnsatzConfig(2), H2) == pytest.approx(0.0)


def test_energy_matches_closed_form_single_mode():
    ans = AnsatzConfig.subtractions(1, 1)
    x = GaussianParams([0.5], [0.0]).to_vector()
    assert energy(x, ans, number(0)) == pytest.approx(1 + 3 * np.sinh(0.5) ** 2)


def test_safe_objective_on_annihilation():
    obj = EnergyObjective(AnsatzConfig.subtractions(2, 1), H2)
    assert obj.safe(np.zeros(6)) == np.inf


def test_optimize_is_deterministic_and_below_start():
    ans = AnsatzConfig.subtractions(2, 1)
    opt = OptimizerConfig(restarts=2, rng_seed=4)
    r1, r2 = optimize(ans, H2, opt), optimize(ans, H2, opt)
    assert r1.best_energy == r2.best_energy
    assert np.array_equal(r1.best_params, r2.best_params)
    assert r1.energy_trace[-1] <= r1.energy_trace[0]
    assert len(r1.restart_energies) == 2
    assert r1.resources.ladder_op_count == 1


def test_two_layer_optimization_runs():
    ans = AnsatzConfig.subtractions(2, 1, layers=2)
    res = optimize(ans, H2, OptimizerConfig(restarts=1, max_iterations=30, rng_seed=2))
    assert np.isfinite(res.best_energy)
    assert res.resources.ladder_op_count == 2


def test_squeezing_cost_in_db():
    V = gaussian_covariance(GaussianParams([0.5, -0.25], [0.3, 0.1, 0.2, 0.9]))
    expected = 10 * np.log10(np.e) * 2 * 0.75
    assert squeezing_cost(V) == pytest.approx(expected)
    assert squeezing_cost(np.eye(4)) == pytest.approx(0.0, abs=1e-12)


def test_subtraction_probability_weak_tap():
    ans = AnsatzConfig.subtractions(1, 1, tap_reflectivity=0.05)
    V = gaussian_covariance(GaussianParams([0.5], [0.0]))
    assert subtraction_probability(ans, V) == pytest.approx(0.05 * np.sinh(0.5) ** 2)
    two = AnsatzConfig.subtractions(1, 2, tap_reflectivity=0.05)
    assert subtraction_probability(two, V) == pytest.approx(
        0.05 * np.sinh(0.5) ** 2 * 0.05 * (1 + 3 * np.sinh(0.5) ** 2))
    assert subtraction_probability(AnsatzConfig(1), V) == 1.0


def test_circuit_probability_single_layer_matches(rng):
    ans = AnsatzConfig.subtractions(2, 2)
    x = rng.normal(0, 0.4, ans.n_params)
    assert circuit_subtraction_probability(x, ans) == pytest.approx(
        subtraction_probability(ans, global_state(x, ans)[1]))


def test_resource_report_purity(rng):
    ans = AnsatzConfig.subtractions(2, 1, purity_target=0.8)
    x = rng.normal(0, 0.4, ans.n_params)
    V_pure, V, _ = global_state(x, ans)
    assert purity(V_pure) == pytest.approx(1.0)
    assert resource_report(x, ans).purity == pytest.approx(0.8, abs=1e-12)
