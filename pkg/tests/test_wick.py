import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvvqe.fock import nongaussian_expectation_fock
from cvvqe.gaussian import GaussianParams, gaussian_covariance, vacuum_covariance
from cvvqe.ladder import LadderOp, a, adag, number, ops_product
from cvvqe.validation import check_closed_forms, check_wick_fock, validate
from cvvqe.wick import (
    AnnihilatedStateError,
    contraction_table,
    double_factorial,
    gaussian_expectation,
    monomial_expectation,
    nongaussian_expectation,
    pair_expectation,
    perfect_matchings,
    trace_matchings,
)

# frozen independent values: squeezed vacuum s = 0.5
SINH2 = np.sinh(0.5) ** 2
FROZEN_N = 0.2715403174075738
FROZEN_AADAG_AA = 0.49274274934111806  # 3 sinh^4 + sinh^2
FROZEN_SUBTRACTED_N = 1.8146209522


def test_frozen_single_mode_values():
    V = gaussian_covariance(GaussianParams([0.5], [0.0]))
    assert gaussian_expectation(ops_product([(0, True), (0, False)]), V) == pytest.approx(FROZEN_N, abs=1e-12)
    four = gaussian_expectation(([(0, True), (0, True), (0, False), (0, False)], 1.0), V)
    assert four == pytest.approx(FROZEN_AADAG_AA, abs=1e-12)
    assert four == pytest.approx(3 * SINH2**2 + SINH2, abs=1e-12)
    sub = nongaussian_expectation(number(0), a(0), V)
    assert sub == pytest.approx(FROZEN_SUBTRACTED_N, abs=1e-9)


def test_vacuum_contractions():
    V = vacuum_covariance(2)
    assert pair_expectation(LadderOp(0, False), LadderOp(0, True), V) == pytest.approx(1.0)
    assert pair_expectation(LadderOp(0, True), LadderOp(0, False), V) == pytest.approx(0.0)
    assert pair_expectation(LadderOp(0, False), LadderOp(1, True), V) == pytest.approx(0.0)


def test_commutator_in_table(rng):
    V = gaussian_covariance(GaussianParams(rng.uniform(-1, 1, 3), rng.uniform(0, 6, 9)))
    T = contraction_table(V)
    n = 3
    assert np.allclose(T[n:, :n] - T[:n, n:].T, np.eye(n))
    assert np.allclose(T[:n, :n], T[:n, :n].T)


@pytest.mark.parametrize("m", range(1, 6))
def test_matching_count(m):
    M = perfect_matchings(2 * m)
    assert len(M) == double_factorial(2 * m - 1)
    assert all(sorted(M[k].ravel().tolist()) == list(range(2 * m)) for k in range(len(M)))
    assert np.all(M[:, :, 0] < M[:, :, 1])


def test_odd_monomials_vanish(rng):
    V = gaussian_covariance(GaussianParams(rng.uniform(-1, 1, 2), rng.uniform(0, 6, 4)))
    assert monomial_expectation([(0, True), (1, False), (0, False)], 1.0, V).value == 0


def test_annihilated_state_raises():
    with pytest.raises(AnnihilatedStateError):
        nongaussian_expectation(number(0), a(0), vacuum_covariance(1))


def test_photon_added_vacuum():
    assert nongaussian_expectation(number(0), adag(0), vacuum_covariance(1)) == pytest.approx(1.0)
    two = adag(0) * adag(0)
    assert nongaussian_expectation(number(0), two, vacuum_covariance(1)) == pytest.approx(2.0)


mode_ops = st.lists(st.tuples(st.integers(0, 1), st.booleans()), min_size=0, max_size=4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.4, 0.4), min_size=2, max_size=2),
       st.lists(st.floats(0, 6.3), min_size=4, max_size=4), mode_ops,
       st.integers(0, 1))
def test_wick_matches_fock_property(s, theta, ops, prep_mode):
    params = GaussianParams(s, theta)
    observable = ops_product(ops)
    prep = a(prep_mode)
    try:
        w = nongaussian_expectation(observable, prep, gaussian_covariance(params))
    except AnnihilatedStateError:
        return
    f, _ = nongaussian_expectation_fock(observable, prep, params, 40, leakage_limit=1e-9)
    assert abs(w - f) <= 1e-7 * max(abs(f), 1)


def test_trace_lists_every_matching():
    lines = trace_matchings([(0, True), (0, True), (0, False), (0, False)],
                            gaussian_covariance(GaussianParams([0.5], [0.0])))
    assert lines[0].endswith("3 matchings")
    assert len(lines) == 5
    assert complex(lines[-1].split()[-1]) == pytest.approx(FROZEN_AADAG_AA)


def test_quick_validation_passes():
    assert all(c.passed for c in validate(quick=True))


def test_mutation_hook_detects_corrupted_sign():
    def corrupted(V):
        T = contraction_table(V)
        n = T.shape[0] // 2
        T[:n, n:] *= -1
        return T

    assert not check_closed_forms(corrupted).passed
    assert not check_wick_fock(5, max_modes=1, table_fn=corrupted).passed
    assert not all(c.passed for c in validate(quick=True, table_fn=corrupted))


@pytest.mark.slow
def test_wick_matches_converged_fock_reference():
    check = check_wick_fock(200)
    print(check)
    assert check.passed
