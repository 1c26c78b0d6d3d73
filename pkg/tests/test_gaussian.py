import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvvqe.gaussian import (
    BogoliubovMap,
    GaussianParams,
    apply_impurity,
    bogoliubov_of,
    format_covariance,
    gaussian_covariance,
    gaussian_symplectic,
    is_physical,
    is_symplectic,
    mesh_pairs,
    n_mesh_elements,
    n_params,
    omega,
    parse_covariance,
    passive_from_params,
    passive_unitary,
    purity,
    squeezing_spectrum,
    symplectic_eigenvalues,
    vacuum_covariance,
)

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)
squeeze = st.floats(-1.2, 1.2, allow_nan=False)


@st.composite
def gaussian_params(draw, max_modes=4):
    n = draw(st.integers(1, max_modes))
    s = draw(st.lists(squeeze, min_size=n, max_size=n))
    theta = draw(st.lists(angles, min_size=n * n, max_size=n * n))
    return GaussianParams(s, theta)


def test_vacuum_is_identity():
    assert np.array_equal(vacuum_covariance(3), np.eye(6))
    assert purity(vacuum_covariance(3)) == pytest.approx(1.0)


def test_single_mode_squeezer_variances():
    V = gaussian_covariance(GaussianParams([0.3], [0.0]))
    assert V[0, 0] == pytest.approx(np.exp(-0.6))
    assert V[1, 1] == pytest.approx(np.exp(0.6))


def test_mesh_layout_counts():
    for n in range(1, 7):
        assert len(mesh_pairs(n)) == n_mesh_elements(n) == n * (n - 1) // 2
        assert n_params(n) == n * n + n
    assert mesh_pairs(4) == [(0, 1), (2, 3), (1, 2), (0, 1), (2, 3), (1, 2)]


def test_param_vector_roundtrip(rng):
    x = rng.normal(size=n_params(3))
    assert np.array_equal(GaussianParams.from_vector(x, 3).to_vector(), x)
    with pytest.raises(ValueError):
        GaussianParams([0.1, 0.2], [0.0])


@settings(max_examples=60, deadline=None)
@given(gaussian_params())
def test_gaussian_covariance_is_pure_and_physical(params):
    V = gaussian_covariance(params)
    assert is_physical(V)
    assert purity(V) == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(symplectic_eigenvalues(V), 1.0, atol=1e-7)


@settings(max_examples=60, deadline=None)
@given(gaussian_params())
def test_symplectic_and_passive(params):
    assert is_symplectic(gaussian_symplectic(params), tol=1e-8)
    U = passive_unitary(params.passive, params.n_modes)
    assert np.allclose(U @ U.conj().T, np.eye(params.n_modes))
    O = passive_from_params(params.passive, params.n_modes)
    assert np.allclose(O @ O.T, np.eye(2 * params.n_modes))


@settings(max_examples=60, deadline=None)
@given(gaussian_params())
def test_bogoliubov_roundtrip_and_ccr(params):
    bmap = bogoliubov_of(params)
    assert bmap.ccr_residual() < 1e-9
    assert np.allclose(bmap.symplectic(), gaussian_symplectic(params))
    assert np.allclose(bmap.covariance(), gaussian_covariance(params), atol=1e-9)
    ident = bmap @ bmap.inverse()
    assert np.allclose(ident.E, np.eye(params.n_modes), atol=1e-9)
    assert np.allclose(ident.F, 0, atol=1e-9)


def test_bogoliubov_composition_matches_symplectic_product(rng):
    p1 = GaussianParams(rng.uniform(-1, 1, 2), rng.uniform(0, 6, 4))
    p2 = GaussianParams(rng.uniform(-1, 1, 2), rng.uniform(0, 6, 4))
    S1, S2 = gaussian_symplectic(p1), gaussian_symplectic(p2)
    composed = bogoliubov_of(p2) @ bogoliubov_of(p1)
    assert np.allclose(composed.symplectic(), S2 @ S1)
    assert np.allclose(BogoliubovMap.from_symplectic(S1).E, bogoliubov_of(p1).E)


def test_squeezer_bogoliubov_is_cosh_minus_sinh():
    bmap = bogoliubov_of(GaussianParams([0.7], [0.0]))
    assert bmap.E[0, 0] == pytest.approx(np.cosh(0.7))
    assert bmap.F[0, 0] == pytest.approx(-np.sinh(0.7))


@settings(max_examples=40, deadline=None)
@given(gaussian_params(max_modes=3), st.floats(0.05, 1.0))
def test_impurity_hits_target(params, p):
    V = apply_impurity(gaussian_covariance(params), p)
    assert purity(V) == pytest.approx(p, rel=1e-9)
    assert is_physical(V)


def test_impurity_requires_pure_input():
    with pytest.raises(ValueError):
        apply_impurity(2 * np.eye(2), 0.5)


@settings(max_examples=40, deadline=None)
@given(gaussian_params(max_modes=3))
def test_squeezing_spectrum_recovers_squeezers(params):
    r = np.sort(squeezing_spectrum(gaussian_covariance(params)))
    expected = np.sort(np.exp(-2 * np.abs(np.asarray(params.squeezings))))
    assert np.allclose(r, expected, rtol=1e-7)


def test_omega_and_text_roundtrip(rng):
    assert np.allclose(omega(2) @ omega(2), -np.eye(4))
    V = gaussian_covariance(GaussianParams(rng.normal(size=2), rng.normal(size=4)))
    assert np.allclose(parse_covariance(format_covariance(V)), V, rtol=1e-15)
