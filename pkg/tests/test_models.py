import numpy as np
import pytest

from cvvqe.fock import FockSpace, bose_hubbard_matrix, bose_hubbard_matrix_from_polynomial
from cvvqe.ladder import LadderOp
from cvvqe.models import BoseHubbardParams, bose_hubbard_polynomial


def test_bonds_open_and_periodic():
    assert BoseHubbardParams(3).bonds() == [(0, 1), (1, 2)]
    assert BoseHubbardParams(3, boundary="periodic").bonds() == [(0, 1), (1, 2), (2, 0)]
    with pytest.raises(ValueError):
        BoseHubbardParams(2, boundary="periodic")


@pytest.mark.parametrize("kwargs", [dict(n_sites=1), dict(boundary="twisted"),
                                    dict(hopping=float("nan"))])
def test_invalid_parameters(kwargs):
    with pytest.raises(ValueError):
        BoseHubbardParams(**kwargs)


def test_polynomial_is_hermitian():
    H = bose_hubbard_polynomial(BoseHubbardParams(3, 0.7, 1.3, 0.4, "periodic"))
    space = FockSpace(3, 3)
    M, Md = space.operator(H), space.operator(H.dagger())
    assert abs(M - M.conj().T).max() < 1e-12
    assert abs(M - Md).max() < 1e-12
    assert H.max_mode() == 2


def test_polynomial_coefficients():
    H = bose_hubbard_polynomial(BoseHubbardParams(2, 0.5, 2.0, 1.0))
    b0, b1 = LadderOp(0, False), LadderOp(1, False)
    d0, d1 = LadderOp(0, True), LadderOp(1, True)
    assert H.terms[(d0, b0, d0, b0)] == pytest.approx(1.0)
    assert H.terms[(d0, b0)] == pytest.approx(-2.0)
    assert H.terms[(d0, b1)] == pytest.approx(-0.5)
    assert H.terms[(b0, d1)] == pytest.approx(-0.5)


def test_matrix_constructions_agree():
    p = BoseHubbardParams(3, 0.7, 1.3, 0.4, "periodic")
    assert abs(bose_hubbard_matrix(p, 4) - bose_hubbard_matrix_from_polynomial(p, 4)).max() < 1e-12


def test_diagonal_is_onsite_energy():
    p = BoseHubbardParams(2, 0.0, 1.0, 1.0)
    H = bose_hubbard_matrix(p, 3).toarray()
    space = FockSpace(2, 3)
    n = space.occupation_table
    expected = (0.5 * n * (n - 1) - n).sum(axis=1)
    assert np.allclose(np.diag(H), expected)
