"""Classical simulator of continuous-variable VQE on photon-subtracted Gaussian states."""
from .gaussian import (
    BogoliubovMap,
    GaussianParams,
    apply_impurity,
    bogoliubov_of,
    gaussian_covariance,
    passive_from_params,
    purity,
    squeezing_spectrum,
    vacuum_covariance,
)
from .ladder import LadderOp, LadderPolynomial, a, adag, conjugate_by_gaussian, ipag_reduce, number
from .models import BoseHubbardParams, bose_hubbard_polynomial
from .wick import (
    AnnihilatedStateError,
    gaussian_expectation,
    nongaussian_expectation,
    pair_expectation,
    polynomial_expectation,
)

__version__ = "0.1.0"
