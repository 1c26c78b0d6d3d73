"""Zero-mean Gaussian states in the covariance-matrix picture.

Quadratures are x = a + a^dagger and p = i(a^dagger - a), stored in xxpp
order, so the vacuum covariance is the identity and [x, p] = 2i.  See
``docs/CONVENTIONS.md`` for the sign conventions shared with the Fock oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12
PURE_TOL = 1e-6


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form [[0, I], [-I, 0]] in xxpp order."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def vacuum_covariance(n_modes: int) -> np.ndarray:
    if n_modes < 1:
        raise ValueError(f"n_modes must be positive, got {n_modes}")
    return np.eye(2 * n_modes)


def n_modes_of(V: np.ndarray) -> int:
    dim = V.shape[0]
    if V.ndim != 2 or V.shape[1] != dim or dim % 2:
        raise ValueError(f"covariance must be 2N x 2N, got shape {V.shape}")
    return dim // 2


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of V (moduli of the eigenvalues of i Omega V), ascending."""
    n = n_modes_of(V)
    ev = np.abs(np.linalg.eigvals(1j * omega(n) @ V))
    # eigenvalues come in +/- pairs; keep one of each
    return np.sort(ev)[::2]


def is_physical(V: np.ndarray, tol: float = 1e-9) -> bool:
    if np.max(np.abs(V - V.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(V))):
        return False
    return bool(np.all(symplectic_eigenvalues(V) >= 1.0 - tol))


def is_symplectic(S: np.ndarray, tol: float = 1e-10) -> bool:
    w = omega(S.shape[0] // 2)
    return bool(np.max(np.abs(S @ w @ S.T - w)) <= tol)


# ---------------------------------------------------------------------------
# parameters


def n_mesh_elements(n_modes: int) -> int:
    return n_modes * (n_modes - 1) // 2


def mesh_pairs(n_modes: int) -> list[tuple[int, int]]:
    """Mode pairs of the rectangular interferometer mesh, in application order.

    Column ``c`` couples (m, m+1) for every m of parity c % 2; N columns
    give N(N-1)/2 two-mode elements.
    """
    return [(m, m + 1) for col in range(n_modes) for m in range(col % 2, n_modes - 1, 2)]


@dataclass(frozen=True)
class GaussianParams:
    """Squeezings s_j (x variance factor e^{-2 s_j}) and N^2 passive-mesh angles.

    Passive layout: one (mixing angle, internal phase) pair per mesh element
    in :func:`mesh_pairs` order, followed by N output phases.
    """

    squeezings: np.ndarray
    passive: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.squeezings, dtype=float).reshape(-1)
        theta = np.asarray(self.passive, dtype=float).reshape(-1)
        if s.size < 1:
            raise ValueError("need at least one mode")
        if theta.size != s.size**2:
            raise ValueError(f"{s.size} modes need {s.size**2} passive parameters, got {theta.size}")
        object.__setattr__(self, "squeezings", s)
        object.__setattr__(self, "passive", theta)

    @property
    def n_modes(self) -> int:
        return self.squeezings.size

    @classmethod
    def identity(cls, n_modes: int) -> GaussianParams:
        return cls(np.zeros(n_modes), np.zeros(n_modes**2))

    @classmethod
    def from_vector(cls, vec, n_modes: int) -> GaussianParams:
        vec = np.asarray(vec, dtype=float)
        if vec.size != n_modes**2 + n_modes:
            raise ValueError(f"expected {n_modes**2 + n_modes} parameters, got {vec.size}")
        return cls(vec[:n_modes], vec[n_modes:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.squeezings, self.passive])


def n_params(n_modes: int) -> int:
    return n_modes**2 + n_modes


# ---------------------------------------------------------------------------
# passive transformations


def mesh_element_unitary(theta: float, phi: float) -> np.ndarray:
    """2x2 mode map of one mesh element: phase phi on the first mode, then a real rotation."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[np.exp(1j * phi) * c, -s], [np.exp(1j * phi) * s, c]])


def passive_unitary(theta, n_modes: int | None = None) -> np.ndarray:
    """N x N unitary U with G^dagger a G = U a for the mesh parametrized by theta."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    n = int(round(np.sqrt(theta.size))) if n_modes is None else n_modes
    if theta.size != n * n:
        raise ValueError(f"passive parameter vector must have N^2 = {n * n} entries, got {theta.size}")
    U = np.eye(n, dtype=complex)
    for k, (m, m1) in enumerate(mesh_pairs(n)):
        T = np.eye(n, dtype=complex)
        T[np.ix_([m, m1], [m, m1])] = mesh_element_unitary(theta[2 * k], theta[2 * k + 1])
        U = T @ U
    phases = theta[2 * n_mesh_elements(n):]
    return np.exp(1j * phases)[:, None] * U


def symplectic_from_unitary(U: np.ndarray) -> np.ndarray:
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def passive_from_params(theta, n_modes: int | None = None) -> np.ndarray:
    """Orthogonal symplectic matrix of the passive mesh."""
    return symplectic_from_unitary(passive_unitary(theta, n_modes))


def squeezer_symplectic(squeezings) -> np.ndarray:
    s = np.asarray(squeezings, dtype=float)
    return np.diag(np.concatenate([np.exp(-s), np.exp(s)]))


def gaussian_symplectic(params: GaussianParams) -> np.ndarray:
    """Heisenberg-picture symplectic map: squeezers first, then the mesh."""
    return passive_from_params(params.passive, params.n_modes) @ squeezer_symplectic(params.squeezings)


def gaussian_covariance(params: GaussianParams) -> np.ndarray:
    O = passive_from_params(params.passive, params.n_modes)
    s = params.squeezings
    Z = np.concatenate([np.exp(-2 * s), np.exp(2 * s)])
    V = (O * Z) @ O.T
    return 0.5 * (V + V.T)


# ---------------------------------------------------------------------------
# purity and spectra


def purity(V: np.ndarray) -> float:
    det = np.linalg.det(V)
    if det <= 0:
        raise ValueError(f"unphysical covariance: det V = {det}")
    return float(1.0 / np.sqrt(det))


def apply_impurity(V: np.ndarray, p: float) -> np.ndarray:
    """Scale a pure covariance uniformly so that its purity becomes p."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"purity must lie in (0, 1], got {p}")
    det = np.linalg.det(V)
    if abs(det - 1.0) > PURE_TOL:
        raise ValueError(f"apply_impurity needs a pure covariance, det V = {det}")
    return V * p ** (-1.0 / n_modes_of(V))


def squeezing_spectrum(V: np.ndarray) -> np.ndarray:
    """Variance reduction factors r_j <= 1 of a pure covariance, ascending."""
    det = np.linalg.det(V)
    if abs(det - 1.0) > PURE_TOL:
        raise ValueError(f"squeezing spectrum needs a pure covariance, det V = {det}")
    ev = np.linalg.eigvalsh(0.5 * (V + V.T))
    return np.minimum(ev[: n_modes_of(V)], 1.0)


# ---------------------------------------------------------------------------
# complex (Bogoliubov) form


@dataclass(frozen=True)
class BogoliubovMap:
    """Linear map a_k -> sum_j E_kj a_j + F_kj a_j^dagger.

    The creation operators transform with the complex-conjugate blocks.
    :func:`bogoliubov_of` returns the Heisenberg map G^dagger a G of a
    Gaussian unitary G; the Schrodinger conjugation G a G^dagger is its
    :meth:`inverse`.
    """

    E: np.ndarray
    F: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.E.shape[0]

    @classmethod
    def identity(cls, n_modes: int) -> BogoliubovMap:
        return cls(np.eye(n_modes, dtype=complex), np.zeros((n_modes, n_modes), dtype=complex))

    @classmethod
    def from_symplectic(cls, S: np.ndarray) -> BogoliubovMap:
        n = S.shape[0] // 2
        A, B, C, D = S[:n, :n], S[:n, n:], S[n:, :n], S[n:, n:]
        E = 0.5 * ((A + D) + 1j * (C - B))
        F = 0.5 * ((A - D) + 1j * (C + B))
        return cls(E, F)

    def symplectic(self) -> np.ndarray:
        E, F = self.E, self.F
        A = (E + F).real
        D = (E - F).real
        C = (E + F).imag
        B = (F - E).imag
        return np.block([[A, B], [C, D]])

    def covariance(self) -> np.ndarray:
        """Covariance of the pure state G|0> when this is G's Heisenberg map."""
        S = self.symplectic()
        V = S @ S.T
        return 0.5 * (V + V.T)

    def __matmul__(self, other: BogoliubovMap) -> BogoliubovMap:
        # block product [[E, F], [F*, E*]] . [[E', F'], [F'*, E'*]]
        E = self.E @ other.E + self.F @ other.F.conj()
        F = self.E @ other.F + self.F @ other.E.conj()
        return BogoliubovMap(E, F)

    def inverse(self) -> BogoliubovMap:
        return BogoliubovMap(self.E.conj().T, -self.F.T)

    def ccr_residual(self) -> float:
        E, F = self.E, self.F
        r1 = E @ E.conj().T - F @ F.conj().T - np.eye(self.n_modes)
        r2 = E @ F.T - F @ E.T
        return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def bogoliubov_of(params: GaussianParams) -> BogoliubovMap:
    return BogoliubovMap.from_symplectic(gaussian_symplectic(params))


# ---------------------------------------------------------------------------
# text dumps


def format_covariance(V: np.ndarray) -> str:
    n = n_modes_of(V)
    lines = [f"n_modes {n}"]
    lines += [" ".join(f"{x:.17g}" for x in row) for row in V]
    return "\n".join(lines) + "\n"


def parse_covariance(text: str) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    key, value = lines[0].split()
    if key != "n_modes":
        raise ValueError("covariance dump must start with an 'n_modes' header")
    n = int(value)
    V = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    if V.shape != (2 * n, 2 * n):
        raise ValueError(f"expected {2 * n}x{2 * n} entries, got {V.shape}")
    return V
