"""Brute-force truncated Fock-space reference.

Everything here is independent of the covariance/Wick route: states are
amplitude vectors, Gaussian unitaries are exponentials of their quadratic
generators, and the Bose-Hubbard ground energy comes from exact
diagonalization in the occupation basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .gaussian import GaussianParams, mesh_pairs, n_mesh_elements
from .ladder import LadderPolynomial
from .models import BoseHubbardParams, bose_hubbard_polynomial

MAX_DIMENSION = 2_000_000
DENSE_LIMIT = 2000
LEAKAGE_LIMIT = 1e-8
SQUEEZE_PADDING = 60


class LeakageError(RuntimeError):
    """Truncation error too large for the requested cutoff; raise n_max."""


class LanczosError(RuntimeError):
    pass


class FockSpace:
    """Product basis |n_1 ... n_N>, 0 <= n_j <= n_max, mode 1 slowest."""

    def __init__(self, n_modes: int, n_max: int):
        if n_modes < 1 or n_max < 1:
            raise ValueError("need n_modes >= 1 and n_max >= 1")
        dim = (n_max + 1) ** n_modes
        if dim > MAX_DIMENSION:
            raise ValueError(f"Fock dimension {dim} exceeds the {MAX_DIMENSION} limit")
        self.n_modes = n_modes
        self.n_max = n_max
        self.dim = dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_max + 1,) * self.n_modes

    def index(self, occupations) -> int:
        return int(np.ravel_multi_index(tuple(occupations), self.shape))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unravel_index(index, self.shape))

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """(dim, N) array of occupation numbers of every basis state."""
        grids = np.indices(self.shape).reshape(self.n_modes, -1)
        return grids.T

    @cached_property
    def _annihilators(self) -> list[sp.csr_matrix]:
        d = self.n_max + 1
        single = sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), format="csr")
        out = []
        for j in range(self.n_modes):
            left = sp.identity(d**j, format="csr")
            right = sp.identity(d ** (self.n_modes - j - 1), format="csr")
            out.append(sp.kron(sp.kron(left, single), right, format="csr"))
        return out

    def annihilator(self, mode: int) -> sp.csr_matrix:
        return self._annihilators[mode]

    def creator(self, mode: int) -> sp.csr_matrix:
        return self._annihilators[mode].T.tocsr()

    def operator(self, p: LadderPolynomial) -> sp.csr_matrix:
        """Sparse truncated matrix of ``p`` (products taken literally in truncated space)."""
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for ops, c in p:
            m = sp.identity(self.dim, dtype=complex, format="csr")
            for op in ops:
                m = m @ (self.creator(op.mode) if op.dagger else self.annihilator(op.mode))
            out = out + c * m
        return out.tocsr()

    def vacuum(self) -> FockVector:
        amps = np.zeros(self.dim, dtype=complex)
        amps[0] = 1.0
        return FockVector(self, amps)


@dataclass
class FockVector:
    space: FockSpace
    amplitudes: np.ndarray
    leakage: float = field(default=0.0)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> FockVector:
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize a zero vector")
        return FockVector(self.space, self.amplitudes / nrm, self.leakage)


# ---------------------------------------------------------------------------
# Gaussian unitaries


def squeezed_vacuum_amplitudes(s: float, n_max: int, padding: int = SQUEEZE_PADDING):
    """Single-mode exp[(s/2)(a^2 - a^dag^2)]|0>, exponentiated in a padded space.

    Returns the first n_max + 1 amplitudes and the population lost by cutting
    the padded vector back to n_max.
    """
    d = n_max + 1 + padding
    ann = np.diag(np.sqrt(np.arange(1, d)), 1)
    gen = 0.5 * s * (ann @ ann - ann.T @ ann.T)
    vec = sla.expm(gen)[:, 0]
    kept = vec[: n_max + 1]
    leak = float(max(0.0, 1.0 - np.vdot(kept, kept).real))
    return kept.astype(complex), leak


def _apply_local(amps: np.ndarray, space: FockSpace, modes: tuple[int, ...],
                 matrix: np.ndarray) -> np.ndarray:
    """Apply a dense operator acting on ``modes`` (row-major within those modes)."""
    d = space.n_max + 1
    k = len(modes)
    t = np.moveaxis(amps.reshape(space.shape), modes, range(k))
    t = (matrix @ t.reshape(d**k, -1)).reshape(t.shape)
    return np.moveaxis(t, range(k), modes).reshape(-1)


def single_mode_squeezer(s: float, n_max: int) -> np.ndarray:
    """Truncated exp[(s/2)(a^2 - a^dag^2)] on one mode."""
    ann = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1)
    return sla.expm(0.5 * s * (ann @ ann - ann.T @ ann.T))


def two_mode_rotation(angle: float, n_max: int) -> np.ndarray:
    """Truncated exp[angle (a_2^dag a_1 - a_1^dag a_2)], so that G^dag a G = [[c, -s], [s, c]] a.

    The generator conserves n_1 + n_2, so it is exponentiated one
    total-number block at a time.
    """
    d = n_max + 1
    out = np.zeros((d * d, d * d))
    for total in range(2 * n_max + 1):
        ks = np.arange(max(0, total - n_max), min(total, n_max) + 1)
        idx = ks * d + (total - ks)
        gen = np.zeros((ks.size, ks.size))
        for r, k in enumerate(ks[1:], start=1):
            # a_2^dag a_1 |k, T-k> = sqrt(k (T-k+1)) |k-1, T-k+1>
            amp = np.sqrt(k * (total - k + 1.0))
            gen[r - 1, r] += angle * amp
            gen[r, r - 1] -= angle * amp
        out[np.ix_(idx, idx)] = sla.expm(gen)
    return out


def apply_passive(theta, v: FockVector) -> FockVector:
    space = v.space
    n = space.n_modes
    theta = np.asarray(theta, dtype=float)
    occ = space.occupation_table
    amps = v.amplitudes.astype(complex)
    for k, (m, m1) in enumerate(mesh_pairs(n)):
        angle, phase = theta[2 * k], theta[2 * k + 1]
        amps = amps * np.exp(1j * phase * occ[:, m])
        if angle != 0:
            amps = _apply_local(amps, space, (m, m1), two_mode_rotation(angle, space.n_max))
    phases = theta[2 * n_mesh_elements(n):]
    amps = amps * np.exp(1j * (occ @ phases))
    return FockVector(space, amps, v.leakage)


def apply_squeezers(squeezings, v: FockVector) -> FockVector:
    """Squeeze every mode of an arbitrary vector with truncated generators.

    Leakage is tracked as the population sitting on the cutoff level, the
    part a truncated generator cannot move correctly.
    """
    space = v.space
    amps = v.amplitudes.astype(complex)
    for j, s in enumerate(np.asarray(squeezings, dtype=float)):
        if s != 0:
            amps = _apply_local(amps, space, (j,), single_mode_squeezer(s, space.n_max))
    out = FockVector(space, amps)
    return FockVector(space, amps, v.leakage + boundary_population(out))


def boundary_population(v: FockVector) -> float:
    occ = v.space.occupation_table
    on_edge = np.any(occ == v.space.n_max, axis=1)
    weight = np.abs(v.amplitudes) ** 2
    return float(weight[on_edge].sum() / max(weight.sum(), 1e-300))


def gaussian_state_fock(params: GaussianParams, space: FockSpace,
                        leakage_limit: float = LEAKAGE_LIMIT) -> FockVector:
    """G(params)|0>: squeezers on the vacuum, then the passive mesh."""
    if params.n_modes != space.n_modes:
        raise ValueError("parameter and Fock-space mode counts differ")
    amps = np.ones(1, dtype=complex)
    leak = 0.0
    for s in params.squeezings:
        single, lost = squeezed_vacuum_amplitudes(s, space.n_max)
        amps = np.kron(amps, single)
        leak += lost
    v = apply_passive(params.passive, FockVector(space, amps, leak))
    if leak > leakage_limit:
        raise LeakageError(f"leakage {leak:.3g} above {leakage_limit:g} at n_max={space.n_max}")
    return v


def apply_gaussian(params: GaussianParams, v: FockVector) -> FockVector:
    return apply_passive(params.passive, apply_squeezers(params.squeezings, v))


# ---------------------------------------------------------------------------
# ladder action and expectations


def apply_polynomial(p: LadderPolynomial, v: FockVector) -> FockVector:
    """Truncated action of ``p``.

    Each creation operator drops the component already at n_max; the dropped
    fraction of the intermediate vector's weight is added to the leakage.
    """
    space = v.space
    occ = space.occupation_table
    out = np.zeros(space.dim, dtype=complex)
    dropped = 0.0
    for ops, c in p:
        w = v.amplitudes.copy()
        for op in reversed(ops):
            if op.dagger:
                weight = np.abs(w) ** 2
                total = weight.sum()
                if total > 0:
                    dropped += float(weight[occ[:, op.mode] == space.n_max].sum() / total)
                w = space.creator(op.mode) @ w
            else:
                w = space.annihilator(op.mode) @ w
        out += c * w
    return FockVector(space, out, v.leakage + dropped)


def expectation_fock(p: LadderPolynomial, v: FockVector) -> complex:
    return expectation_fock_with_leakage(p, v)[0]


def expectation_fock_with_leakage(p: LadderPolynomial, v: FockVector) -> tuple[complex, float]:
    nrm2 = np.vdot(v.amplitudes, v.amplitudes).real
    if nrm2 == 0:
        raise ValueError("expectation of a zero-norm vector")
    pv = apply_polynomial(p, v)
    return complex(np.vdot(v.amplitudes, pv.amplitudes) / nrm2), pv.leakage


def nongaussian_expectation_fock(observable: LadderPolynomial, prep: LadderPolynomial | None,
                                 params: GaussianParams, n_max: int,
                                 leakage_limit: float = LEAKAGE_LIMIT) -> tuple[complex, float]:
    """Reference <O> on P G|0>; returns (value, accumulated leakage)."""
    space = FockSpace(params.n_modes, n_max)
    v = gaussian_state_fock(params, space, leakage_limit)
    if prep is not None and prep:
        v = apply_polynomial(prep, v)
    value, leak = expectation_fock_with_leakage(observable, v)
    if leak > leakage_limit:
        raise LeakageError(f"leakage {leak:.3g} above {leakage_limit:g} at n_max={n_max}")
    return value, leak


# ---------------------------------------------------------------------------
# exact diagonalization


def bose_hubbard_matrix(p: BoseHubbardParams, n_max: int) -> sp.csr_matrix:
    """Occupation-basis Bose-Hubbard matrix built directly from the number basis."""
    space = FockSpace(p.n_sites, n_max)
    occ = space.occupation_table
    U, mu, t = p.interaction, p.chemical_potential, p.hopping
    diag = (0.5 * U * occ**2 - (mu + 0.5 * U) * occ).sum(axis=1).astype(float)
    rows, cols, vals = [np.arange(space.dim)], [np.arange(space.dim)], [diag]
    strides = np.array([(n_max + 1) ** (p.n_sites - 1 - j) for j in range(p.n_sites)])
    for i, j in p.bonds():
        # b_i^dag b_j: n_i -> n_i + 1, n_j -> n_j - 1
        for src, dst in ((j, i), (i, j)):
            ok = (occ[:, src] > 0) & (occ[:, dst] < n_max)
            col = np.nonzero(ok)[0]
            amp = np.sqrt(occ[col, src] * (occ[col, dst] + 1.0))
            row = col - strides[src] + strides[dst]
            rows.append(row)
            cols.append(col)
            vals.append(-t * amp)
    H = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(space.dim, space.dim))
    return H.tocsr()


def bose_hubbard_matrix_from_polynomial(p: BoseHubbardParams, n_max: int) -> sp.csr_matrix:
    space = FockSpace(p.n_sites, n_max)
    return space.operator(bose_hubbard_polynomial(p))


def lowest_eigenvalue(H: sp.spmatrix, method: str = "auto", tol: float = 1e-12,
                      maxiter: int | None = None) -> float:
    dim = H.shape[0]
    if method == "auto":
        method = "dense" if dim < DENSE_LIMIT else "lanczos"
    if method == "dense" or dim < 3:
        dense = H.toarray()
        return float(np.linalg.eigvalsh(0.5 * (dense + dense.conj().T))[0])
    try:
        vals = eigsh(H, k=1, which="SA", tol=tol, maxiter=maxiter, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise LanczosError(f"Lanczos did not converge: {exc}") from exc
    return float(vals[0].real)


def particle_sectors(space: FockSpace) -> list[np.ndarray]:
    """Basis indices grouped by total particle number, each in lexicographic occupation order."""
    totals = space.occupation_table.sum(axis=1)
    return [np.nonzero(totals == n)[0] for n in range(int(totals.max()) + 1)]


def bh_ground_energy(p: BoseHubbardParams, n_max: int, method: str = "auto",
                     sectors: bool = True) -> float:
    """Lowest eigenvalue, by default minimized over the conserved particle-number sectors.

    Sector blocks with N <= n_max are identical for every larger cutoff, so
    energies at different cutoffs are compared without roundoff noise.
    """
    H = bose_hubbard_matrix(p, n_max)
    if not sectors:
        return lowest_eigenvalue(H, method=method)
    return min(lowest_eigenvalue(H[idx][:, idx], method=method)
               for idx in particle_sectors(FockSpace(p.n_sites, n_max)))
