"""Expectation values of ladder polynomials on zero-mean Gaussian states.

A product of 2m ladder operators is evaluated as the sum over its
(2m-1)!! perfect matchings of products of two-point functions, each pair
taken in the operators' original left-to-right order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gaussian import n_modes_of
from .ladder import LadderOp, LadderPolynomial, dagger, multiply

K_MIN = 1e-12
K_REAL_TOL = 1e-9


class AnnihilatedStateError(ArithmeticError):
    """The preparation polynomial maps the Gaussian state to zero (K ~ 0)."""


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def perfect_matchings(length: int) -> np.ndarray:
    """All perfect matchings of ``range(length)`` as an (M, length//2, 2) index array.

    Built by pairing the first free index with each later free index in
    turn, so every pair is (earlier, later).
    """
    if length % 2:
        raise ValueError("perfect matchings need an even number of indices")

    def rec(free):
        if not free:
            yield []
            return
        first, rest = free[0], free[1:]
        for k, partner in enumerate(rest):
            for tail in rec(rest[:k] + rest[k + 1:]):
                yield [(first, partner)] + tail

    out = np.array(list(rec(tuple(range(length)))), dtype=np.intp)
    out = out.reshape(-1, length // 2, 2)
    out.setflags(write=False)
    return out


def op_index(op: LadderOp, n_modes: int) -> int:
    """Row/column of ``op`` in the contraction table: creations first, then annihilations."""
    if not 0 <= op.mode < n_modes:
        raise ValueError(f"mode {op.mode + 1} outside {n_modes} modes")
    return op.mode if op.dagger else n_modes + op.mode


def contraction_table(V: np.ndarray) -> np.ndarray:
    """2N x 2N table of <o_u o_v> for every ordered pair of ladder operators."""
    n = n_modes_of(V)
    Vxx, Vxp = V[:n, :n], V[:n, n:]
    Vpx, Vpp = V[n:, :n], V[n:, n:]
    eye = np.eye(n)
    cc = 0.25 * (Vxx - Vpp - 1j * (Vxp + Vpx))  # <a_j^dag a_k^dag>
    ca = 0.25 * (Vxx + Vpp + 1j * (Vxp - Vpx) - 2 * eye)  # <a_j^dag a_k>
    ac = eye + ca.T  # <a_j a_k^dag> = delta_jk + <a_k^dag a_j>
    aa = cc.conj()  # <a_j a_k>
    return np.block([[cc, ca], [ac, aa]])


def pair_expectation(op1: LadderOp, op2: LadderOp, V: np.ndarray) -> complex:
    n = n_modes_of(V)
    return complex(contraction_table(V)[op_index(op1, n), op_index(op2, n)])


@dataclass(frozen=True)
class MatchingSum:
    monomial_length: int
    matchings_evaluated: int
    value: complex


def _matching_sum(idx: np.ndarray, table: np.ndarray) -> complex:
    if len(idx) == 0:
        return 1.0 + 0j
    P = perfect_matchings(len(idx))
    return complex(table[idx[P[..., 0]], idx[P[..., 1]]].prod(axis=-1).sum())


def monomial_expectation(ops, coeff: complex, V: np.ndarray, table=None) -> MatchingSum:
    """Wick value of ``coeff * prod(ops)`` with the matching count attached."""
    ops = [LadderOp(*op) for op in ops]
    length = len(ops)
    if length % 2:
        return MatchingSum(length, 0, 0j)
    n = n_modes_of(V)
    table = contraction_table(V) if table is None else table
    idx = np.array([op_index(op, n) for op in ops], dtype=np.intp)
    return MatchingSum(length, double_factorial(length - 1), coeff * _matching_sum(idx, table))


def gaussian_expectation(monomial, V: np.ndarray, table=None) -> complex:
    """Expectation of one monomial, given as a 1-term polynomial or (ops, coeff)."""
    if isinstance(monomial, LadderPolynomial):
        if len(monomial) != 1:
            raise ValueError("expected a single monomial")
        (ops, coeff), = monomial.terms.items()
    else:
        ops, coeff = monomial
    return monomial_expectation(ops, coeff, V, table).value


class CompiledPolynomial:
    """Polynomial regrouped by monomial length into index arrays for batched evaluation."""

    def __init__(self, p: LadderPolynomial, n_modes: int):
        self.n_modes = n_modes
        self.groups: list[tuple[np.ndarray, np.ndarray]] = []
        by_len: dict[int, list] = {}
        for ops, c in p:
            if len(ops) % 2:
                continue  # odd moments of a zero-mean Gaussian vanish
            by_len.setdefault(len(ops), []).append((ops, c))
        for length in sorted(by_len):
            rows = by_len[length]
            idx = np.array([[op_index(op, n_modes) for op in ops] for ops, _ in rows],
                           dtype=np.intp).reshape(len(rows), length)
            coeffs = np.array([c for _, c in rows], dtype=complex)
            self.groups.append((idx, coeffs))

    def evaluate(self, table: np.ndarray) -> complex:
        total = 0j
        for idx, coeffs in self.groups:
            if idx.shape[1] == 0:
                total += coeffs.sum()
                continue
            P = perfect_matchings(idx.shape[1])
            vals = table[idx[:, P[..., 0]], idx[:, P[..., 1]]].prod(axis=-1).sum(axis=-1)
            total += complex(coeffs @ vals)
        return total


def polynomial_expectation(p: LadderPolynomial, V: np.ndarray, table=None) -> complex:
    if not p:
        return 0j
    n = n_modes_of(V)
    table = contraction_table(V) if table is None else table
    return CompiledPolynomial(p, n).evaluate(table)


def normalization(k_value: complex) -> float:
    if abs(k_value) < K_MIN:
        raise AnnihilatedStateError(f"preparation annihilates the state (K = {k_value:.3g})")
    if abs(k_value.imag) > K_REAL_TOL * max(1.0, abs(k_value)) or k_value.real <= 0:
        raise ValueError(f"normalization must be real positive, got {k_value}")
    return k_value.real


def sandwich(observable: LadderPolynomial, prep: LadderPolynomial | None):
    """Return (P^dagger O P, P^dagger P) for a preparation polynomial P."""
    if prep is None or not prep:
        return observable, LadderPolynomial.scalar(1.0)
    pd = dagger(prep)
    return multiply(multiply(pd, observable), prep), multiply(pd, prep)


def nongaussian_expectation(observable: LadderPolynomial, prep: LadderPolynomial | None,
                            V: np.ndarray, table=None) -> complex:
    """<O> on the state P rho_G P^dagger / K with K = Tr[P^dagger P rho_G]."""
    num, den = sandwich(observable, prep)
    n = n_modes_of(V)
    table = contraction_table(V) if table is None else table
    k_value = CompiledPolynomial(den, n).evaluate(table)
    return CompiledPolynomial(num, n).evaluate(table) / normalization(k_value)


def trace_matchings(ops, V: np.ndarray, table=None) -> list[str]:
    """Human-readable listing of every matching and its pair values."""
    n = n_modes_of(V)
    table = contraction_table(V) if table is None else table
    ops = [LadderOp(*op) for op in ops]
    label = " ".join(str(op) for op in ops) or "1"
    if len(ops) % 2:
        return [f"{label}: odd length, value 0"]
    idx = np.array([op_index(op, n) for op in ops], dtype=np.intp)
    lines = [f"{label}: {double_factorial(len(ops) - 1)} matchings"]
    if not ops:
        return lines
    for P in perfect_matchings(len(ops)):
        vals = [table[idx[i], idx[j]] for i, j in P]
        pairs = "  ".join(f"<{ops[i]} {ops[j]}>={complex(v):.6g}" for (i, j), v in zip(P, vals))
        lines.append(f"  {pairs}  -> {complex(np.prod(vals)):.6g}")
    lines.append(f"  total {_matching_sum(idx, table):.12g}")
    return lines
