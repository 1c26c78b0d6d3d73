"""Ordered products of creation/annihilation operators and their linear combinations.

Products are never reordered: ``a(0) * adag(0)`` stays the monomial
a a^dagger.  Modes are 0-based in code and 1-based in the text format
(``coeff * a'(k) a(j)``, with ``a'`` the creation operator).
"""
from __future__ import annotations

import logging
import re
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .gaussian import BogoliubovMap, GaussianParams, bogoliubov_of

log = logging.getLogger(__name__)

PRUNE_TOL = 1e-15
DEFAULT_TERM_CAP = 200_000


class LadderOp(NamedTuple):
    mode: int
    dagger: bool

    def adjoint(self) -> LadderOp:
        return LadderOp(self.mode, not self.dagger)

    def __str__(self):
        return f"a'({self.mode + 1})" if self.dagger else f"a({self.mode + 1})"


Monomial = tuple  # tuple[LadderOp, ...]


class LadderPolynomial:
    """Complex-weighted sum of ordered ladder monomials.

    Terms are keyed by their exact operator sequence; equal keys merge,
    nothing else is simplified.  Treat instances as immutable.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict | Iterable = ()):
        acc: dict[Monomial, complex] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for ops, c in items:
            key = tuple(LadderOp(int(o[0]), bool(o[1])) for o in ops)
            acc[key] = acc.get(key, 0j) + complex(c)
        self._terms = _prune(acc)

    @property
    def terms(self) -> dict:
        return self._terms

    # construction helpers
    @classmethod
    def scalar(cls, c: complex = 1.0) -> LadderPolynomial:
        return cls({(): c})

    @classmethod
    def monomial(cls, ops: Sequence, coeff: complex = 1.0) -> LadderPolynomial:
        return cls({tuple(ops): coeff})

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, LadderPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self):
        return f"LadderPolynomial({len(self)} terms)"

    def __str__(self):
        return format_polynomial(self)

    def max_mode(self) -> int:
        return max((op.mode for ops in self._terms for op in ops), default=-1)

    def max_length(self) -> int:
        return max((len(ops) for ops in self._terms), default=0)

    def isclose(self, other: LadderPolynomial, tol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= tol for k in keys)

    # algebra
    def __add__(self, other):
        if not isinstance(other, LadderPolynomial):
            other = LadderPolynomial.scalar(other)
        return LadderPolynomial(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: complex) -> LadderPolynomial:
        return LadderPolynomial({k: c * v for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, LadderPolynomial):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def dagger(self) -> LadderPolynomial:
        return dagger(self)


def _prune(terms: dict) -> dict:
    if not terms:
        return {}
    cmax = max(abs(c) for c in terms.values())
    cut = PRUNE_TOL * cmax
    return {k: c for k, c in terms.items() if c != 0 and abs(c) >= cut}


def a(mode: int) -> LadderPolynomial:
    return LadderPolynomial.monomial([LadderOp(mode, False)])


def adag(mode: int) -> LadderPolynomial:
    return LadderPolynomial.monomial([LadderOp(mode, True)])


def number(mode: int) -> LadderPolynomial:
    return LadderPolynomial.monomial([LadderOp(mode, True), LadderOp(mode, False)])


def ops_product(ops: Sequence[tuple[int, bool]]) -> LadderPolynomial:
    return LadderPolynomial.monomial([LadderOp(int(m), bool(d)) for m, d in ops])


def dagger(p: LadderPolynomial) -> LadderPolynomial:
    return LadderPolynomial(
        {tuple(op.adjoint() for op in reversed(ops)): np.conj(c) for ops, c in p}
    )


def multiply(p: LadderPolynomial, q: LadderPolynomial) -> LadderPolynomial:
    out: dict[Monomial, complex] = {}
    for k1, c1 in p:
        for k2, c2 in q:
            key = k1 + k2
            out[key] = out.get(key, 0j) + c1 * c2
    return LadderPolynomial(out)


def _substitution(op: LadderOp, bmap: BogoliubovMap) -> list[tuple[LadderOp, complex]]:
    n = bmap.n_modes
    if op.mode >= n:
        raise ValueError(f"mode {op.mode + 1} outside a {n}-mode map")
    E, F = bmap.E[op.mode], bmap.F[op.mode]
    if op.dagger:
        E, F = E.conj(), F.conj()
    out = []
    for j in range(n):
        if E[j] != 0:
            out.append((LadderOp(j, op.dagger), E[j]))
        if F[j] != 0:
            out.append((LadderOp(j, not op.dagger), F[j]))
    return out


def conjugate_by_gaussian(p: LadderPolynomial, bmap: BogoliubovMap) -> LadderPolynomial:
    """Substitute every ladder operator by its image under ``bmap``.

    With ``bmap = bogoliubov_of(params)`` this yields G^dagger p G.
    """
    cache: dict[LadderOp, list] = {}
    out: dict[Monomial, complex] = {}
    for ops, c in p:
        partial: dict[Monomial, complex] = {(): c}
        for op in ops:
            if op not in cache:
                cache[op] = _substitution(op, bmap)
            nxt: dict[Monomial, complex] = {}
            for key, val in partial.items():
                for new_op, w in cache[op]:
                    k2 = key + (new_op,)
                    nxt[k2] = nxt.get(k2, 0j) + val * w
            partial = nxt
        for key, val in partial.items():
            out[key] = out.get(key, 0j) + val
    return LadderPolynomial(out)


def _as_map(g) -> BogoliubovMap:
    return bogoliubov_of(g) if isinstance(g, GaussianParams) else g


def ipag_term_bound(layers: Sequence[tuple], n_modes: int) -> int:
    """Upper bound on the term count of the reduced polynomial."""
    bound = 1
    for i, (_, prep) in enumerate(layers):
        later = len(layers) - 1 - i
        per_term = (2 * n_modes) ** prep.max_length() if later else 1
        bound *= max(len(prep), 1) * per_term
    return bound


def ipag_reduce(layers: Sequence[tuple], term_cap: int = DEFAULT_TERM_CAP):
    """Fold an interleaved Gaussian/ladder circuit into one Gaussian and one polynomial.

    ``layers[i] = (gaussian, prep)`` applies the Gaussian (``GaussianParams``
    or Heisenberg ``BogoliubovMap``) and then the polynomial.  The state
    P_l G_l ... P_1 G_1 |0> is rewritten as P G |0>; returns the Heisenberg
    map of G = G_l ... G_1 and P.
    """
    if not layers:
        raise ValueError("ipag_reduce needs at least one layer")
    maps = [_as_map(g) for g, _ in layers]
    n = maps[0].n_modes
    if any(m.n_modes != n for m in maps):
        raise ValueError("all layers must act on the same number of modes")
    bound = ipag_term_bound(layers, n)
    if bound > term_cap:
        log.warning("reduced circuit may reach %d terms (cap %d)", bound, term_cap)

    reduced = layers[-1][1]
    # schrodinger conjugation by W = G_l ... G_{i+1}
    w_inv = BogoliubovMap.identity(n)
    for i in range(len(layers) - 2, -1, -1):
        w_inv = maps[i + 1].inverse() @ w_inv
        reduced = reduced * conjugate_by_gaussian(layers[i][1], w_inv)
    total = maps[0]
    for m in maps[1:]:
        total = m @ total
    assert len(reduced) <= bound, (len(reduced), bound)
    return total, reduced


# ---------------------------------------------------------------------------
# text format

_OP_RE = re.compile(r"a('?)\((\d+)\)")


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:.17g}"
    return f"({c.real:.17g}{c.imag:+.17g}j)"


def format_polynomial(p: LadderPolynomial) -> str:
    lines = []
    for ops, c in p:
        body = " ".join(str(op) for op in ops) if ops else "1"
        lines.append(f"{_format_coeff(c)} * {body}")
    return "\n".join(lines)


def parse_polynomial(text: str) -> LadderPolynomial:
    terms = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        coeff, sep, body = line.partition("*")
        body = body.strip()
        tokens = [] if body == "1" else body.split()
        matches = [_OP_RE.fullmatch(tok) for tok in tokens]
        if not sep or not body or not all(matches) or any(int(m[2]) < 1 for m in matches):
            raise ValueError(f"cannot parse polynomial term {line!r}")
        ops = [(int(m[2]) - 1, bool(m[1])) for m in matches]
        terms.append((ops, complex(coeff.strip())))
    return LadderPolynomial(terms)
