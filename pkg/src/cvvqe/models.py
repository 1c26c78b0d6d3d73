"""Lattice Hamiltonians written as ladder polynomials."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .ladder import LadderOp, LadderPolynomial


@dataclass(frozen=True)
class BoseHubbardParams:
    """1D Bose-Hubbard chain; ``hopping`` is the t (a.k.a. J) amplitude."""

    n_sites: int = 2
    hopping: float = 1.0
    interaction: float = 1.0
    chemical_potential: float = 1.0
    boundary: str = "open"

    def __post_init__(self):
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if not all(math.isfinite(x) for x in (self.hopping, self.interaction, self.chemical_potential)):
            raise ValueError("model parameters must be finite")
        if self.n_sites < 2:
            raise ValueError("a Bose-Hubbard chain needs at least 2 sites")
        if self.boundary == "periodic" and self.n_sites < 3:
            raise ValueError("periodic boundaries need at least 3 sites")

    def bonds(self) -> list[tuple[int, int]]:
        L = self.n_sites
        bonds = [(i, i + 1) for i in range(L - 1)]
        if self.boundary == "periodic":
            bonds.append((L - 1, 0))
        return bonds

    def replace(self, **changes) -> BoseHubbardParams:
        return BoseHubbardParams(**{**asdict(self), **changes})


def bose_hubbard_polynomial(p: BoseHubbardParams) -> LadderPolynomial:
    """H = -t sum_i (b_i b_{i+1}^dag + b_i^dag b_{i+1}) + U/2 sum n_i n_i - (mu + U/2) sum n_i.

    Operator order is kept literally (b^dag b b^dag b for n^2).
    """
    t, U, mu = p.hopping, p.interaction, p.chemical_potential
    terms = []
    for i, j in p.bonds():
        terms.append(((LadderOp(i, False), LadderOp(j, True)), -t))
        terms.append(((LadderOp(i, True), LadderOp(j, False)), -t))
    for i in range(p.n_sites):
        n_i = (LadderOp(i, True), LadderOp(i, False))
        terms.append((n_i + n_i, U / 2))
        terms.append((n_i, -(mu + U / 2)))
    return LadderPolynomial(terms)
