"""Self-checks behind ``cvvqe validate``: closed forms, combinatorics and Wick-vs-Fock agreement."""
from __future__ import annotations

import functools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fock import (
    FockSpace,
    FockVector,
    LeakageError,
    apply_gaussian,
    apply_polynomial,
    bh_ground_energy,
    bose_hubbard_matrix,
    bose_hubbard_matrix_from_polynomial,
    expectation_fock,
    lowest_eigenvalue,
    nongaussian_expectation_fock,
)
from .gaussian import GaussianParams, gaussian_covariance
from .ladder import LadderPolynomial, a, ipag_reduce, number, ops_product
from .models import BoseHubbardParams
from .wick import (
    AnnihilatedStateError,
    contraction_table,
    monomial_expectation,
    nongaussian_expectation,
    perfect_matchings,
)

TableFn = Callable[[np.ndarray], np.ndarray]

# two squeezed layers with subtractions carry a heavy photon tail; 25 truncates at ~1e-5
IPAG_FOCK_CUTOFF = 40


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _guarded(name: str):
    """Report an exception raised inside a check as a failure of that check."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except Exception as exc:
                return Check(name, False, f"raised {type(exc).__name__}: {exc}")
        return run
    return wrap


def relative_error(value: complex, reference: complex) -> float:
    return abs(value - reference) / max(abs(reference), 1.0)


# ---------------------------------------------------------------------------
# random cases shared with the test-suite


@dataclass
class OracleCase:
    params: GaussianParams
    observable: LadderPolynomial
    prep: LadderPolynomial | None


def random_case(rng: np.random.Generator, max_modes: int = 3, max_squeezing: float = 0.6,
                max_length: int = 6, max_prep: int = 2) -> OracleCase:
    n = int(rng.integers(1, max_modes + 1))
    params = GaussianParams(rng.uniform(-max_squeezing, max_squeezing, n),
                            rng.uniform(0, 2 * np.pi, n * n))
    length = int(rng.integers(0, max_length + 1))
    ops = [(int(rng.integers(n)), bool(rng.integers(2))) for _ in range(length)]
    k = int(rng.integers(0, max_prep + 1))
    prep = ops_product([(int(rng.integers(n)), False) for _ in range(k)]) if k else None
    return OracleCase(params, ops_product(ops), prep)


def wick_value(case: OracleCase, table_fn: TableFn = contraction_table) -> complex:
    V = gaussian_covariance(case.params)
    return nongaussian_expectation(case.observable, case.prep, V, table=table_fn(V))


def converged_oracle(case: OracleCase, n_max: int = 30, tol: float = 1e-7, step: int = 10,
                     limit: int | None = None) -> tuple[complex, int]:
    """Fock reference, raising the cutoff until two successive cutoffs agree to ``tol``."""
    if limit is None:
        limit = {1: 120, 2: 80}.get(case.params.n_modes, 50)
    previous = None
    while n_max <= limit:
        try:
            value, _ = nongaussian_expectation_fock(case.observable, case.prep, case.params,
                                                    n_max, leakage_limit=1.0)
        except LeakageError:
            value = None
        if previous is not None and value is not None and relative_error(previous, value) <= tol:
            return value, n_max
        previous = value
        n_max += step
    raise RuntimeError(f"Fock reference did not converge below n_max={limit}")


# ---------------------------------------------------------------------------
# individual checks


@_guarded("closed forms")
def check_closed_forms(table_fn: TableFn = contraction_table) -> Check:
    worst = 0.0
    for s in (0.1, 0.5, 1.0):
        V = gaussian_covariance(GaussianParams([s], [0.0]))
        table = table_fn(V)
        n_val = nongaussian_expectation(number(0), None, V, table=table)
        sub_val = nongaussian_expectation(number(0), a(0), V, table=table)
        worst = max(worst, abs(n_val - np.sinh(s) ** 2), abs(sub_val - (1 + 3 * np.sinh(s) ** 2)))
    return Check("closed forms (sinh^2 s, 1 + 3 sinh^2 s)", worst <= 1e-9, f"max error {worst:.2e}")


@_guarded("matching combinatorics")
def check_matchings() -> Check:
    counts = [len(perfect_matchings(2 * m)) for m in (1, 2, 3, 4)]
    V = gaussian_covariance(GaussianParams([0.3, -0.2], [0.4, 0.1, 0.7, 0.2]))
    odd_zero = all(
        monomial_expectation([(0, True)] * length, 1.0, V).value == 0 for length in (1, 3, 5, 7)
    )
    ok = counts == [1, 3, 15, 105] and odd_zero
    return Check("matching counts 1/3/15/105, odd moments 0", ok, f"counts {counts}")


@_guarded("ED sanity")
def check_ed_sanity() -> Check:
    diag = bh_ground_energy(BoseHubbardParams(2, 0.0, 1.0, 1.0), 6)
    model = BoseHubbardParams(2, 1.0, 1.0, 1.0)
    e4, e8, e12 = (bh_ground_energy(model, c) for c in (4, 8, 12))
    ok = abs(diag + 2) <= 1e-12 and e4 >= e8 >= e12
    return Check("ED sanity (-2 diagonal, cutoff monotonicity)", ok,
                 f"E_diag={diag:.15g} E4={e4:.10g} E8={e8:.10g} E12={e12:.10g}")


@_guarded("BH matrix constructions")
def check_ed_constructions() -> Check:
    model = BoseHubbardParams(3, 0.7, 1.3, 0.4, "periodic")
    direct = bose_hubbard_matrix(model, 5)
    via_poly = bose_hubbard_matrix_from_polynomial(model, 5)
    diff = abs(direct - via_poly).max()
    herm = abs(direct - direct.conj().T).max()
    e_dense = lowest_eigenvalue(direct, method="dense")
    e_lanczos = lowest_eigenvalue(direct, method="lanczos")
    ok = diff <= 1e-12 and herm <= 1e-12 and abs(e_dense - e_lanczos) <= 1e-8
    return Check("BH matrix: direct == polynomial, dense == Lanczos", ok,
                 f"|diff|={diff:.1e} |H-H^+|={herm:.1e} dE={abs(e_dense - e_lanczos):.1e}")


@_guarded("Wick vs converged Fock reference")
def check_wick_fock(n_cases: int, seed: int = 7, max_modes: int = 3,
                    table_fn: TableFn = contraction_table) -> Check:
    rng = np.random.default_rng(seed)
    worst, done = 0.0, 0
    while done < n_cases:
        case = random_case(rng, max_modes=max_modes)
        try:
            w = wick_value(case, table_fn)
        except AnnihilatedStateError:
            continue
        ref, _ = converged_oracle(case)
        worst = max(worst, relative_error(w, ref))
        done += 1
    return Check(f"Wick vs converged Fock reference ({n_cases} cases)", worst <= 1e-6,
                 f"max relative error {worst:.2e}")


def layered_fock_expectation(layers, observable: LadderPolynomial, n_max: int) -> complex:
    """Directly simulate P_l G_l ... P_1 G_1 |0> in Fock space."""
    n = layers[0][0].n_modes
    v = FockSpace(n, n_max).vacuum()
    for params, prep in layers:
        v = apply_polynomial(prep, apply_gaussian(params, v))
    return expectation_fock(observable, FockVector(v.space, v.amplitudes))


@_guarded("2-layer reduction vs layered Fock simulation")
def check_ipag(n_instances: int, seed: int = 11) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    obs = number(0) + 0.5 * number(1) + ops_product([(0, True), (1, False)])
    for _ in range(n_instances):
        layers = [(GaussianParams(rng.uniform(-0.4, 0.4, 2), rng.uniform(0, 2 * np.pi, 4)),
                   a(int(rng.integers(2)))) for _ in range(2)]
        bmap, prep = ipag_reduce(layers)
        w = nongaussian_expectation(obs, prep, bmap.covariance())
        f = layered_fock_expectation(layers, obs, IPAG_FOCK_CUTOFF)
        worst = max(worst, relative_error(w, f))
    return Check(f"2-layer reduction vs layered Fock simulation ({n_instances})", worst <= 1e-6,
                 f"max relative error {worst:.2e}")


def validate(quick: bool = False, table_fn: TableFn = contraction_table) -> list[Check]:
    """Run the self-check suite; ``table_fn`` replaces the contraction table (mutation hook)."""
    jobs = [
        lambda: check_closed_forms(table_fn),
        check_matchings,
        check_ed_sanity,
    ]
    if quick:
        jobs.append(lambda: check_wick_fock(10, max_modes=2, table_fn=table_fn))
    else:
        jobs += [
            check_ed_constructions,
            lambda: check_wick_fock(200, table_fn=table_fn),
            lambda: check_ipag(5),
        ]
    results = []
    for job in jobs:
        start = time.perf_counter()
        check = job()
        check.seconds = time.perf_counter() - start
        results.append(check)
    return results


def format_report(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}  ({c.seconds:.2f}s)"
             for c in checks]
    passed = sum(c.passed for c in checks)
    lines.append(f"{passed}/{len(checks)} checks passed")
    return "\n".join(lines)
