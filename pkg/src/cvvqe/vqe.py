"""Variational energy minimization over Gaussian-unitary parameters.

The ansatz is P_l G_l ... P_1 G_1 |0>, with every G_i a squeezer + mesh
(N^2 + N parameters) and every P_i the same product of ladder operators.
Energies come from the Wick engine; gradients are central differences and
the outer loop is scipy's L-BFGS-B with seeded random restarts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gaussian import (
    GaussianParams,
    apply_impurity,
    gaussian_covariance,
    n_params,
    purity,
    squeezing_spectrum,
)
from .ladder import LadderOp, LadderPolynomial, ipag_reduce, ops_product
from .wick import (
    AnnihilatedStateError,
    CompiledPolynomial,
    contraction_table,
    nongaussian_expectation,
    normalization,
    sandwich,
)

log = logging.getLogger(__name__)

IMAG_TOL = 1e-9
MAX_INIT_ATTEMPTS = 100


class OptimizationError(RuntimeError):
    """Every restart failed to produce a finite energy."""


@dataclass(frozen=True)
class AnsatzConfig:
    """Ladder preparation ``ladder_ops`` (product order, leftmost applied last) per layer."""

    n_modes: int
    ladder_ops: tuple = ()
    layers: int = 1
    purity_target: float = 1.0
    tap_reflectivity: float = 0.05

    def __post_init__(self):
        ops = tuple(LadderOp(int(m), bool(d)) for m, d in self.ladder_ops)
        object.__setattr__(self, "ladder_ops", ops)
        if self.n_modes < 1 or self.layers < 1:
            raise ValueError("n_modes and layers must be positive")
        if not 0.0 < self.purity_target <= 1.0:
            raise ValueError(f"purity_target must lie in (0, 1], got {self.purity_target}")
        if not 0.0 < self.tap_reflectivity <= 1.0:
            raise ValueError("tap_reflectivity must lie in (0, 1]")
        if any(not 0 <= op.mode < self.n_modes for op in ops):
            raise ValueError("ladder operator mode out of range")

    @classmethod
    def subtractions(cls, n_modes: int, k: int, mode: int = 0, **kwargs) -> AnsatzConfig:
        return cls(n_modes, tuple((mode, False) for _ in range(k)), **kwargs)

    @property
    def prep(self) -> LadderPolynomial:
        if not self.ladder_ops:
            return LadderPolynomial.scalar(1.0)
        return ops_product(self.ladder_ops)

    @property
    def n_params(self) -> int:
        return self.layers * n_params(self.n_modes)

    def split(self, params) -> list[GaussianParams]:
        params = np.asarray(params, dtype=float)
        if params.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {params.size}")
        step = n_params(self.n_modes)
        return [GaussianParams.from_vector(params[i * step:(i + 1) * step], self.n_modes)
                for i in range(self.layers)]


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 500
    gradient_step: float = 1e-5
    convergence_tol: float = 1e-7
    restarts: int = 8
    rng_seed: int = 0
    init_scale: float = 0.1

    def __post_init__(self):
        for name in ("max_iterations", "gradient_step", "convergence_tol", "restarts", "init_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ResourceReport:
    squeezing_cost_db: float
    subtraction_probability: float
    purity: float
    ladder_op_count: int


@dataclass
class VqeResult:
    best_energy: float
    best_params: np.ndarray
    energy_trace: list[float]
    resources: ResourceReport | None
    converged: bool
    iterations: int = 0
    evaluations: int = 0
    restart_energies: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# state construction


def global_state(params, ansatz: AnsatzConfig):
    """Return (pure covariance, impure covariance, reduced preparation polynomial)."""
    layers = ansatz.split(params)
    if ansatz.layers == 1:
        V_pure = gaussian_covariance(layers[0])
        prep = ansatz.prep
    else:
        bmap, prep = ipag_reduce([(g, ansatz.prep) for g in layers])
        V_pure = bmap.covariance()
    V = V_pure if ansatz.purity_target == 1.0 else apply_impurity(V_pure, ansatz.purity_target)
    return V_pure, V, prep


class EnergyObjective:
    """E(params) = <H> on the ansatz state; caches the compiled single-layer sandwich."""

    def __init__(self, ansatz: AnsatzConfig, H: LadderPolynomial):
        if H.max_mode() >= ansatz.n_modes:
            raise ValueError("Hamiltonian acts on more modes than the ansatz provides")
        self.ansatz = ansatz
        self.H = H
        self.evaluations = 0
        if ansatz.layers == 1:
            num, den = sandwich(H, ansatz.prep)
            self._num = CompiledPolynomial(num, ansatz.n_modes)
            self._den = CompiledPolynomial(den, ansatz.n_modes)

    def raw(self, params) -> complex:
        self.evaluations += 1
        _, V, prep = global_state(params, self.ansatz)
        if self.ansatz.layers == 1:
            table = contraction_table(V)
            return self._num.evaluate(table) / normalization(self._den.evaluate(table))
        return nongaussian_expectation(self.H, prep, V)

    def __call__(self, params) -> float:
        value = self.raw(params)
        if abs(value.imag) > IMAG_TOL * (1.0 + abs(value.real)):
            raise ValueError(f"energy has an imaginary part {value.imag:.3g}")
        return float(value.real)

    def safe(self, params) -> float:
        """Energy, or +inf where the state is annihilated or the evaluation overflows."""
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                value = self(params)
        except AnnihilatedStateError:
            log.info("preparation annihilated the state; objective set to +inf")
            return np.inf
        except (ValueError, np.linalg.LinAlgError) as exc:
            log.info("energy evaluation failed (%s); objective set to +inf", exc)
            return np.inf
        return value if np.isfinite(value) else np.inf


def energy(params, ansatz: AnsatzConfig, H: LadderPolynomial) -> float:
    return EnergyObjective(ansatz, H)(params)


def central_gradient(f, params, h: float) -> np.ndarray:
    x = np.asarray(params, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        g[i] = (f(x + step) - f(x - step)) / (2 * h)
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite gradient component (failed probe)")
    return g


def gradient(params, ansatz: AnsatzConfig, H: LadderPolynomial, h: float = 1e-5) -> np.ndarray:
    return central_gradient(EnergyObjective(ansatz, H), params, h)


# ---------------------------------------------------------------------------
# optimization


def _initial_point(rng: np.random.Generator, objective: EnergyObjective, scale: float):
    for _ in range(MAX_INIT_ATTEMPTS):
        x0 = rng.normal(0.0, scale, objective.ansatz.n_params)
        if np.isfinite(objective.safe(x0)):
            return x0
    raise OptimizationError(f"no initial point with K > 0 after {MAX_INIT_ATTEMPTS} draws")


def _run_lbfgs(objective: EnergyObjective, x0, opt: OptimizerConfig):
    h = opt.gradient_step
    trace: list[float] = []

    def fun(x):
        return objective.safe(x)

    def jac(x):
        if not np.isfinite(objective.safe(x)):
            # outside the finite region; a zero gradient lets the line search back off
            return np.zeros_like(x)
        return central_gradient(objective.safe, x, h)

    def callback(intermediate_result):
        trace.append(float(intermediate_result.fun))

    res = minimize(fun, x0, jac=jac, method="L-BFGS-B", callback=callback,
                   options={"maxiter": opt.max_iterations, "maxcor": 10,
                            "gtol": opt.convergence_tol, "ftol": 0.0})
    return res, trace


def optimize(ansatz: AnsatzConfig, H: LadderPolynomial, opt: OptimizerConfig,
             resources: bool = True) -> VqeResult:
    objective = EnergyObjective(ansatz, H)
    rng = np.random.default_rng(opt.rng_seed)
    best = None
    restart_energies = []
    iterations = 0
    for r in range(opt.restarts):
        try:
            x0 = _initial_point(rng, objective, opt.init_scale)
            res, trace = _run_lbfgs(objective, x0, opt)
        except (OptimizationError, FloatingPointError, ArithmeticError, ValueError) as exc:
            log.warning("restart %d failed: %s", r, exc)
            restart_energies.append(np.inf)
            continue
        iterations += int(res.nit)
        restart_energies.append(float(res.fun))
        log.debug("restart %d: E=%.12g nit=%d %s", r, res.fun, res.nit, res.message)
        if np.isfinite(res.fun) and (best is None or res.fun < best[0].fun):
            best = (res, [objective.safe(x0)] + trace)
    if best is None:
        raise OptimizationError("all restarts failed")
    res, trace = best
    report = resource_report(res.x, ansatz) if resources else None
    return VqeResult(
        best_energy=float(res.fun),
        best_params=np.asarray(res.x),
        energy_trace=trace,
        resources=report,
        converged=bool(res.success),
        iterations=iterations,
        evaluations=objective.evaluations,
        restart_energies=restart_energies,
    )


# ---------------------------------------------------------------------------
# experimental resources


def squeezing_cost(V_pure: np.ndarray) -> float:
    """Total squeezing in dB over the Bloch-Messiah squeezers of a pure covariance."""
    r = squeezing_spectrum(V_pure)
    return float(np.sum(np.abs(10.0 * np.log10(r))))


def _stage_factor(op: LadderOp, prior: LadderPolynomial | None, V: np.ndarray,
                  reflectivity: float) -> float:
    # heralding rate of a weak tap ~ R * <o^dag o> on the current state
    occupation = nongaussian_expectation(ops_product([op.adjoint(), op]), prior, V).real
    if occupation <= 0:
        raise AnnihilatedStateError(f"stage on mode {op.mode + 1} has zero occupation")
    return min(1.0, reflectivity * occupation)


def subtraction_probability(ansatz: AnsatzConfig, V: np.ndarray) -> float:
    """Success probability of the single-layer ladder preparation on covariance V."""
    prob = 1.0
    applied: list[LadderOp] = []
    for op in reversed(ansatz.ladder_ops):
        prior = ops_product(list(reversed(applied))) if applied else None
        prob *= _stage_factor(op, prior, V, ansatz.tap_reflectivity)
        applied.append(op)
    return prob


def circuit_subtraction_probability(params, ansatz: AnsatzConfig) -> float:
    """Stage-by-stage heralding probability through every layer of the circuit."""
    if ansatz.layers == 1:
        return subtraction_probability(ansatz, global_state(params, ansatz)[1])
    layers = ansatz.split(params)
    prob = 1.0
    for i, g in enumerate(layers):
        applied: list[LadderOp] = []
        for op in reversed(ansatz.ladder_ops):
            current = ops_product(list(reversed(applied))) if applied else LadderPolynomial.scalar(1.0)
            bmap, prior = ipag_reduce([(x, ansatz.prep) for x in layers[:i]] + [(g, current)])
            V = bmap.covariance()
            if ansatz.purity_target < 1.0:
                V = apply_impurity(V, ansatz.purity_target)
            prob *= _stage_factor(op, prior, V, ansatz.tap_reflectivity)
            applied.append(op)
    return prob


def resource_report(params, ansatz: AnsatzConfig) -> ResourceReport:
    V_pure, V, _ = global_state(params, ansatz)
    return ResourceReport(
        squeezing_cost_db=squeezing_cost(V_pure),
        subtraction_probability=circuit_subtraction_probability(params, ansatz),
        purity=purity(V),
        ladder_op_count=ansatz.layers * len(ansatz.ladder_ops),
    )
