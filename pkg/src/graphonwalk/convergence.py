"""Discrete-versus-continuum convergence experiments and explicit error bounds.

For every graph size ``n`` the graph problem is solved exactly as a step
function (``u(t) = u0 exp(t (D^-1 A - I))``), the continuum problem is solved
once on an ``N_ref`` midpoint grid, and the ``L^2`` distance is compared with
the a-priori bounds

* quotient / sampled graphs: ``|g_n - g| e^t + |K_n - K| |g| t e^(2 beta t)``
* external sequences:        ``|g_n - g| (e^t + e^(2 beta t)) + |K_n - K| |g| t e^(2 beta t)``

with ``beta = max(|K|_2, 1/min k_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .continuum import build_kernel_matrix, decompose, discrete_time_step, solve_ivp_spectral
from .core import DEFAULT_C_MIN, is_connected
from .discretization import (
    GridField,
    StepFunction,
    WeightedGraph,
    average_initial_condition,
    cell_average,
    quotient_graph,
    refine_to_grid,
    sampled_graph,
    step_kernel_grid,
)
from .errors import ConfigError, HypothesisViolation, IncompatibleResolution, IsolatedNode
from .graphons import Graphon
from .walks import evolve_continuous, laplacian, transition_matrix

MODES = ("quotient", "sampled", "external_sequence")
N_REF_CAP = 2048
LEMMA_STEP_TOL = 1e-10
LEMMA_HS_SLACK = 1e-9


def l2_error(u, w):
    """``||eta(u) - w||_2`` on the grid of ``w``."""
    return float(np.sqrt(np.mean((refine_to_grid(u, w.N).values - w.values) ** 2)))


def theoretical_bound(eg, eK, gnorm, beta, t):
    """Quotient/sampled-graph bound ``eg e^t + eK gnorm t e^(2 beta t)``."""
    _check_bound_inputs(eg, eK, gnorm, beta, t)
    return eg * math.exp(t) + eK * gnorm * t * math.exp(2.0 * beta * t)


def theoretical_bound_sequence(eg, eK, gnorm, beta, t):
    """Graph-sequence bound ``eg (e^t + e^(2 beta t)) + eK gnorm t e^(2 beta t)``."""
    _check_bound_inputs(eg, eK, gnorm, beta, t)
    growth = math.exp(2.0 * beta * t)
    return eg * (math.exp(t) + growth) + eK * gnorm * t * growth


def _check_bound_inputs(eg, eK, gnorm, beta, t):
    if min(eg, eK, gnorm, t) < 0:
        raise ValueError("bound inputs must be nonnegative")
    if beta < 1:
        raise ValueError("beta must be >= 1")


def default_n_ref(ns):
    N_ref = min(8 * max(ns), N_REF_CAP)
    if any(N_ref % n for n in ns):
        raise ConfigError(f"default N_ref={N_ref} is not a multiple of every n in {list(ns)}")
    return N_ref


@dataclass
class ExperimentSpec:
    """One convergence study.

    ``sequence`` holds ``(graph, initial step function)`` pairs for the
    ``external_sequence`` mode; ``ns`` is then taken from the graph sizes.
    ``m`` is the per-cell sub-quadrature for quotient graphs and cell averages;
    by default ``N_ref // n`` so that graphs and reference share one grid.
    """

    graphon: Graphon
    g: Callable
    mode: str = "quotient"
    ns: Sequence[int] = ()
    times: Sequence[float] = (1.0,)
    N_ref: Optional[int] = None
    m: Optional[int] = None
    sequence: Optional[List[Tuple[WeightedGraph, StepFunction]]] = None
    ells: Sequence[int] = ()
    c_min: float = DEFAULT_C_MIN

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.mode == "external_sequence":
            if not self.sequence:
                raise ConfigError("external_sequence mode needs a graph sequence")
            self.ns = [G.n for G, _ in self.sequence]
            for G, u in self.sequence:
                if u.n != G.n:
                    raise ConfigError(f"initial condition of size {u.n} for a graph of size {G.n}")
        self.ns = [int(n) for n in self.ns]
        if not self.ns:
            raise ConfigError("ns must not be empty")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ConfigError("ns must be strictly increasing")
        self.times = [float(t) for t in self.times]
        if any(t < 0 for t in self.times):
            raise ConfigError("times must be >= 0")
        if any(int(ell) < 0 for ell in self.ells):
            raise ConfigError("ells must be >= 0")
        if self.N_ref is None:
            self.N_ref = default_n_ref(self.ns)
        bad = [n for n in self.ns if self.N_ref % n]
        if bad:
            raise IncompatibleResolution(f"N_ref={self.N_ref} is not a multiple of {bad}")


@dataclass
class ReportRow:
    n: int
    t: float
    error: float
    bound: float
    kernel_dist: float
    g_dist: float
    beta: float
    graphon_dist: float


@dataclass
class DiscreteRow:
    n: int
    ell: int
    error: float


@dataclass
class ConvergenceReport:
    mode: str
    N_ref: int
    rows: List[ReportRow] = field(default_factory=list)
    discrete_rows: List[DiscreteRow] = field(default_factory=list)
    slopes: Dict[float, float] = field(default_factory=dict)
    discrete_slopes: Dict[int, float] = field(default_factory=dict)

    def errors(self, t):
        return np.array([r.error for r in self.rows if r.t == t])

    def at(self, t):
        return [r for r in self.rows if r.t == t]

    @property
    def bound_holds(self):
        return all(r.error <= r.bound + LEMMA_HS_SLACK for r in self.rows)

    def summary(self):
        return {
            "mode": self.mode,
            "N_ref": self.N_ref,
            "ns": sorted({r.n for r in self.rows}),
            "times": sorted({r.t for r in self.rows}),
            "slopes": {str(t): _finite_or_none(s) for t, s in self.slopes.items()},
            "discrete_slopes": {str(ell): _finite_or_none(s) for ell, s in self.discrete_slopes.items()},
            "bound_holds": self.bound_holds,
            "max_error": max((r.error for r in self.rows), default=0.0),
        }


def _finite_or_none(x):
    return float(x) if math.isfinite(x) else None


def fit_slope(ns, errors, last=3):
    """Least-squares slope of ``log error`` against ``log n`` over the ``last`` largest sizes."""
    ns = np.asarray(ns, dtype=float)[-last:]
    errors = np.asarray(errors, dtype=float)[-last:]
    if ns.size < 2 or np.any(errors <= 0):
        return float("nan")
    return float(np.polyfit(np.log(ns), np.log(errors), 1)[0])


def _build_graph(spec, n):
    if spec.mode == "quotient":
        return quotient_graph(spec.graphon, n, spec.m or spec.N_ref // n)
    if spec.mode == "sampled":
        return sampled_graph(spec.graphon, n)
    return next(G for G, _ in spec.sequence if G.n == n)


def _initial_condition(spec, n):
    if spec.mode == "external_sequence":
        return next(u for G, u in spec.sequence if G.n == n)
    return average_initial_condition(spec.g, n, spec.m or spec.N_ref // n)


def run_study(spec):
    W, N = spec.graphon, spec.N_ref
    Km = build_kernel_matrix(W, N, spec.c_min)
    if not is_connected(W, max(spec.ns)):
        raise HypothesisViolation(f"graphon is not connected at resolution {max(spec.ns)}")
    g_ref = GridField.from_function(spec.g, N)
    gnorm = g_ref.l2_norm
    K_ref = Km.Kmat * N
    K_norm = float(np.sqrt(np.mean(K_ref**2)))
    W_ref = W.grid(N)
    continuum = solve_ivp_spectral(g_ref, decompose(W, N, spec.c_min), spec.times)
    discrete_ref = {ell: discrete_time_step(g_ref, Km, ell) for ell in spec.ells}

    bound_fn = theoretical_bound_sequence if spec.mode == "external_sequence" else theoretical_bound
    report = ConvergenceReport(mode=spec.mode, N_ref=N)
    for n in spec.ns:
        G = _build_graph(spec, n)
        if np.any(G.strengths <= 0):
            raise IsolatedNode(int(np.flatnonzero(G.strengths <= 0)[0]))
        u0 = _initial_condition(spec, n)
        kn = G.strengths / n
        eta = step_kernel_grid(G.A, N)
        K_n = eta / np.repeat(kn, N // n)[None, :]
        eK = float(np.sqrt(np.mean((K_n - K_ref) ** 2)))
        eW = float(np.sqrt(np.mean((eta - W_ref) ** 2)))
        eg = l2_error(u0, g_ref)
        beta = max(K_norm, 1.0 / kn.min(), 1.0)
        L = laplacian(G, "random_walk")
        for t, w in zip(spec.times, continuum.fields):
            u = StepFunction(evolve_continuous(u0.values, L, t))
            report.rows.append(
                ReportRow(n, t, l2_error(u, w), bound_fn(eg, eK, gnorm, beta, t), eK, eg, beta, eW)
            )
        T = transition_matrix(G).T
        for ell, w in discrete_ref.items():
            u = StepFunction(u0.values @ np.linalg.matrix_power(T, int(ell)))
            report.discrete_rows.append(DiscreteRow(n, int(ell), l2_error(u, w)))

    for t in spec.times:
        report.slopes[t] = fit_slope(spec.ns, report.errors(t))
    for ell in spec.ells:
        errs = [r.error for r in report.discrete_rows if r.ell == ell]
        report.discrete_slopes[int(ell)] = fit_slope(spec.ns, errs)
    return report


def lemma_step_kernel_check(G, f, ell, kernel=None):
    """Check ``A^ell f == A^ell f_eta`` for the step operator of ``G`` on the grid of ``f``.

    ``kernel`` substitutes another ``N x N`` grid kernel for ``eta(G)``; a
    non-step kernel is expected to fail the check.
    """
    N, n = f.N, G.n
    if N % n:
        raise IncompatibleResolution(f"graph size {n} does not divide grid size {N}")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    K = step_kernel_grid(G.A, N) if kernel is None else np.asarray(kernel, dtype=float)
    a = f.values
    b = refine_to_grid(cell_average(f, n), N).values
    for _ in range(ell):
        a = K @ a / N
        b = K @ b / N
    diff = float(np.sqrt(np.mean((a - b) ** 2)))
    return diff <= LEMMA_STEP_TOL * f.l2_norm


def hs_difference_terms(A, B, f, ell):
    """Left and right sides of the Hilbert-Schmidt difference inequality, without slack.

    ``lhs = ||A^ell f - B^ell f||``; ``rhs`` uses ``beta = max |A|``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    N = A.shape[0]
    fv = f.values if isinstance(f, GridField) else np.asarray(f, dtype=float)

    def norm(v):
        return float(np.sqrt(np.mean(v**2)))

    def power(M, v, p):
        for _ in range(p):
            v = M @ v / N
        return v

    lhs = norm(power(A, fv, ell) - power(B, fv, ell))
    Bf = B @ fv / N
    tail = norm(power(A, Bf, ell - 1) - power(B, Bf, ell - 1))
    AB = float(np.sqrt(np.mean((A - B) ** 2)))
    return lhs, AB, norm(fv), tail


def lemma_hs_difference_check(A, B, f, ell, beta):
    """``||A^l f - B^l f|| <= beta^(l-1) ||A - B|| ||f|| + ||(A^(l-1) - B^(l-1)) B f||`` (+1e-9)."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if np.max(np.abs(A)) > beta:
        raise ValueError("kernel A exceeds beta")
    lhs, AB, fnorm, tail = hs_difference_terms(A, B, f, ell)
    return lhs <= beta ** (ell - 1) * AB * fnorm + tail + LEMMA_HS_SLACK


@dataclass
class LemmaCase:
    lemma: str
    case: int
    n: int
    N: int
    ell: int
    passed: bool


def run_lemma_suites(seed=0, step_cases=50, hs_cases=100):
    """Randomized suites for the step-kernel identity and the Hilbert-Schmidt difference bound.

    Step-kernel cases draw a symmetric graph on ``n <= 16`` nodes, a Gaussian
    field on ``N = n r`` points (``r <= 8``) and ``ell <= 4``.  Difference
    cases draw two kernels with entries in [0, 1] on ``N <= 64`` points,
    ``ell in {2, 3, 4}`` and ``beta = 1``.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(step_cases):
        n = int(rng.integers(2, 17))
        N = n * int(rng.integers(1, 9))
        ell = int(rng.integers(1, 5))
        M = rng.random((n, n))
        G = WeightedGraph(0.5 * (M + M.T))
        f = GridField(rng.standard_normal(N))
        cases.append(LemmaCase("step_kernel", i, n, N, ell, lemma_step_kernel_check(G, f, ell)))
    for i in range(hs_cases):
        N = int(rng.integers(8, 65))
        ell = int(rng.integers(2, 5))
        A = rng.random((N, N))
        B = rng.random((N, N))
        f = GridField(rng.standard_normal(N))
        cases.append(LemmaCase("hs_difference", i, N, N, ell, lemma_hs_difference_check(A, B, f, ell, 1.0)))
    return cases
