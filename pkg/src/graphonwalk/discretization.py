"""Graphons to finite weighted graphs and back.

Two graph constructions are provided: the quotient graph ``W/P`` (cell
averages) and the sampled graph ``W_[n]`` (point values at ``i/n``).  The map
``eta`` sends adjacency matrices and vectors back to step graphons and step
functions on the uniform partition ``P_i = [(i-1)/n, i/n)``, ``P_n`` closed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleResolution, RangeError
from .graphons import Step, midpoints

DEFAULT_SUBQUADRATURE = 8


@dataclass(frozen=True)
class Partition:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("partition needs n >= 1")

    @property
    def edges(self):
        return np.linspace(0.0, 1.0, self.n + 1)

    def cell(self, x):
        """0-based index of the cell containing ``x``."""
        idx = np.floor(np.asarray(x, dtype=float) * self.n).astype(int)
        return np.clip(idx, 0, self.n - 1)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Dense symmetric weighted graph with weights in [0, 1]."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if A.size and (A.min() < 0.0 or A.max() > 1.0):
            raise RangeError("adjacency weights must lie in [0, 1]")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-14):
            raise ValueError("adjacency matrix must be symmetric")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def strengths(self):
        return self.A.sum(axis=1)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``eta(u)``: piecewise-constant function with value ``values[i]`` on ``P_i``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())

    @property
    def n(self):
        return self.values.shape[0]

    def __call__(self, x):
        return self.values[Partition(self.n).cell(x)]

    @property
    def l2_norm(self):
        return float(np.sqrt(np.mean(self.values**2)))


@dataclass(frozen=True, eq=False)
class GridField:
    """An ``L^2[0,1]`` function sampled at the ``N`` midpoint nodes."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("grid field has non-finite entries")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, g, N):
        x = midpoints(N)
        return cls(np.broadcast_to(g(x), (N,)))

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def nodes(self):
        return midpoints(self.N)

    @property
    def l2_norm(self):
        return float(np.sqrt(np.mean(self.values**2)))

    @property
    def mass(self):
        return float(np.mean(self.values))


def quotient_graph(W, n, m=DEFAULT_SUBQUADRATURE):
    """``A_ij = n^2 * integral of W over P_i x P_j`` with ``m x m`` midpoint samples per cell."""
    if n < 1 or m < 1:
        raise ValueError("quotient_graph needs n >= 1 and m >= 1")
    fine = W.grid(n * m)
    A = fine.reshape(n, m, n, m).mean(axis=(1, 3))
    # Symmetrize away floating-point reduction-order noise.
    return WeightedGraph(np.clip(0.5 * (A + A.T), 0.0, 1.0))


def sample_points(W, n):
    """The points ``i/n`` at which ``W_[n]`` samples ``W``.

    Families with jumps on cell edges are sampled one ulp to the left so that
    ``i/n`` falls inside ``P_i`` rather than on the boundary with ``P_{i+1}``.
    """
    x = np.arange(1, n + 1) / n
    if W.jumps_on_cell_edges:
        x = np.nextafter(x, 0.0)
    return x


def sampled_graph(W, n):
    """``A_ij = W(i/n, j/n)``, ``i, j = 1..n``."""
    if n < 1:
        raise ValueError("sampled_graph needs n >= 1")
    x = sample_points(W, n)
    return WeightedGraph(np.broadcast_to(W(x[:, None], x[None, :]), (n, n)))


def step_graphon(G):
    """The step graphon ``eta(G)``."""
    A = np.asarray(G.A)
    if A.min() < 0.0 or A.max() > 1.0:
        raise RangeError("adjacency weights must lie in [0, 1]")
    return Step(A)


def average_initial_condition(g, n, m=DEFAULT_SUBQUADRATURE):
    """Cell averages ``n * integral of g over P_i`` using ``m`` midpoint samples per cell."""
    if n < 1 or m < 1:
        raise ValueError("average_initial_condition needs n >= 1 and m >= 1")
    fine = np.broadcast_to(g(midpoints(n * m)), (n * m,))
    return StepFunction(fine.reshape(n, m).mean(axis=1))


def sample_initial_condition(g, n):
    """Point samples ``g(i/n)`` as a step function (the sampled alternative to cell averages)."""
    return StepFunction(np.broadcast_to(g(np.arange(1, n + 1) / n), (n,)))


def refine_to_grid(u, N):
    """Replicate each step value ``N/n`` times on the ``N`` midpoint grid."""
    if N < 1 or N % u.n:
        raise IncompatibleResolution(f"step function size {u.n} does not divide N={N}")
    return GridField(np.repeat(u.values, N // u.n))


def cell_average(f, n):
    """Average a grid field over the cells of the ``n``-partition (the ``f_eta`` of a field)."""
    if f.N % n:
        raise IncompatibleResolution(f"partition size {n} does not divide N={f.N}")
    return StepFunction(f.values.reshape(n, f.N // n).mean(axis=1))


def step_kernel_grid(A, N):
    """Values of ``eta(A)`` on the ``N`` midpoint grid (``n`` must divide ``N``)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if N % n:
        raise IncompatibleResolution(f"graph size {n} does not divide N={N}")
    r = N // n
    return np.repeat(np.repeat(A, r, axis=0), r, axis=1)
