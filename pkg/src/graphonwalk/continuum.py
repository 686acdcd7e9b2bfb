"""Nyström solver for the continuum random-walk equation ``dw/dt = K w - w``.

The integral operator ``K f(x) = int W(x,y)/k(y) f(y) dy`` is discretized at
the ``N`` midpoints with the degree computed by the same midpoint rule.  With
that choice the discrete operator conserves mass exactly and fixes ``k``,
mirroring the continuum identities.

Two independent solution routes are provided: the spectral form built from the
symmetric normalized adjacency ``W(x,y)/sqrt(k(x)k(y))`` through the similarity
``psi = phi/sqrt(k)``, ``zeta = sqrt(k) phi``, and a direct matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.linalg import eig, eigh, expm

from .core import DEFAULT_C_MIN, DegreeFunction, check_degree_bound, degree_function
from .discretization import GridField
from .errors import DegreeTooSmall, ZeroGap
from .graphons import midpoints

ZERO_TOL = 1e-8
GAP_TOL = 1e-12
AUTO_TRUNCATION = 1e-12


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Operator weights ``Kmat[i, j] = K(x_i, x_j) / N`` and the degree samples ``kvals``."""

    Kmat: np.ndarray
    kvals: np.ndarray
    closed_form: bool = False

    @property
    def N(self):
        return self.Kmat.shape[0]

    def apply(self, values):
        return self.Kmat @ np.asarray(values, dtype=float)


def _checked_degree(W, N, c_min):
    k = degree_function(W, N)
    if not W.has_closed_kernel:
        check = check_degree_bound(k, c_min)
        if not check:
            raise DegreeTooSmall(check.min_value, c_min)
    return k


def build_kernel_matrix(W, N, c_min=DEFAULT_C_MIN):
    if N < 2:
        raise ValueError("build_kernel_matrix needs N >= 2")
    k = _checked_degree(W, N, c_min)
    x = midpoints(N)
    if W.has_closed_kernel:
        K = np.broadcast_to(W.closed_kernel(x[:, None], x[None, :]), (N, N))
        return KernelMatrix(K / N, k.samples, closed_form=True)
    return KernelMatrix(W.grid(N) / k.samples[None, :] / N, k.samples)


def normalized_adjacency(W, N, c_min=DEFAULT_C_MIN):
    """Grid values of ``W(x,y)/sqrt(k(x) k(y))``; returns ``(S, k)``."""
    if N < 2:
        raise ValueError("normalized_adjacency needs N >= 2")
    k = _checked_degree(W, N, c_min)
    r = np.sqrt(k.samples)
    S = W.grid(N) / r[:, None] / r[None, :]
    return 0.5 * (S + S.T), k


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    thetas: np.ndarray
    lambdas: np.ndarray
    phis: np.ndarray  # columns, orthonormal in the (1/N)-weighted inner product
    psis: np.ndarray
    zetas: np.ndarray
    k: np.ndarray

    @property
    def N(self):
        return self.k.shape[0]

    @property
    def gap(self):
        return float(-self.lambdas[1]) if self.lambdas.shape[0] > 1 else float("nan")

    def zero_multiplicity(self, tol=ZERO_TOL):
        return int(np.sum(np.abs(self.lambdas) <= tol))

    def coefficients(self, g):
        """``(psi_m, g)`` for every mode."""
        return self.psis.T @ np.asarray(g, dtype=float) / self.N


def spectral_decomposition(S, k):
    """Eigenpairs of the ``1/N``-weighted symmetric kernel ``S``, sorted by decreasing eigenvalue."""
    S = np.asarray(S, dtype=float)
    N = S.shape[0]
    kvals = k.samples if isinstance(k, DegreeFunction) else np.asarray(k, dtype=float)
    vals, vecs = eigh(0.5 * (S + S.T) / N)
    order = np.argsort(vals)[::-1]
    thetas = vals[order]
    phis = vecs[:, order] * np.sqrt(N)
    r = np.sqrt(kvals)[:, None]
    return SpectralDecomposition(
        thetas=thetas,
        lambdas=thetas - 1.0,
        phis=phis,
        psis=phis / r,
        zetas=phis * r,
        k=kvals,
    )


def decompose(W, N, c_min=DEFAULT_C_MIN):
    S, k = normalized_adjacency(W, N, c_min)
    return spectral_decomposition(S, k)


@dataclass(frozen=True, eq=False)
class IVPSolution:
    times: np.ndarray
    fields: List[GridField]
    method: str
    modes_used: int

    @property
    def values(self):
        return np.vstack([f.values for f in self.fields])


def _check_times(times):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("times must be nonnegative and nondecreasing")
    return times


def solve_ivp_spectral(g, dec, times, M=None):
    """``w(t) = sum_m exp(lambda_m t) (psi_m, g) zeta_m``.

    ``M=None`` keeps all ``N`` modes, an integer keeps the top ``M``, and
    ``"auto"`` keeps the modes whose contribution at the earliest time is at
    least ``1e-12 ||g||_2``.
    """
    times = _check_times(times)
    gv = g.values if isinstance(g, GridField) else np.asarray(g, dtype=float)
    coef = dec.coefficients(gv)
    lam = dec.lambdas
    if M is None:
        keep = np.ones(lam.shape[0], dtype=bool)
    elif M == "auto":
        t0 = times[0] if times.size else 0.0
        gnorm = np.sqrt(np.mean(gv**2))
        znorm = np.sqrt(np.mean(dec.zetas**2, axis=0))
        keep = np.abs(np.exp(lam * t0) * coef) * znorm >= AUTO_TRUNCATION * gnorm
        keep[0] = True
    else:
        keep = np.zeros(lam.shape[0], dtype=bool)
        keep[: int(M)] = True
    Z = dec.zetas[:, keep]
    fields = [GridField(Z @ (np.exp(lam[keep] * t) * coef[keep])) for t in times]
    return IVPSolution(times, fields, "spectral", int(keep.sum()))


def solve_ivp_exponential(g, Km, t):
    """``w(t) = exp(t (K - I)) g = e^-t exp(t K) g`` by scaling and squaring."""
    if t < 0:
        raise ValueError("t must be >= 0")
    gv = g.values if isinstance(g, GridField) else np.asarray(g, dtype=float)
    if t == 0:
        return GridField(gv.copy())
    return GridField(np.exp(-t) * (expm(t * Km.Kmat) @ gv))


def solve_ivp_exponential_path(g, Km, times):
    times = _check_times(times)
    fields = [solve_ivp_exponential(g, Km, t) for t in times]
    return IVPSolution(times, fields, "exponential", Km.N)


def steady_state(g, k):
    """``k * int g / int k``, the limit of the continuum walk started from ``g``."""
    gv = g.values if isinstance(g, GridField) else np.asarray(g, dtype=float)
    kv = k.samples if isinstance(k, DegreeFunction) else np.asarray(k, dtype=float)
    return GridField(kv * gv.mean() / kv.mean())


def relaxation_time(dec):
    """``1/gap = -1/lambda_2``; raises :class:`ZeroGap` when the gap vanishes."""
    lam2 = dec.lambdas[1]
    if abs(lam2) < GAP_TOL:
        raise ZeroGap(lam2)
    return -1.0 / lam2


def discrete_time_step(w, Km, ell):
    """``w(ell) = K^ell w(0)`` by repeated application."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    v = w.values if isinstance(w, GridField) else np.asarray(w, dtype=float)
    for _ in range(ell):
        v = Km.apply(v)
    return GridField(v)


def discrete_time_spectral(w0, dec, ell):
    """``sum_m theta_m^ell (psi_m, w0) zeta_m``, the eigenvalues being those of ``K``."""
    v = w0.values if isinstance(w0, GridField) else np.asarray(w0, dtype=float)
    coef = dec.coefficients(v)
    return GridField(dec.zetas @ (dec.thetas**ell * coef))


def kernel_eigen(Km):
    """Direct (nonsymmetric) eigensolve of the discretized ``K``.

    Used for closed-form kernels such as ``W = xy`` whose degree vanishes at 0,
    where the symmetric similarity is not available in the continuum.
    Returns eigenvalues sorted by decreasing real part and matching eigenvectors.
    """
    vals, vecs = eig(Km.Kmat)
    order = np.argsort(-vals.real, kind="stable")
    return vals[order], vecs[:, order]
