"""Random walks on finite weighted graphs.

States are row vectors multiplying matrices from the left, so ``p(l) = p(0) T^l``
and ``u(t) = u(0) exp(t M)``.  Three processes are covered: the discrete-time
walk, the node-centric continuous-time walk (generator ``kappa (D^-1 A - I)``)
and the edge-centric walk (generator ``kappa_n (A - D)``, ``kappa_n = 1/n`` by
default).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.linalg import eigh, expm

from .errors import IsolatedNode

NODE_CENTRIC = "node_centric"
EDGE_CENTRIC = "edge_centric"
DISCRETE = "discrete"

# Above this ratio of largest to smallest strength the D^(1/2) similarity is
# considered ill-conditioned and the generic exponential is used instead.
CONDITION_THRESHOLD = 1e12

# Walkers are simulated in fixed-size chunks, each with its own RNG stream, so
# results do not depend on how many threads process the chunks.
WALKER_CHUNK = 10_000


def _positive_strengths(G):
    s = G.strengths
    bad = np.flatnonzero(s <= 0.0)
    if bad.size:
        raise IsolatedNode(bad[0])
    return s


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    T: np.ndarray


def transition_matrix(G):
    """``T = D^-1 A``; raises :class:`IsolatedNode` on zero-strength rows."""
    s = _positive_strengths(G)
    return TransitionMatrix(G.A / s[:, None])


def evolve_discrete(p0, T, ell):
    """``p(ell) = p0 T^ell`` by repeated vector-matrix products."""
    p = np.asarray(p0, dtype=float).copy()
    if np.any(p < 0):
        raise ValueError("initial distribution must be nonnegative")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    M = T.T if isinstance(T, TransitionMatrix) else np.asarray(T, dtype=float)
    for _ in range(ell):
        p = p @ M
    return p


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    kind: str
    M: np.ndarray
    A: np.ndarray
    strengths: np.ndarray
    kappa: float


def laplacian(G, kind="random_walk", kappa=None):
    """Build ``kappa (D^-1 A - I)`` (``random_walk``) or ``kappa (A - D)`` (``combinatorial_scaled``).

    ``kappa`` defaults to 1 for the random-walk kind and to ``1/n`` for the
    combinatorial kind.
    """
    if kind == "random_walk":
        kappa = 1.0 if kappa is None else float(kappa)
        s = _positive_strengths(G)
        M = kappa * (G.A / s[:, None] - np.eye(G.n))
    elif kind == "combinatorial_scaled":
        kappa = 1.0 / G.n if kappa is None else float(kappa)
        s = G.strengths
        M = kappa * (G.A - np.diag(s))
    else:
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    return LaplacianMatrix(kind, M, G.A, s, kappa)


def _symmetric_exp(S, shift, t, kappa):
    # exp(t kappa (S - shift)) for symmetric S via its eigendecomposition
    vals, vecs = eigh(S)
    return (vecs * np.exp(t * kappa * (vals - shift))) @ vecs.T


def evolve_continuous(u0, L, t):
    """``u(t) = u0 exp(t M)`` for a row vector ``u0``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    u0 = np.asarray(u0, dtype=float)
    if t == 0:
        return u0.copy()
    if L.kind == "combinatorial_scaled":
        S = L.A - np.diag(L.strengths)
        return u0 @ _symmetric_exp(0.5 * (S + S.T), 0.0, t, L.kappa)
    s = L.strengths
    if s.max() / s.min() > CONDITION_THRESHOLD:
        return u0 @ expm(t * L.M)
    # D^-1 A = D^-1/2 S D^1/2 with S = D^-1/2 A D^-1/2 symmetric
    r = np.sqrt(s)
    S = L.A / r[:, None] / r[None, :]
    E = _symmetric_exp(0.5 * (S + S.T), 1.0, t, L.kappa)
    return ((u0 / r) @ E) * r


def stationary_distribution(G, mode=NODE_CENTRIC):
    """Asymptotic state: proportional to strengths, or uniform for the edge-centric walk."""
    if mode == EDGE_CENTRIC:
        return np.full(G.n, 1.0 / G.n)
    s = _positive_strengths(G)
    return s / s.sum()


@dataclass
class WalkTrajectory:
    seed: int
    mode: str
    events: List[Tuple[float, int]] = field(default_factory=list)

    @property
    def times(self):
        return np.array([e[0] for e in self.events])

    @property
    def nodes(self):
        return np.array([e[1] for e in self.events], dtype=int)

    @property
    def n_jumps(self):
        return len(self.events) - 1

    def node_at(self, t):
        idx = np.searchsorted(self.times, t, side="right") - 1
        return int(self.nodes[max(idx, 0)])


def _rates(G, mode, kappa):
    s = _positive_strengths(G)
    if mode == NODE_CENTRIC:
        return np.full(G.n, 1.0 if kappa is None else float(kappa))
    if mode == EDGE_CENTRIC:
        k = 1.0 / G.n if kappa is None else float(kappa)
        return k * s
    raise ValueError(f"unknown continuous-time mode {mode!r}")


def gillespie_walk(G, mode, start, t_max, seed, kappa=None):
    """Event-driven simulation of one walker up to ``t_max``.

    The waiting time at node ``j`` is exponential with rate ``kappa``
    (node-centric) or ``kappa_n * str(v_j)`` (edge-centric, ``kappa_n = 1/n``
    unless given); destinations follow row ``j`` of ``T``.  The first event is
    ``(0, start)``; jumps beyond ``t_max`` are not recorded.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    T = transition_matrix(G).T
    rates = _rates(G, mode, kappa)
    cum = np.cumsum(T, axis=1)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    traj = WalkTrajectory(seed=int(seed), mode=mode, events=[(0.0, int(start))])
    t, node = 0.0, int(start)
    while True:
        t += rng.exponential(1.0 / rates[node])
        if t > t_max:
            break
        node = int(min(np.searchsorted(cum[node], rng.random(), side="right"), G.n - 1))
        traj.events.append((t, node))
    return traj


def _simulate_chunk(cum, rates, start, t_max, count, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    n = cum.shape[0]
    node = np.full(count, start, dtype=np.int64)
    t = np.zeros(count)
    jumps = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    while active.size:
        t[active] += rng.exponential(1.0 / rates[node[active]])
        active = active[t[active] <= t_max]
        if not active.size:
            break
        u = rng.random(active.size)
        dest = (cum[node[active]] <= u[:, None]).sum(axis=1)
        node[active] = np.minimum(dest, n - 1)
        jumps[active] += 1
    return node, jumps


def simulate_walkers(G, mode, start, t_max, walkers, seed, kappa=None, threads=1):
    """Final nodes and jump counts of ``walkers`` independent walkers at ``t_max``.

    Chunk ``c`` of :data:`WALKER_CHUNK` walkers draws from the stream
    ``SeedSequence(seed).spawn(...)[c]``, so output is identical for any
    ``threads`` value.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    T = transition_matrix(G).T
    rates = _rates(G, mode, kappa)
    cum = np.cumsum(T, axis=1)
    cum[:, -1] = 1.0
    sizes = [WALKER_CHUNK] * (walkers // WALKER_CHUNK)
    if walkers % WALKER_CHUNK:
        sizes.append(walkers % WALKER_CHUNK)
    streams = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    tasks = [(cum, rates, int(start), float(t_max), c, s) for c, s in zip(sizes, streams)]
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _simulate_chunk(*a), tasks))
    else:
        results = [_simulate_chunk(*a) for a in tasks]
    nodes = np.concatenate([r[0] for r in results]) if results else np.zeros(0, int)
    jumps = np.concatenate([r[1] for r in results]) if results else np.zeros(0, int)
    return nodes, jumps


def occupancy(nodes, n):
    """Counts and frequencies of final positions over ``n`` nodes."""
    counts = np.bincount(nodes, minlength=n)
    return counts, counts / max(counts.sum(), 1)


def total_variation(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
