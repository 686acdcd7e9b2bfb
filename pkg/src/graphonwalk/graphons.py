"""Graphon families and their plain-text configuration records.

A graphon is a symmetric kernel ``W: [0,1]^2 -> [0,1]``.  Every family here is
vectorized: ``W(x, y)`` broadcasts over numpy arrays.  Families that admit a
closed-form degree function ``k(x) = int_0^1 W(x, y) dy`` expose it through
:meth:`Graphon.closed_degree`; families whose random-walk kernel ``W(x,y)/k(y)``
stays bounded even though ``k`` vanishes expose :meth:`Graphon.closed_kernel`.

Configuration record (JSON/YAML mapping)::

    {"family": "stripe", "params": {"h": 0.25}}
    {"family": "block", "blocks": [[0.8, 0.2], [0.2, 0.6]], "boundaries": [0, 0.5, 1]}
    {"family": "affine", "params": {"offset": 0.1},
     "terms": [{"weight": 0.5, "graphon": {"family": "stripe", "params": {"h": 0.25}}}]}

Short form accepted on the command line: ``family[:key=value,...]``, e.g.
``constant:p=0.5``, ``stripe:h=0.25``, ``threshold:alpha=2``,
``block:blocks=[[1,0],[0,1]]``.  Values are parsed as JSON.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, RangeError

__all__ = [
    "midpoints",
    "Graphon",
    "Constant",
    "Separable",
    "Stripe",
    "Threshold",
    "Block",
    "Step",
    "Affine",
    "FAMILIES",
    "from_config",
    "parse_graphon",
]


def midpoints(N):
    """Midpoint quadrature nodes ``x_i = (i - 1/2)/N`` for ``i = 1..N``."""
    return (np.arange(N) + 0.5) / N


class Graphon:
    family = "abstract"
    # False for families whose discontinuities sit on cell boundaries, so that
    # point sampling at i/n must be nudged into the cell to the left.
    jumps_on_cell_edges = False

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self._evaluate(x, y)

    def _evaluate(self, x, y):
        raise NotImplementedError

    def grid(self, N):
        """Values ``W(x_i, x_j)`` on the ``N``-point midpoint grid."""
        x = midpoints(N)
        return np.broadcast_to(self(x[:, None], x[None, :]), (N, N)).astype(float)

    def closed_degree(self, x):
        """Exact degree function, or ``None`` when no closed form is known."""
        return None

    @property
    def has_closed_degree(self):
        return self.closed_degree(np.array([0.5])) is not None

    def closed_kernel(self, x, y):
        """Bounded closed form of ``W(x,y)/k(y)`` if the family provides one."""
        return None

    @property
    def has_closed_kernel(self):
        return self.closed_kernel(np.array([0.5]), np.array([0.5])) is not None

    def to_config(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_config())})"


class Constant(Graphon):
    family = "constant"

    def __init__(self, p=0.5):
        if not 0.0 <= p <= 1.0:
            raise RangeError(f"constant graphon value p={p} outside [0, 1]")
        self.p = float(p)

    def _evaluate(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.p)

    def closed_degree(self, x):
        return np.full(np.shape(x), self.p)

    def to_config(self):
        return {"family": self.family, "params": {"p": self.p}}


class Separable(Graphon):
    """``W(x,y) = x^m y^m``; ``k(x) = x^m/(m+1)`` vanishes at 0 but ``K = (m+1) x^m``."""

    family = "separable"

    def __init__(self, m=1.0):
        if m <= 0:
            raise ConfigError("separable exponent m must be positive")
        self.m = float(m)

    def _evaluate(self, x, y):
        return (x * y) ** self.m

    def closed_degree(self, x):
        return np.asarray(x, dtype=float) ** self.m / (self.m + 1.0)

    def closed_kernel(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return (self.m + 1.0) * x**self.m

    def to_config(self):
        return {"family": self.family, "params": {"m": self.m}}


class Stripe(Graphon):
    """Band indicator ``1{|x - y| <= h}``."""

    family = "stripe"

    def __init__(self, h=0.25):
        if not 0.0 < h <= 1.0:
            raise ConfigError("stripe half-width h must lie in (0, 1]")
        self.h = float(h)

    def _evaluate(self, x, y):
        return (np.abs(x - y) <= self.h).astype(float)

    def closed_degree(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x + self.h, 1.0) - np.maximum(x - self.h, 0.0)

    def to_config(self):
        return {"family": self.family, "params": {"h": self.h}}


class Threshold(Graphon):
    """``1{x^alpha + y^alpha <= 1}`` with ``k(x) = (1 - x^alpha)^(1/alpha)``."""

    family = "threshold"

    def __init__(self, alpha=2.0):
        if alpha <= 0:
            raise ConfigError("threshold exponent alpha must be positive")
        self.alpha = float(alpha)

    def _evaluate(self, x, y):
        return (x**self.alpha + y**self.alpha <= 1.0).astype(float)

    def closed_degree(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip(1.0 - x**self.alpha, 0.0, None) ** (1.0 / self.alpha)

    def to_config(self):
        return {"family": self.family, "params": {"alpha": self.alpha}}


class Block(Graphon):
    """Piecewise-constant graphon with block weights ``blocks`` on intervals.

    ``boundaries`` lists the cell edges ``0 = b_0 < b_1 < ... < b_K = 1``; cells
    are half-open ``[b_i, b_{i+1})`` except the last, which contains 1.
    """

    family = "block"
    jumps_on_cell_edges = True

    def __init__(self, blocks, boundaries=None):
        B = np.array(blocks, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ConfigError("block matrix must be square")
        if not np.array_equal(B, B.T):
            raise ConfigError("block matrix must be symmetric")
        if B.min() < 0.0 or B.max() > 1.0:
            raise RangeError("block weights must lie in [0, 1]")
        K = B.shape[0]
        if boundaries is None:
            edges = np.linspace(0.0, 1.0, K + 1)
        else:
            edges = np.array(boundaries, dtype=float)
            if edges.shape != (K + 1,) or edges[0] != 0.0 or edges[-1] != 1.0:
                raise ConfigError(f"boundaries must be {K + 1} edges from 0 to 1")
            if np.any(np.diff(edges) <= 0):
                raise ConfigError("boundaries must be strictly increasing")
        self.blocks = B
        self.edges = edges
        self.widths = np.diff(edges)

    def cell_index(self, x):
        idx = np.searchsorted(self.edges, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.blocks.shape[0] - 1)

    def _evaluate(self, x, y):
        return self.blocks[self.cell_index(x), self.cell_index(y)]

    def closed_degree(self, x):
        return (self.blocks @ self.widths)[self.cell_index(x)]

    def to_config(self):
        return {
            "family": self.family,
            "params": {},
            "blocks": self.blocks.tolist(),
            "boundaries": self.edges.tolist(),
        }


class Step(Block):
    """Step graphon ``eta(G)`` of an adjacency matrix on the uniform partition."""

    family = "step"

    def __init__(self, A):
        super().__init__(A)
        self.n = self.blocks.shape[0]

    def cell_index(self, x):
        idx = np.floor(np.asarray(x, dtype=float) * self.n).astype(int)
        return np.clip(idx, 0, self.n - 1)

    def to_config(self):
        return {"family": self.family, "params": {}, "blocks": self.blocks.tolist()}


class Affine(Graphon):
    """``offset + sum_i weight_i * W_i``; range is validated on a 64x64 grid."""

    family = "affine"

    def __init__(self, terms, offset=0.0):
        self.terms = [(float(w), g) for w, g in terms]
        self.offset = float(offset)
        probe = self.grid(64)
        if probe.min() < -1e-12 or probe.max() > 1.0 + 1e-12:
            raise RangeError("affine composite leaves [0, 1]")
        self.jumps_on_cell_edges = any(g.jumps_on_cell_edges for _, g in self.terms)

    def _evaluate(self, x, y):
        out = np.full(np.broadcast(x, y).shape, self.offset)
        for w, g in self.terms:
            out = out + w * g(x, y)
        return out

    def closed_degree(self, x):
        parts = [g.closed_degree(x) for _, g in self.terms]
        if any(p is None for p in parts):
            return None
        out = np.full(np.shape(x), self.offset)
        for (w, _), p in zip(self.terms, parts):
            out = out + w * p
        return out

    def to_config(self):
        return {
            "family": self.family,
            "params": {"offset": self.offset},
            "terms": [{"weight": w, "graphon": g.to_config()} for w, g in self.terms],
        }


FAMILIES = {
    "constant": Constant,
    "separable": Separable,
    "stripe": Stripe,
    "threshold": Threshold,
    "block": Block,
    "step": Step,
    "affine": Affine,
}


def from_config(record):
    """Build a graphon from a configuration mapping (see module docstring)."""
    if isinstance(record, Graphon):
        return record
    if not isinstance(record, dict) or "family" not in record:
        raise ConfigError(f"graphon record needs a 'family' field: {record!r}")
    family = record["family"]
    params = dict(record.get("params") or {})
    try:
        if family == "block":
            blocks = record.get("blocks", params.pop("blocks", None))
            if blocks is None:
                raise ConfigError("block graphon needs 'blocks'")
            return Block(blocks, record.get("boundaries", params.pop("boundaries", None)))
        if family == "step":
            blocks = record.get("blocks", params.pop("blocks", None))
            if blocks is None:
                raise ConfigError("step graphon needs 'blocks'")
            return Step(blocks)
        if family == "affine":
            terms = [(t["weight"], from_config(t["graphon"])) for t in record.get("terms", [])]
            return Affine(terms, params.get("offset", 0.0))
        if family not in FAMILIES:
            raise ConfigError(f"unknown graphon family {family!r}")
        return FAMILIES[family](**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}") from None


def _split_top_level(text):
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p for p in (s.strip() for s in parts) if p]


def parse_graphon(text):
    """Parse ``family:k=v,...``, an inline JSON record, or ``@path`` to a JSON/YAML file."""
    text = text.strip()
    if text.startswith("@"):
        import yaml

        path = Path(text[1:])
        if not path.exists():
            raise ConfigError(f"graphon config file not found: {path}")
        return from_config(yaml.safe_load(path.read_text()))
    if text.startswith("{"):
        try:
            return from_config(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid graphon JSON: {exc}") from None
    family, _, rest = text.partition(":")
    record = {"family": family.strip(), "params": {}}
    for item in _split_top_level(rest):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value in graphon spec, got {item!r}")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse value {value!r} for {key}") from None
        if key.strip() in ("blocks", "boundaries"):
            record[key.strip()] = parsed
        else:
            record["params"][key.strip()] = parsed
    return from_config(record)
