"""Named initial conditions on [0, 1], parsed from ``name[:key=value,...]``."""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError


def _cos(amp=0.5, freq=1.0):
    return lambda x: 1.0 + amp * np.cos(2.0 * np.pi * freq * np.asarray(x, dtype=float))


def _sin(freq=3.0):
    return lambda x: np.sin(np.pi * freq * np.asarray(x, dtype=float))


def _one(value=1.0):
    return lambda x: np.full(np.shape(x), float(value))


def _linear(slope=1.0, intercept=0.0):
    return lambda x: intercept + slope * np.asarray(x, dtype=float)


def _bump(center=0.5, width=0.1):
    return lambda x: np.exp(-(((np.asarray(x, dtype=float) - center) / width) ** 2))


def _step(values):
    vals = np.asarray(values, dtype=float)
    n = vals.shape[0]

    def f(x):
        idx = np.clip(np.floor(np.asarray(x, dtype=float) * n).astype(int), 0, n - 1)
        return vals[idx]

    return f


NAMED = {
    "cos": _cos,
    "sin": _sin,
    "one": _one,
    "constant": _one,
    "linear": _linear,
    "bump": _bump,
    "step": _step,
}


def parse_function(text):
    """``cos`` is ``1 + cos(2 pi x)/2``; parameters override defaults, e.g. ``cos:amp=0.25``."""
    name, _, rest = text.strip().partition(":")
    if name not in NAMED:
        raise ConfigError(f"unknown initial condition {name!r}; choose from {sorted(NAMED)}")
    params = {}
    depth, start, items = 0, 0, []
    for i, ch in enumerate(rest):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            items.append(rest[start:i])
            start = i + 1
    items.append(rest[start:])
    for item in filter(None, (s.strip() for s in items)):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {item!r}")
        try:
            params[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            raise ConfigError(f"cannot parse {value!r}") from None
    try:
        return NAMED[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from None
