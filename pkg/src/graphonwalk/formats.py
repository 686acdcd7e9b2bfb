"""Plain-text and binary file formats.

=====================  ==========================================================
object                 layout
=====================  ==========================================================
WeightedGraph          first line ``n``; then ``n`` rows of ``n`` comma-separated reals
StepFunction           header ``value``; one value per line
walk trajectory        header ``time,node``
occupancy histogram    header ``node,count,frequency``
spectrum               header ``index,theta,lambda``
degree function        header ``x,k``
IVPSolution (CSV)      header ``t,w0,...,w{N-1}``; one row per time
IVPSolution (binary)   little-endian uint64 ``N``, uint64 ``T``; ``T`` float64 times;
                       ``T*N`` float64 values, row-major (time-major)
ConvergenceReport      header ``n,t,error,bound,kernel_dist,g_dist,beta``
discrete-time errors   header ``n,ell,error``
=====================  ==========================================================

Reals are written with 17 significant digits so that text round trips are
bit-exact.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .continuum import IVPSolution
from .discretization import GridField, StepFunction, WeightedGraph
from .errors import ConfigError

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % x


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_graph(G, path):
    with open(path, "w") as fh:
        fh.write(f"{G.n}\n")
        for row in G.A:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_graph(path):
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"empty graph file {path}")
    try:
        n = int(lines[0])
        A = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise ConfigError(f"malformed graph file {path}: {exc}") from None
    if A.shape != (n, n):
        raise ConfigError(f"graph file {path} declares n={n} but holds {A.shape}")
    return WeightedGraph(A)


def write_step_function(u, path):
    _write_rows(path, ["value"], [[_fmt(v)] for v in u.values])


def read_step_function(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["value"]:
        raise ConfigError(f"step function file {path} must start with a 'value' header")
    return StepFunction(np.array([float(r[0]) for r in rows[1:] if r]))


def write_trajectory(traj, path):
    _write_rows(path, ["time", "node"], [[_fmt(t), v] for t, v in traj.events])


def write_histogram(counts, path):
    counts = np.asarray(counts)
    total = max(int(counts.sum()), 1)
    _write_rows(
        path,
        ["node", "count", "frequency"],
        [[i, int(c), _fmt(c / total)] for i, c in enumerate(counts)],
    )


def write_spectrum(dec, path):
    _write_rows(
        path,
        ["index", "theta", "lambda"],
        [[i, _fmt(th), _fmt(la)] for i, (th, la) in enumerate(zip(dec.thetas, dec.lambdas))],
    )


def write_degree(k, path):
    _write_rows(path, ["x", "k"], [[_fmt(x), _fmt(v)] for x, v in zip(k.nodes, k.samples)])


def write_solution_csv(sol, path):
    N = sol.fields[0].N if sol.fields else 0
    header = ["t"] + [f"w{i}" for i in range(N)]
    rows = [[_fmt(t)] + [_fmt(v) for v in f.values] for t, f in zip(sol.times, sol.fields)]
    _write_rows(path, header, rows)


def write_solution_binary(sol, path):
    N = sol.fields[0].N if sol.fields else 0
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", N, len(sol.times)))
        fh.write(np.asarray(sol.times, dtype="<f8").tobytes())
        if sol.fields:
            fh.write(np.asarray(sol.values, dtype="<f8").tobytes())


def read_solution_binary(path, method="binary"):
    data = Path(path).read_bytes()
    N, T = struct.unpack("<QQ", data[:16])
    body = np.frombuffer(data[16:], dtype="<f8")
    if body.size != T + T * N:
        raise ConfigError(f"binary solution {path} is truncated")
    times = body[:T].copy()
    values = body[T:].reshape(T, N)
    return IVPSolution(times, [GridField(v.copy()) for v in values], method, int(N))


def write_report_csv(report, path):
    _write_rows(
        path,
        ["n", "t", "error", "bound", "kernel_dist", "g_dist", "beta"],
        [
            [r.n, _fmt(r.t), _fmt(r.error), _fmt(r.bound), _fmt(r.kernel_dist), _fmt(r.g_dist), _fmt(r.beta)]
            for r in report.rows
        ],
    )


def write_discrete_csv(report, path):
    _write_rows(path, ["n", "ell", "error"], [[r.n, r.ell, _fmt(r.error)] for r in report.discrete_rows])


def write_report_summary(report, path):
    Path(path).write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
