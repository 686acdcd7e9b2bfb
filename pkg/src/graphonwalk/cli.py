"""Command-line front end.

Every command writes its CSV outputs under the ``--output`` prefix together
with ``<prefix>_manifest.json`` (config echo, package versions, wall time).
A run can also be described by a JSON/YAML file with the same field names as
:class:`RunConfig`::

    command: converge
    graphon: "stripe:h=0.25"
    output: out/stripe
    seed: 7
    params: {g: cos, ns: [8, 16, 32, 64], t: [1.0]}

Exit codes: 0 success, 1 configuration error, 2 hypothesis violation
(degree bound, connectivity, isolated node, zero gap), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import scipy

from . import __version__
from . import formats
from .continuum import (
    build_kernel_matrix,
    decompose,
    kernel_eigen,
    relaxation_time,
    solve_ivp_exponential_path,
    solve_ivp_spectral,
)
from .convergence import ExperimentSpec, run_lemma_suites, run_study
from .core import DEFAULT_C_MIN, check_degree_bound, degree_function
from .discretization import GridField, quotient_graph, sampled_graph
from .errors import ConfigError, HypothesisViolation
from .functions import parse_function
from .graphons import parse_graphon
from .plotting import line_chart_svg
from .walks import (
    EDGE_CENTRIC,
    NODE_CENTRIC,
    evolve_continuous,
    gillespie_walk,
    laplacian,
    occupancy,
    simulate_walkers,
    total_variation,
)

COMMANDS = ("degree", "spectrum", "solve", "walk", "converge", "lemma-check")
SEED_ENV = "GRAPHONWALK_SEED"

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "degree": {"N": 256, "c_min": DEFAULT_C_MIN},
    "spectrum": {"N": 256, "c_min": DEFAULT_C_MIN, "direct": False},
    "solve": {"N": 256, "g": "cos", "t": [0.0, 0.1, 1.0, 10.0], "method": "spectral",
              "binary": False, "svg": False, "c_min": DEFAULT_C_MIN},
    "walk": {"n": 16, "graph": "quotient", "mode": NODE_CENTRIC, "kappa": None, "walkers": 100000,
             "t": 1.0, "start": 0, "trajectory": False},
    "converge": {"g": "cos", "ns": [8, 16, 32, 64, 128], "t": [1.0], "mode": "quotient",
                 "N_ref": None, "ells": [], "graphs": [], "inits": [], "svg": False,
                 "c_min": DEFAULT_C_MIN},
    "lemma-check": {"step_cases": 50, "hs_cases": 100},
}
DEFAULT_GRAPHON = "stripe:h=0.25"


@dataclass
class RunConfig:
    command: str
    graphon: Any = DEFAULT_GRAPHON
    params: Dict[str, Any] = field(default_factory=dict)
    output: str = "graphonwalk"
    seed: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        unknown = set(self.params) - set(DEFAULTS[self.command])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.command}: {sorted(unknown)}")
        self.params = {**DEFAULTS[self.command], **self.params}
        if self.seed is None and os.environ.get(SEED_ENV):
            try:
                self.seed = int(os.environ[SEED_ENV])
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer") from None
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @classmethod
    def from_file(cls, path):
        import yaml

        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        data = yaml.safe_load(path.read_text())
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
        unknown = set(data) - {"command", "graphon", "params", "output", "seed", "threads"}
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)


def _graphon(cfg):
    from .graphons import from_config

    if isinstance(cfg.graphon, dict):
        return from_config(cfg.graphon)
    return parse_graphon(str(cfg.graphon))


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _positive_int(name, v, lo=1):
    try:
        v = int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer") from None
    if v < lo:
        raise ConfigError(f"{name} must be >= {lo}")
    return v


def _cmd_degree(cfg, out):
    p = cfg.params
    W = _graphon(cfg)
    k = degree_function(W, _positive_int("N", p["N"], 2))
    path = f"{cfg.output}_degree.csv"
    formats.write_degree(k, path)
    out.append(path)
    check = check_degree_bound(k, float(p["c_min"]))
    print(f"min k = {check.min_value:.6g}  (c_min = {check.c_min:g}): {'pass' if check else 'fail'}")
    if not check:
        raise HypothesisViolation(f"degree bound fails: min k = {check.min_value:.6g}")


def _cmd_spectrum(cfg, out):
    p = cfg.params
    W = _graphon(cfg)
    N = _positive_int("N", p["N"], 2)
    dec = decompose(W, N, float(p["c_min"]))
    path = f"{cfg.output}_spectrum.csv"
    formats.write_spectrum(dec, path)
    out.append(path)
    print(f"lambda_1 = {dec.lambdas[0]:.3e}  lambda_2 = {dec.lambdas[1]:.6g}  "
          f"zero multiplicity = {dec.zero_multiplicity()}")
    if p["direct"]:
        vals, _ = kernel_eigen(build_kernel_matrix(W, N, float(p["c_min"])))
        dpath = f"{cfg.output}_kernel_eigenvalues.csv"
        formats._write_rows(dpath, ["index", "theta", "lambda"],
                            [[i, formats._fmt(v.real), formats._fmt(v.real - 1.0)] for i, v in enumerate(vals)])
        out.append(dpath)
    print(f"relaxation time = {relaxation_time(dec):.6g}")


def _cmd_solve(cfg, out):
    p = cfg.params
    W = _graphon(cfg)
    N = _positive_int("N", p["N"], 2)
    times = sorted(float(t) for t in _as_list(p["t"]))
    g = GridField.from_function(parse_function(str(p["g"])), N)
    method = p["method"]
    if method not in ("spectral", "exponential", "both"):
        raise ConfigError("method must be spectral, exponential or both")
    sols = {}
    if method in ("spectral", "both"):
        sols["spectral"] = solve_ivp_spectral(g, decompose(W, N, float(p["c_min"])), times)
    if method in ("exponential", "both"):
        sols["exponential"] = solve_ivp_exponential_path(g, build_kernel_matrix(W, N, float(p["c_min"])), times)
    for name, sol in sols.items():
        path = f"{cfg.output}_solution_{name}.csv"
        formats.write_solution_csv(sol, path)
        out.append(path)
        if p["binary"]:
            bpath = f"{cfg.output}_solution_{name}.bin"
            formats.write_solution_binary(sol, bpath)
            out.append(bpath)
        if p["svg"]:
            spath = f"{cfg.output}_solution_{name}.svg"
            line_chart_svg({f"t={t:g}": (g.nodes, f.values) for t, f in zip(sol.times, sol.fields)},
                           spath, title=f"w(x, t), {name}", xlabel="x", ylabel="w")
            out.append(spath)
    if method == "both":
        a, b = sols["spectral"].values, sols["exponential"].values
        rel = np.sqrt(np.mean((a - b) ** 2, axis=1)) / g.l2_norm
        print(f"max relative L2 difference spectral vs exponential: {rel.max():.3e}")
    for name, sol in sols.items():
        masses = [f.mass for f in sol.fields]
        print(f"{name}: mass drift {max(abs(m - g.mass) for m in masses):.3e}, "
              f"min value {min(f.values.min() for f in sol.fields):.3e}")


def _cmd_walk(cfg, out):
    p = cfg.params
    W = _graphon(cfg)
    n = _positive_int("n", p["n"], 1)
    if p["graph"] == "quotient":
        G = quotient_graph(W, n)
    elif p["graph"] == "sampled":
        G = sampled_graph(W, n)
    else:
        G = formats.read_graph(p["graph"])
    mode = p["mode"]
    if mode not in (NODE_CENTRIC, EDGE_CENTRIC):
        raise ConfigError(f"walk mode must be {NODE_CENTRIC} or {EDGE_CENTRIC}")
    t = float(p["t"])
    if t <= 0:
        raise ConfigError("t must be positive")
    start = int(p["start"])
    if not 0 <= start < G.n:
        raise ConfigError(f"start node must lie in [0, {G.n})")
    seed = 0 if cfg.seed is None else int(cfg.seed)
    walkers = _positive_int("walkers", p["walkers"], 1)
    nodes, jumps = simulate_walkers(G, mode, start, t, walkers, seed, p["kappa"], cfg.threads)
    counts, freq = occupancy(nodes, G.n)
    path = f"{cfg.output}_histogram.csv"
    formats.write_histogram(counts, path)
    out.append(path)
    kind = "random_walk" if mode == NODE_CENTRIC else "combinatorial_scaled"
    u0 = np.zeros(G.n)
    u0[start] = 1.0
    exact = evolve_continuous(u0, laplacian(G, kind, p["kappa"]), t)
    mpath = f"{cfg.output}_master.csv"
    formats._write_rows(mpath, ["node", "probability"], [[i, formats._fmt(v)] for i, v in enumerate(exact)])
    out.append(mpath)
    if p["trajectory"]:
        tpath = f"{cfg.output}_trajectory.csv"
        formats.write_trajectory(gillespie_walk(G, mode, start, t, seed, p["kappa"]), tpath)
        out.append(tpath)
    print(f"total variation to master equation: {total_variation(freq, exact):.4g}; "
          f"mean jumps {jumps.mean():.4g}")


def _cmd_converge(cfg, out):
    p = cfg.params
    W = _graphon(cfg)
    g = parse_function(str(p["g"]))
    sequence = None
    if p["mode"] == "external_sequence":
        graphs = _as_list(p["graphs"])
        inits = _as_list(p["inits"])
        if not graphs or len(graphs) != len(inits):
            raise ConfigError("external_sequence needs matching --graphs and --inits files")
        sequence = [(formats.read_graph(a), formats.read_step_function(b)) for a, b in zip(graphs, inits)]
    spec = ExperimentSpec(
        graphon=W, g=g, mode=p["mode"], ns=[int(n) for n in _as_list(p["ns"])],
        times=[float(t) for t in _as_list(p["t"])],
        N_ref=None if p["N_ref"] is None else int(p["N_ref"]),
        sequence=sequence, ells=[int(e) for e in _as_list(p["ells"])], c_min=float(p["c_min"]),
    )
    report = run_study(spec)
    paths = [f"{cfg.output}_report.csv", f"{cfg.output}_summary.json"]
    formats.write_report_csv(report, paths[0])
    formats.write_report_summary(report, paths[1])
    if spec.ells:
        paths.append(f"{cfg.output}_discrete.csv")
        formats.write_discrete_csv(report, paths[-1])
    if p["svg"]:
        paths.append(f"{cfg.output}_errors.svg")
        line_chart_svg({f"t={t:g}": (spec.ns, report.errors(t)) for t in spec.times}, paths[-1],
                       title="L2 error vs n", xlabel="n", ylabel="error", logx=True, logy=True)
    out.extend(paths)
    for t in spec.times:
        errs = ", ".join(f"{e:.3e}" for e in report.errors(t))
        print(f"t={t:g}: errors [{errs}] slope {report.slopes[t]:.3f}")
    print(f"bound holds: {report.bound_holds}")


def _cmd_lemma_check(cfg, out):
    p = cfg.params
    seed = 0 if cfg.seed is None else int(cfg.seed)
    cases = run_lemma_suites(seed, int(p["step_cases"]), int(p["hs_cases"]))
    path = f"{cfg.output}_lemmas.csv"
    formats._write_rows(path, ["lemma", "case", "n", "N", "ell", "passed"],
                        [[c.lemma, c.case, c.n, c.N, c.ell, int(c.passed)] for c in cases])
    out.append(path)
    failed = [c for c in cases if not c.passed]
    print(f"{len(cases) - len(failed)}/{len(cases)} lemma cases passed")
    if failed:
        raise FloatingPointError(f"{len(failed)} lemma cases failed")


HANDLERS = {
    "degree": _cmd_degree,
    "spectrum": _cmd_spectrum,
    "solve": _cmd_solve,
    "walk": _cmd_walk,
    "converge": _cmd_converge,
    "lemma-check": _cmd_lemma_check,
}


def run(cfg):
    """Execute one configured command; returns the list of files written."""
    Path(cfg.output).parent.mkdir(parents=True, exist_ok=True)
    written = []
    start = time.perf_counter()
    HANDLERS[cfg.command](cfg, written)
    manifest = {
        "config": asdict(cfg),
        "versions": {
            "graphonwalk": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": time.perf_counter() - start,
        "outputs": written,
    }
    mpath = f"{cfg.output}_manifest.json"
    Path(mpath).write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    written.append(mpath)
    return written


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for hypothesis violations
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="graphonwalk",
        description="Random walks on dense graphs and their graphon continuum limits.",
    )
    parser.add_argument("--config", help="JSON/YAML run configuration (replaces the subcommand)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, graphon=True):
        if graphon:
            sp.add_argument("--graphon", default=DEFAULT_GRAPHON,
                            help="family[:k=v,...], inline JSON record, or @file")
        sp.add_argument("--output", default="graphonwalk", help="output path prefix")
        sp.add_argument("--seed", type=int, default=None, help=f"RNG seed (fallback: ${SEED_ENV})")
        sp.add_argument("--threads", type=int, default=1, help="worker thread cap")

    sp = sub.add_parser("degree", help="sample the degree function and check its lower bound")
    common(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--c-min", dest="c_min", type=float)

    sp = sub.add_parser("spectrum", help="eigenvalues of the normalized Laplacian")
    common(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--c-min", dest="c_min", type=float)
    sp.add_argument("--direct", action="store_true", default=None,
                    help="also eigensolve the discretized kernel operator directly")

    sp = sub.add_parser("solve", help="solve the continuum initial value problem")
    common(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--g", help="initial condition, e.g. cos, bump:center=0.3")
    sp.add_argument("--t", type=_floats, help="comma-separated times")
    sp.add_argument("--method", choices=["spectral", "exponential", "both"])
    sp.add_argument("--binary", action="store_true", default=None)
    sp.add_argument("--svg", action="store_true", default=None)
    sp.add_argument("--c-min", dest="c_min", type=float)

    sp = sub.add_parser("walk", help="Monte Carlo walkers versus the master equation")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--graph", help="quotient, sampled, or a graph CSV path")
    sp.add_argument("--mode", choices=[NODE_CENTRIC, EDGE_CENTRIC])
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--walkers", type=int)
    sp.add_argument("--t", type=float)
    sp.add_argument("--start", type=int)
    sp.add_argument("--trajectory", action="store_true", default=None,
                    help="also export one seeded trajectory")

    sp = sub.add_parser("converge", help="graph-to-continuum convergence study")
    common(sp)
    sp.add_argument("--g")
    sp.add_argument("--ns", type=_ints)
    sp.add_argument("--t", type=_floats)
    sp.add_argument("--mode", choices=["quotient", "sampled", "external_sequence"])
    sp.add_argument("--N-ref", dest="N_ref", type=int)
    sp.add_argument("--ells", type=_ints, help="discrete-time steps to compare")
    sp.add_argument("--graphs", nargs="+", help="adjacency CSV files (external_sequence)")
    sp.add_argument("--inits", nargs="+", help="initial-condition CSV files (external_sequence)")
    sp.add_argument("--svg", action="store_true", default=None)
    sp.add_argument("--c-min", dest="c_min", type=float)

    sp = sub.add_parser("lemma-check", help="randomized checks of the two operator lemmas")
    common(sp, graphon=False)
    sp.add_argument("--step-cases", dest="step_cases", type=int)
    sp.add_argument("--hs-cases", dest="hs_cases", type=int)
    return parser


def config_from_args(args):
    if args.config:
        return RunConfig.from_file(args.config)
    if not args.command:
        raise ConfigError("a subcommand or --config is required")
    base = {"command", "config", "graphon", "output", "seed", "threads"}
    params = {k: v for k, v in vars(args).items() if k not in base and v is not None}
    return RunConfig(
        command=args.command,
        graphon=getattr(args, "graphon", DEFAULT_GRAPHON),
        params=params,
        output=args.output,
        seed=args.seed,
        threads=args.threads,
    )


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        run(cfg)
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
