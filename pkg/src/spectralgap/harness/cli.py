"""Command-line entry point.

Exit codes: 0 success, 2 assertion failure, 1 usage or input error.
``--config`` takes a TOML file; ``verify`` reads an experiment config from
it, other subcommands read defaults from a table named after the
subcommand.  Explicit flags always win.
"""
import argparse
import json
import math
import os
import sys

import numpy as np

from .._rng import numpy_rng
from ..discrepancy import CertificateViolation, heavy_certificate
from ..graphcore import DegreeSequencePair, Digraph01, Interval, URegGraph, read_graph, write_graph
from ..pstats import codegree_max, default_stride, ep_statistic
from ..sampler import ChainConfig, EnumerationTooLarge, InfeasibleDegrees, count_all, \
    enumerate_all, sample_digraph, sample_undirected
from ..spectral import lambda_extreme, s2_digraph, sample_unit_pair
from . import records
from .config import EXPERIMENTS, ExperimentConfig, GridCell, load_config, tomllib
from .experiments import run

EXIT_OK, EXIT_USAGE, EXIT_ASSERT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _finite(v):
    return v if not (isinstance(v, float) and not math.isfinite(v)) else None


def _emit_json(obj, out=None):
    text = json.dumps({k: _finite(v) for k, v in obj.items()} if isinstance(obj, dict) else obj,
                      indent=1)
    (out or sys.stdout).write(text + "\n")


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _parse_cell(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"grid cell must be n:d[:model], got {text!r}")
    try:
        n, d = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"grid cell must be n:d[:model], got {text!r}")
    return GridCell(n, d, parts[2] if len(parts) == 3 else "digraph")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spectralgap", description="Sampling, spectra and verification drivers "
                "for random regular digraphs and graphs.")
    p.add_argument("--config", help="TOML config file (flags override it)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="sample a regular digraph or undirected graph")
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--model", choices=["digraph", "undirected"], default="digraph")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int, help="switch attempts (default 20 E ln(E+1))")
    s.add_argument("--method", choices=["switch", "pairing"], default="switch")
    s.add_argument("--format", choices=["edgelist", "mtx"], default="edgelist")
    s.add_argument("--out", help="output file (default stdout)")

    s = sub.add_parser("spectrum", help="s1, s2 and lambda_extreme of a graph file (JSON)")
    s.add_argument("graph")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--restarts", type=int, default=3)

    s = sub.add_parser("pstats", help="interval-scan dispersion statistic (JSON)")
    s.add_argument("graph")
    s.add_argument("--c0", type=float, default=0.001)
    s.add_argument("--stride", type=int)

    s = sub.add_parser("codegree", help="maximum column codegree (JSON)")
    s.add_argument("graph")
    s.add_argument("--interval", type=int, nargs=2, metavar=("START", "LEN"),
                   help="exclude rows START..START+LEN-1 (0-based)")

    s = sub.add_parser("heavy-bound", help="heavy-couple certificate for random unit x, y (JSON)")
    s.add_argument("graph")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--K1", type=float, default=8.0)
    s.add_argument("--K2", type=float, default=8.0)
    s.add_argument("--debug", action="store_true", help="include level-set diagnostics")

    s = sub.add_parser("verify", help="run a Monte Carlo experiment")
    s.add_argument("experiment", choices=EXPERIMENTS)
    s.add_argument("--trials", type=int)
    s.add_argument("--base-seed", type=int)
    s.add_argument("--grid", action="append", metavar="N:D[:MODEL]",
                   help="grid cell; repeat for several (replaces the config grid)")
    s.add_argument("--param", action="append", metavar="KEY=VALUE", default=[],
                   help="experiment parameter (TOML value syntax)")
    s.add_argument("--output", help="CSV (or JSON with --json) output path")
    s.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    s.add_argument("--timing", action="store_true", help="add a wall_time column")
    s.add_argument("--plot-dir", help="write CSV plus a gnuplot script here")

    s = sub.add_parser("enumerate", help="count all 0-1 matrices with given margins")
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--d-in", type=int, nargs="+")
    s.add_argument("--d-out", type=int, nargs="+")
    s.add_argument("--list", action="store_true", help="also print each matrix")
    return p


def _apply_config_defaults(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return None
    with open(known.config, "rb") as fh:
        raw = tomllib.load(fh)
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in subs.choices.items():
        table = raw.get(name)
        if name != "verify" and isinstance(table, dict):
            sp.set_defaults(**{k.replace("-", "_"): v for k, v in table.items()})
    return known.config


# --- subcommands ------------------------------------------------------------------

def cmd_sample(a):
    if a.n is None or a.d is None:
        raise UsageError("sample needs --n and --d (flag or [sample] config table)")
    if a.model == "digraph":
        deg = DegreeSequencePair.regular(a.n, a.d)
        cfg = ChainConfig.default(deg.edges, a.seed)
        if a.burn_in is not None:
            cfg = ChainConfig(a.burn_in, cfg.spacing_switches, a.seed)
        g = sample_digraph(deg, cfg)
    else:
        cfg = ChainConfig.default(a.n * a.d // 2, a.seed)
        if a.burn_in is not None:
            cfg = ChainConfig(a.burn_in, cfg.spacing_switches, a.seed)
        g = sample_undirected(a.n, a.d, cfg, method=a.method)
    write_graph(g, a.out if a.out else sys.stdout, fmt=a.format)
    return EXIT_OK


def cmd_spectrum(a):
    g = read_graph(a.graph)
    if isinstance(g, URegGraph):
        s = lambda_extreme(g, tol=a.tol, restarts=a.restarts, seed=a.seed)
        out = {"s1": float(g.d), "s2": s.lambda_extreme, "lambda_extreme": s.lambda_extreme,
               "converged": s.converged, "iterations": s.iterations}
    else:
        out = s2_digraph(g, tol=a.tol, restarts=a.restarts, seed=a.seed).as_dict()
    _emit_json(out)
    return EXIT_OK


def _digraph(path):
    g = read_graph(path)
    if isinstance(g, URegGraph):
        g = Digraph01(g.adj)
    return g


def _max_degree(g):
    return int(max(g.d_in.max(initial=0), g.d_out.max(initial=0)))


def cmd_pstats(a):
    g = _digraph(a.graph)
    stride = a.stride or default_stride(g.n)
    val = ep_statistic(g, a.c0, stride)
    _emit_json({"n": g.n, "d": _max_degree(g), "c0": a.c0, "stride": stride, "statistic": val})
    return EXIT_OK


def cmd_codegree(a):
    g = _digraph(a.graph)
    I = Interval(*a.interval) if a.interval else ()
    _emit_json({"n": g.n, "d": _max_degree(g), "codegree_max": codegree_max(g, I)})
    return EXIT_OK


def cmd_heavy(a):
    g = _digraph(a.graph)
    d = _max_degree(g)
    x, y = sample_unit_pair(g.n, numpy_rng(a.seed))
    try:
        cert = heavy_certificate(g, x, y, a.K1, a.K2, d, debug=a.debug)
    except CertificateViolation as exc:
        sys.stderr.write(f"assertion failed (seed={a.seed}): {exc}\n")
        return EXIT_ASSERT
    out = {"n": g.n, "d": d, "seed": a.seed, "K1": a.K1, "K2": a.K2, "all_pass": cert.all_pass,
           "U": cert.U, "bound": cert.bound, "heavy_sum": cert.heavy_sum,
           "light_sum": cert.light_sum,
           "pairs": [{"i": i, "j": j, "orient": o, "verdict": v.verdict, "edges": v.edges,
                      "expected": v.expected} for i, j, v, o in cert.level_pairs]}
    if a.debug:
        out["diagnostics"] = {k: {str(kk): vv for kk, vv in v.items()}
                              for k, v in cert.diagnostics.items()}
    _emit_json(out)
    return EXIT_OK


def cmd_verify(a, config_path):
    if config_path:
        cfg = load_config(config_path, a.experiment)
    else:
        cfg = ExperimentConfig(a.experiment)
    params = {}
    for item in a.param:
        if "=" not in item:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _parse_value(v.strip())
    grid = tuple(_parse_cell(c) for c in a.grid) if a.grid else None
    cfg = cfg.with_overrides(trials=a.trials, base_seed=a.base_seed, grid=grid,
                             output_path=a.output, parameters=params)
    if not cfg.grid and cfg.experiment != "freedman":
        raise UsageError(f"experiment {cfg.experiment!r} needs a grid (--grid N:D[:MODEL])")
    res = run(cfg)
    text = (records.to_json if a.json else records.to_csv)(res.records, cfg.experiment, a.timing)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if a.plot_dir:
        os.makedirs(a.plot_dir, exist_ok=True)
        name = f"{cfg.experiment}.csv"
        with open(os.path.join(a.plot_dir, name), "w") as fh:
            fh.write(records.to_csv(res.records, cfg.experiment, a.timing))
        with open(os.path.join(a.plot_dir, f"{cfg.experiment}.gp"), "w") as fh:
            fh.write(records.gnuplot_script(cfg.experiment, name, res.records))
    for msg in res.failures:
        sys.stderr.write(f"assertion failed: {msg}\n")
    return EXIT_ASSERT if res.failures else EXIT_OK


def cmd_enumerate(a):
    if a.d_in is not None or a.d_out is not None:
        if a.d_in is None or a.d_out is None:
            raise UsageError("--d-in and --d-out go together")
        deg = DegreeSequencePair(np.array(a.d_in), np.array(a.d_out))
    elif a.n is not None and a.d is not None:
        deg = DegreeSequencePair.regular(a.n, a.d)
    else:
        raise UsageError("give --n and --d, or --d-in and --d-out")
    if a.list:
        mats = enumerate_all(deg)
        print(len(mats))
        for g in mats:
            print(" ".join("".join(str(int(b)) for b in row) for row in g.adj))
    else:
        print(count_all(deg))
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample, "spectrum": cmd_spectrum, "pstats": cmd_pstats,
    "codegree": cmd_codegree, "heavy-bound": cmd_heavy, "enumerate": cmd_enumerate,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        config_path = _apply_config_defaults(parser, argv)
        a = parser.parse_args(argv)
        if a.command == "verify":
            return cmd_verify(a, config_path)
        return COMMANDS[a.command](a)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except AssertionError as exc:
        sys.stderr.write(f"assertion failed: {exc}\n")
        return EXIT_ASSERT
    except (UsageError, ValueError, KeyError, OSError, InfeasibleDegrees,
            EnumerationTooLarge, tomllib.TOMLDecodeError) as exc:
        sys.stderr.write(f"spectralgap: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
