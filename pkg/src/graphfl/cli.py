"""Command-line entry point: decompose, solve, bench, validate, convert.

Exit codes: 0 success, 1 usage error (bad flags, dimension mismatch), 2 data
or convergence error. Diagnostics go to standard error; data goes to files or
standard output. Every subcommand is deterministic given --seed; omitting it
draws a seed and logs it so the run stays reconstructible.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as gio
from .bench import (BlobSpec, grid_graph, random_sparse_graph, run_trials,
                    trail_halving_experiment)
from .decompose import VARIANTS, DecompositionStrategy, decompose, trail_stats
from .errors import DimensionMismatch, GraphFLError, ParseError
from .graph import Graph, validate_trail_partition
from .solver import ProblemInstance, SolverConfig, solve_gfl
from .spg import SpgConfig, spg_solve

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1 (2 is reserved for validation failures),
    # so argparse's exit-2 default gets rerouted
    def error(self, message):
        raise _UsageError(message)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    drawn = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    _log(f"generated seed: {drawn} (pass --seed {drawn} to reproduce)")
    return drawn


def _parse_grid(spec: str) -> tuple[int, int]:
    try:
        if "x" in spec:
            r, c = spec.split("x", 1)
            rows, cols = int(r), int(c)
        else:
            rows = cols = int(spec)
    except ValueError:
        raise _UsageError(f"bad --grid {spec!r}; use N or RxC")
    if rows < 1 or cols < 1:
        raise _UsageError("grid sides must be >= 1")
    return rows, cols


def _load_graph(path) -> Graph:
    """Matrix Market when the file opens with the %%MatrixMarket banner,
    otherwise edge-list text."""
    with open(path) as fh:
        head = fh.readline()
    if head.lower().startswith("%%matrixmarket"):
        return gio.read_matrix_market_adjacency(path)
    return gio.read_edge_list(path)


def _graph_from_args(args) -> tuple[Graph, tuple[int, int] | None, str]:
    if getattr(args, "grid", None):
        rows, cols = _parse_grid(args.grid)
        return grid_graph(rows, cols), (rows, cols), f"grid-{rows}x{cols}"
    g = _load_graph(args.graph)
    return g, None, os.path.basename(args.graph)


def _strategy_from_args(name: str, seed: int, grid_shape, pair_cap: int):
    if name not in VARIANTS:
        raise _UsageError(f"unknown strategy {name!r}; choose from {', '.join(VARIANTS)}")
    if name == "rowscols" and grid_shape is None:
        raise _UsageError("rowscols needs a grid graph (--grid)")
    return DecompositionStrategy(name, seed=seed, pair_sample_cap=pair_cap,
                                 grid_shape=grid_shape if name == "rowscols" else None)


# ---- subcommands ---- #

def _cmd_decompose(args) -> int:
    seed = _resolve_seed(args.seed)
    g, grid_shape, label = _graph_from_args(args)
    strat = _strategy_from_args(args.strategy, seed, grid_shape, args.pair_cap)
    ts = decompose(g, strat)
    gio.write_trails(args.out, ts)
    st = trail_stats(ts)
    _log(f"{label}: {st.count} trails, lengths min {st.min_length} "
         f"median {st.median_length} mean {st.mean_length:.2f} max {st.max_length}")
    return 0


def _solver_config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iters=args.max_iters, alpha0=args.alpha0,
                        vary_penalty=not args.no_vary_penalty, accel_c=args.accel_c)


def _cmd_solve(args) -> int:
    y = gio.read_vector_csv(args.y)
    if args.trails:
        ts = gio.read_trails(args.trails, n_vertices=y.size)
        target = ts
        graph_for_spg = None
    else:
        g, grid_shape, _ = _graph_from_args(args)
        target = g
        graph_for_spg = g

    if args.method == "spg":
        if graph_for_spg is None:
            from .solver import _edges_from_trailset
            graph_for_spg = Graph(target.n_vertices, _edges_from_trailset(target))
        beta, diag = spg_solve(graph_for_spg, y, args.lam, args.epsilon,
                               SpgConfig(max_iters=args.max_iters))
    else:
        seed = _resolve_seed(args.seed)
        strat = None
        if not args.trails:
            strat = _strategy_from_args(args.strategy, seed, grid_shape, args.pair_cap)
        problem = ProblemInstance(y, args.lam)
        beta, diag = solve_gfl(target, problem, strategy=strat,
                               config=_solver_config(args))

    if args.out:
        gio.write_vector_csv(args.out, beta)
    else:
        for x in beta:
            print(repr(float(x)))
    if args.diag:
        gio.write_diagnostics_csv(args.diag, diag)
    _log(f"steps {diag.steps}  converged {diag.converged}  "
         f"objective {diag.objective:.6g}  seconds {diag.wall_seconds:.3f}")
    if not diag.converged:
        _log("did not converge within --max-iters")
        return 2
    return 0


def _blob_from_args(args) -> BlobSpec:
    return BlobSpec(n_blobs=args.blobs, blob_fraction=args.blob_fraction,
                    noise_sd=args.noise_sd)


def _cmd_bench(args) -> int:
    seed = _resolve_seed(args.seed)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    config = SolverConfig(tol=args.tol, max_iters=args.max_iters,
                          accel_c=args.accel_c)
    blob = _blob_from_args(args)

    if args.mode == "halving":
        results, table = trail_halving_experiment(
            args.n, args.n, args.levels, trials=args.trials, lam=args.lam,
            blob=blob, config=config, master_seed=seed, threads=threads)
        gio.write_results_csv(args.out, results)
        _log("level  trails  max_len  mean_steps  stderr")
        for row in table:
            _log(f"{row.level:5d}  {row.n_trails:6d}  {row.max_length:7d}  "
                 f"{row.mean_steps:10.1f}  {row.stderr_steps:.2f}")
        if args.emit_histogram:
            g = grid_graph(args.n, args.n)
            ts = decompose(g, DecompositionStrategy("rowscols", grid_shape=(args.n, args.n)))
            from .decompose import halve_trails
            hists = {}
            for lv in range(args.levels + 1):
                hists[f"halving-{lv}"] = trail_stats(ts).histogram
                if lv < args.levels:
                    ts = halve_trails(ts)
            gio.write_histogram_csv(args.emit_histogram, hists)
        return 0

    if args.mode == "grid":
        g = grid_graph(args.n, args.n)
        grid_shape = (args.n, args.n)
        label = f"grid-{args.n}x{args.n}"
    elif args.mode == "random":
        g = random_sparse_graph(args.n, args.sparsity, seed=seed)
        grid_shape = None
        label = f"random-{args.n}-{args.sparsity}"
    else:
        g, grid_shape, label = _graph_from_args(args)

    names = [s.strip() for s in args.strategies.split(",") if s.strip()]
    strategies = [_strategy_from_args(n, seed, grid_shape, args.pair_cap)
                  for n in names]
    trail_sets = {s.variant: decompose(g, s) for s in strategies}
    results, summaries = run_trials(
        g, strategies, args.trials, lam=args.lam, blob=blob, config=config,
        master_seed=seed, threads=threads, graph_label=label,
        trail_sets=trail_sets)
    gio.write_results_csv(args.out, results)
    _log("strategy      mean_steps  stderr  mean_sec  converged")
    for s in summaries:
        _log(f"{s.strategy:12s}  {s.mean_steps:10.1f}  {s.stderr_steps:6.2f}  "
             f"{s.mean_seconds:8.3f}  {s.n_converged}/{s.n_trials}")
    if args.emit_histogram:
        hists = {name: trail_stats(ts).histogram for name, ts in trail_sets.items()}
        gio.write_histogram_csv(args.emit_histogram, hists)
    if any(r.error for r in results):
        for r in results:
            if r.error:
                _log(f"trial {r.trial} ({r.strategy}) failed: {r.error}")
        return 2
    return 0


def _cmd_validate(args) -> int:
    g = _load_graph(args.graph)
    ts = gio.read_trails(args.trails, n_vertices=g.n_vertices, graph=g)
    report = validate_trail_partition(g, ts)
    if report.ok:
        print("OK")
        return 0
    _log(report.summary())
    return 2


def _cmd_convert(args) -> int:
    src_fmt = args.from_fmt or ("mm" if _is_mm(args.src) else "edgelist")
    g = (gio.read_matrix_market_adjacency(args.src) if src_fmt == "mm"
         else gio.read_edge_list(args.src))
    dst_fmt = args.to_fmt or ("edgelist" if src_fmt == "mm" else "mm")
    if dst_fmt == "mm":
        gio.write_matrix_market_adjacency(args.out, g)
    else:
        gio.write_edge_list(args.out, g)
    _log(f"{args.src} ({src_fmt}) -> {args.out} ({dst_fmt}): "
         f"{g.n_vertices} vertices, {g.n_edges} edges")
    return 0


def _is_mm(path) -> bool:
    try:
        with open(path) as fh:
            return fh.readline().lower().startswith("%%matrixmarket")
    except OSError:
        return path.endswith((".mtx", ".mm"))


# ---- parser construction ---- #

def _add_graph_source(p: _Parser, include_trails: bool = False) -> None:
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--graph", help="edge-list or Matrix Market file")
    grp.add_argument("--grid", help="grid graph, N (square) or RxC")
    if include_trails:
        grp.add_argument("--trails", help="precomputed trails file")


def _add_solver_flags(p: _Parser) -> None:
    p.add_argument("--tol", type=float, default=1e-4, help="residual tolerance")
    p.add_argument("--max-iters", type=int, default=20000, help="iteration cap")
    p.add_argument("--accel-c", type=float, default=0.0,
                   help="adaptive penalty dampening in [0,1]; 0 = uniform")


def _add_bench_common(p: _Parser) -> None:
    p.add_argument("--trials", type=int, default=10, help="number of trials")
    p.add_argument("--strategies", default="pseudotour",
                   help="comma-separated strategy names")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="fusion strength")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads for trials (0 = all cores)")
    p.add_argument("--pair-cap", type=int, default=1000,
                   help="odd-pair sample cap for median/random strategies")
    p.add_argument("--blobs", type=int, default=4, help="blob count")
    p.add_argument("--blob-fraction", type=float, default=0.05,
                   help="fraction of vertices per blob")
    p.add_argument("--noise-sd", type=float, default=1.0,
                   help="gaussian noise standard deviation")
    p.add_argument("--emit-histogram", default=None, metavar="FILE",
                   help="write trail-length histograms CSV")
    _add_solver_flags(p)


def _build_parser() -> _Parser:
    top = _Parser(prog="graphfl",
                  description="Graph fused lasso via trail decompositions.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[], help="split a graph into trails")
    _add_graph_source(p)
    p.add_argument("--strategy", default="pseudotour",
                   help=f"one of: {', '.join(VARIANTS)}")
    p.add_argument("--seed", type=int, default=None, help="decomposition seed")
    p.add_argument("--out", required=True, help="trails file to write")
    p.add_argument("--pair-cap", type=int, default=1000,
                   help="odd-pair sample cap for median/random strategies")
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("solve", help="solve a fused-lasso instance")
    _add_graph_source(p, include_trails=True)
    p.add_argument("--y", required=True, help="observations CSV (one per line)")
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="fusion strength")
    p.add_argument("--method", choices=("admm", "spg"), default="admm")
    p.add_argument("--strategy", default="pseudotour",
                   help=f"one of: {', '.join(VARIANTS)}")
    p.add_argument("--seed", type=int, default=None, help="decomposition seed")
    p.add_argument("--pair-cap", type=int, default=1000,
                   help="odd-pair sample cap for median/random strategies")
    p.add_argument("--alpha0", type=float, default=1.0, help="initial penalty")
    p.add_argument("--no-vary-penalty", action="store_true",
                   help="disable residual balancing")
    p.add_argument("--epsilon", type=float, default=1e-6,
                   help="spg smoothing/stopping parameter")
    p.add_argument("--out", default=None, help="solution CSV (default stdout)")
    p.add_argument("--diag", default=None, help="per-iteration diagnostics CSV")
    _add_solver_flags(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("bench", help="seeded benchmark trials")
    bsub = p.add_subparsers(dest="mode", required=True)
    pg = bsub.add_parser("grid", help="square grid graph")
    pg.add_argument("--n", type=int, required=True, help="grid side length")
    _add_bench_common(pg)
    pr = bsub.add_parser("random", help="random connected graph")
    pr.add_argument("--n", type=int, required=True, help="vertex count")
    pr.add_argument("--sparsity", type=float, default=0.998,
                    help="1 - edge density")
    _add_bench_common(pr)
    pf = bsub.add_parser("file", help="graph from file")
    pf.add_argument("--graph", required=True,
                    help="edge-list or Matrix Market file")
    _add_bench_common(pf)
    ph = bsub.add_parser("halving", help="steps vs trail-halving level")
    ph.add_argument("--n", type=int, required=True, help="grid side length")
    ph.add_argument("--levels", type=int, default=4, help="number of halvings")
    _add_bench_common(ph)
    for q in (pg, pr, pf, ph):
        q.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("validate", help="check trails partition a graph's edges")
    p.add_argument("--graph", required=True, help="edge-list or Matrix Market file")
    p.add_argument("--trails", required=True, help="trails file")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("convert", help="Matrix Market <-> edge list")
    p.add_argument("--in", dest="src", required=True, help="input graph file")
    p.add_argument("--out", required=True, help="output graph file")
    p.add_argument("--from", dest="from_fmt", choices=("mm", "edgelist"),
                   default=None, help="input format (default: sniffed)")
    p.add_argument("--to", dest="to_fmt", choices=("mm", "edgelist"),
                   default=None, help="output format (default: the other one)")
    p.set_defaults(fn=_cmd_convert)
    return top


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        _log(f"usage error: {exc}")
        return 1
    except DimensionMismatch as exc:
        _log(f"dimension mismatch: {exc}")
        return 1
    except (GraphFLError, ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
