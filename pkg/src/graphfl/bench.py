"""Synthetic benchmark harness: graph generators, blob signals, seeded trials.

Step counts are the headline metric (wall time is recorded but depends on the
machine). All generators are pure functions of their seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from heapq import heapify, heappop, heappush

import numpy as np

from .decompose import DecompositionStrategy, decompose, halve_trails, trail_stats
from .errors import BlobsDontFit, DensityBelowTree
from .graph import Graph, TrailSet
from .solver import ProblemInstance, SolverConfig, solve_gfl

__all__ = [
    "BlobSpec", "TrialResult", "StrategySummary", "grid_graph",
    "random_sparse_graph", "blob_signal", "run_trials",
    "trail_halving_experiment", "HalvingLevel", "trial_seed",
]


def grid_graph(rows: int, cols: int) -> Graph:
    """4-neighbor lattice, row-major ids, rows*(cols-1) + cols*(rows-1) edges.

    Per vertex the edge to the right neighbor precedes the edge below, so
    edge ids are already in sorted canonical order.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def _prufer_tree(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    """Uniform random labeled spanning tree (Prufer decode)."""
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapify(leaves)
    edges = []
    for v in seq:
        leaf = heappop(leaves)
        edges.append((min(leaf, int(v)), max(leaf, int(v))))
        degree[v] -= 1
        if degree[v] == 1:
            heappush(leaves, int(v))
    a = heappop(leaves)
    b = heappop(leaves)
    edges.append((min(a, b), max(a, b)))
    return edges


def random_sparse_graph(n: int, target_sparsity: float = 0.998, seed: int = 0) -> Graph:
    """Connected graph: uniform spanning tree plus uniform fill-in edges.

    Edge count is round((1 - target_sparsity) * n*(n-1)/2); duplicates drawn
    during fill-in are skipped, so every added edge is uniform over the
    remaining non-edges in sequence.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < target_sparsity < 1.0:
        raise ValueError("target_sparsity must lie in (0, 1)")
    m_target = round((1.0 - target_sparsity) * n * (n - 1) / 2)
    if m_target < n - 1:
        raise DensityBelowTree(
            f"target of {m_target} edges cannot hold a spanning tree on {n} vertices")
    rng = np.random.default_rng(seed)
    edges = _prufer_tree(rng, n)
    seen = {u * n + v for u, v in edges}
    need = m_target - len(edges)
    while need > 0:
        batch = max(256, 2 * need)
        us = rng.integers(0, n, size=batch)
        vs = rng.integers(0, n, size=batch)
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        ok = lo != hi
        for code in (lo[ok] * n + hi[ok]):
            code = int(code)
            if code in seen:
                continue
            seen.add(code)
            edges.append((code // n, code % n))
            need -= 1
            if need == 0:
                break
    return Graph(n, edges)


@dataclass(frozen=True)
class BlobSpec:
    """Piecewise-constant ground truth: a few BFS balls of elevated mean."""

    n_blobs: int = 4
    blob_fraction: float = 0.05
    means: tuple[float, ...] | None = None
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_blobs < 0:
            raise ValueError("n_blobs must be >= 0")
        if self.n_blobs > 0 and not 0.0 < self.blob_fraction <= 1.0 / self.n_blobs:
            raise ValueError(
                f"blob_fraction must lie in (0, 1/{self.n_blobs}]")
        if self.means is not None and len(self.means) != self.n_blobs:
            raise ValueError("means must have one entry per blob")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")


def _grow_ball(g: Graph, start: int, claimed: np.ndarray, size: int) -> list[int] | None:
    """BFS through unclaimed vertices; None if the reachable region is too small."""
    ball = [start]
    in_ball = {start}
    head = 0
    while len(ball) < size and head < len(ball):
        v = ball[head]
        head += 1
        for w, _ in g._adjacency_by_neighbor()[v]:
            if w in in_ball or claimed[w]:
                continue
            in_ball.add(w)
            ball.append(w)
            if len(ball) == size:
                break
    return ball if len(ball) == size else None


def blob_signal(g: Graph, spec: BlobSpec) -> tuple[np.ndarray, np.ndarray]:
    """(y, ground_truth): blobs of constant mean over zero background + noise.

    Each blob is a BFS ball of exactly ceil(blob_fraction * n) vertices grown
    from a random unclaimed seed; seeds whose unclaimed region is too small
    are redrawn (up to 100 times per blob).
    """
    n = g.n_vertices
    rng = np.random.default_rng(spec.seed)
    ground_truth = np.zeros(n)
    if spec.n_blobs > 0:
        size = math.ceil(spec.blob_fraction * n)
        if spec.n_blobs * size > n:
            raise BlobsDontFit(
                f"{spec.n_blobs} blobs of {size} vertices exceed {n} vertices")
        if spec.means is None:
            means = rng.uniform(-5.0, 5.0, size=spec.n_blobs)
        else:
            means = np.asarray(spec.means, dtype=np.float64)
        claimed = np.zeros(n, dtype=bool)
        for b in range(spec.n_blobs):
            ball = None
            for _ in range(100):
                unclaimed = np.flatnonzero(~claimed)
                start = int(unclaimed[rng.integers(unclaimed.size)])
                ball = _grow_ball(g, start, claimed, size)
                if ball is not None:
                    break
            if ball is None:
                raise BlobsDontFit(
                    f"no seed produced a connected ball of {size} unclaimed vertices")
            claimed[ball] = True
            ground_truth[ball] = means[b]
    y = ground_truth + rng.normal(0.0, spec.noise_sd, size=n)
    return y, ground_truth


@dataclass(frozen=True)
class TrialResult:
    graph: str
    strategy: str
    trial: int
    seed: int
    steps: int
    seconds: float
    objective: float
    converged: bool
    error: str | None = None


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    mean_steps: float
    stderr_steps: float
    mean_seconds: float
    n_trials: int
    n_converged: int


def trial_seed(master_seed: int, trial: int) -> int:
    """Stable per-trial seed; strategies within a trial share the instance."""
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)[0])


def _summarize(results: list[TrialResult]) -> list[StrategySummary]:
    order: list[str] = []
    for r in results:
        if r.strategy not in order:
            order.append(r.strategy)
    out = []
    for name in order:
        rows = [r for r in results if r.strategy == name and r.error is None]
        steps = np.array([r.steps for r in rows], dtype=np.float64)
        if steps.size == 0:
            out.append(StrategySummary(name, math.nan, math.nan, math.nan, 0, 0))
            continue
        stderr = float(np.std(steps, ddof=1) / math.sqrt(steps.size)) if steps.size > 1 else 0.0
        out.append(StrategySummary(
            name, float(steps.mean()), stderr,
            float(np.mean([r.seconds for r in rows])),
            len(rows), sum(r.converged for r in rows)))
    return out


def _map_ordered(fn, tasks, threads: int):
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def run_trials(g: Graph, strategies, n_trials: int, lam: float = 1.0,
               blob: BlobSpec | None = None, config: SolverConfig | None = None,
               master_seed: int = 0, threads: int = 1,
               graph_label: str = "graph",
               trail_sets: dict[str, TrailSet] | None = None,
               ) -> tuple[list[TrialResult], list[StrategySummary]]:
    """Solve n_trials fresh blob instances with every strategy.

    Decomposition happens once per strategy (the graph is fixed across
    trials); each trial draws its own signal from a trial-indexed seed.
    Solver failures are recorded in the result row, not raised. Results are
    ordered by (trial, strategy) regardless of thread count.

    trail_sets overrides decomposition with ready-made trail sets keyed by
    label (used by the halving experiment).
    """
    blob = blob or BlobSpec()
    config = config or SolverConfig()
    if trail_sets is None:
        trail_sets = {s.variant: decompose(g, s) for s in strategies}
    labels = list(trail_sets.keys())

    signals = [blob_signal(g, replace(blob, seed=trial_seed(master_seed, t)))[0]
               for t in range(n_trials)]

    tasks = [(t, lab) for t in range(n_trials) for lab in labels]

    def one(task):
        t, lab = task
        seed = trial_seed(master_seed, t)
        try:
            problem = ProblemInstance(signals[t], lam)
            beta, diag = solve_gfl(trail_sets[lab], problem, config=config)
            return TrialResult(graph_label, lab, t, seed, diag.steps,
                               diag.wall_seconds, diag.objective, diag.converged)
        except Exception as exc:  # recorded, not fatal
            return TrialResult(graph_label, lab, t, seed, 0, 0.0, math.nan,
                               False, error=f"{type(exc).__name__}: {exc}")

    results = _map_ordered(one, tasks, threads)
    return results, _summarize(results)


@dataclass(frozen=True)
class HalvingLevel:
    level: int
    n_trails: int
    max_length: int
    mean_steps: float
    stderr_steps: float


def trail_halving_experiment(rows: int, cols: int, n_halvings: int,
                             trials: int = 5, lam: float = 1.0,
                             blob: BlobSpec | None = None,
                             config: SolverConfig | None = None,
                             master_seed: int = 0, threads: int = 1,
                             ) -> tuple[list[TrialResult], list[HalvingLevel]]:
    """Steps vs trail length: start from row+column trails, halve repeatedly.

    Level 0 is the rows+cols decomposition; level k applies halve_trails k
    times. Every level solves the same trial instances.
    """
    if n_halvings < 1:
        raise ValueError("n_halvings must be >= 1")
    g = grid_graph(rows, cols)
    ts = decompose(g, DecompositionStrategy("rowscols", grid_shape=(rows, cols)))
    levels = {0: ts}
    for lv in range(1, n_halvings + 1):
        ts = halve_trails(ts)
        levels[lv] = ts
    trail_sets = {f"halving-{lv}": levels[lv] for lv in range(n_halvings + 1)}
    results, summaries = run_trials(
        g, [], trials, lam=lam, blob=blob, config=config,
        master_seed=master_seed, threads=threads,
        graph_label=f"grid-{rows}x{cols}", trail_sets=trail_sets)
    by_name = {s.strategy: s for s in summaries}
    table = []
    for lv in range(n_halvings + 1):
        s = by_name[f"halving-{lv}"]
        st = trail_stats(levels[lv])
        table.append(HalvingLevel(lv, st.count, st.max_length,
                                  s.mean_steps, s.stderr_steps))
    return results, table
