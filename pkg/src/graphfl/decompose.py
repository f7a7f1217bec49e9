"""Trail decomposition strategies.

Five ways to partition a graph's edges into trails, from cheapest to most
careful:

- edgewise: every edge is its own trail.
- rowscols: rows and columns of a grid (grid graphs only).
- pseudotour: pair up odd-degree vertices with temporary pseudo-edges, trace
  one Eulerian circuit of the augmented multigraph, and split it at the
  pseudo-edges. Always yields the minimum trail count max(1, k) where the
  graph has 2k odd-degree vertices.
- medians: repeatedly remove the median-length shortest path between two
  odd-degree vertices, so trail lengths concentrate; subgraphs that split off
  are processed independently.
- random: same skeleton as medians with a uniformly random candidate choice.

All strategies are deterministic under their seed; ties break toward the
lowest id everywhere.
"""

from __future__ import annotations

import itertools
import statistics
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse import csgraph

from .errors import Disconnected
from .graph import (
    Graph,
    Trail,
    TrailSet,
    _bfs_path,
    _trace_eulerian,
    connected_components,
    odd_degree_vertices,
)

VARIANTS = ("pseudotour", "medians", "random", "edgewise", "rowscols")


@dataclass(frozen=True)
class DecompositionStrategy:
    """A named strategy plus the knobs it needs.

    grid_shape is only consulted by the rowscols variant, which addresses
    vertices by the row-major labeling of grid_graph(rows, cols).
    """

    variant: str
    seed: int = 0
    pair_sample_cap: int = 1000
    grid_shape: tuple[int, int] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.pair_sample_cap < 1:
            raise ValueError("pair_sample_cap must be >= 1")


@dataclass(frozen=True)
class TrailStats:
    count: int
    min_length: int
    median_length: float
    mean_length: float
    max_length: int
    variance: float
    histogram: dict[int, int]


def decompose(g: Graph, strategy: DecompositionStrategy) -> TrailSet:
    """Dispatch to the strategy named by strategy.variant."""
    v = strategy.variant
    if v == "edgewise":
        return decompose_edge_wise(g)
    if v == "pseudotour":
        return decompose_pseudo_tour(g, strategy.seed)
    if v == "medians":
        return decompose_median_trails(g, strategy.seed, strategy.pair_sample_cap)
    if v == "random":
        return decompose_random_trails(g, strategy.seed, strategy.pair_sample_cap)
    if strategy.grid_shape is None:
        raise ValueError("rowscols needs strategy.grid_shape = (rows, cols)")
    rows, cols = strategy.grid_shape
    if rows * cols != g.n_vertices:
        raise ValueError(
            f"grid_shape {strategy.grid_shape} does not match {g.n_vertices} vertices")
    return decompose_grid_rows_cols(rows, cols)


def _check_edges_connected(g: Graph) -> None:
    """Raise Disconnected if edges span more than one component.

    Isolated vertices are tolerated; they carry no edges to partition.
    """
    if g.n_edges == 0:
        return
    with_edges = [c for c in connected_components(g)
                  if any(g._degrees[v] > 0 for v in c)]
    if len(with_edges) > 1:
        raise Disconnected(f"edges span {len(with_edges)} components")


# ---- trivial strategies ---- #

def decompose_edge_wise(g: Graph) -> TrailSet:
    """One length-1 trail per edge."""
    trails = tuple(Trail((u, v), (eid,)) for eid, (u, v) in enumerate(g._edges))
    return TrailSet(trails, g.n_vertices, g.n_edges)


def decompose_grid_rows_cols(rows: int, cols: int) -> TrailSet:
    """Row trails then column trails of grid_graph(rows, cols).

    Degenerate sides produce no trails in that direction (a 1xN grid is a
    single row trail).
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"need rows, cols >= 1, got {rows}x{cols}")
    from .bench import grid_graph  # deferred: bench imports this module too

    g = grid_graph(rows, cols)
    eid_of = {}
    for eid, (u, v) in enumerate(g._edges):
        eid_of[(u, v) if u < v else (v, u)] = eid
    trails = []
    if cols > 1:
        for r in range(rows):
            verts = tuple(r * cols + c for c in range(cols))
            eids = tuple(eid_of[(verts[i], verts[i + 1])] for i in range(cols - 1))
            trails.append(Trail(verts, eids))
    if rows > 1:
        for c in range(cols):
            verts = tuple(r * cols + c for r in range(rows))
            eids = tuple(eid_of[(verts[i], verts[i + 1])] for i in range(rows - 1))
            trails.append(Trail(verts, eids))
    return TrailSet(tuple(trails), g.n_vertices, g.n_edges)


# ---- pseudo-tour (minimum trail count) ---- #

def decompose_pseudo_tour(g: Graph, seed: int = 0) -> TrailSet:
    """Minimum-count trail partition: exactly max(1, k) trails for 2k odd vertices.

    Odd vertices are paired uniformly at random under the seed, scanning for a
    non-adjacent partner before falling back to an adjacent one (the
    pseudo-edge then simply parallels a real edge). One Eulerian circuit of
    the augmented multigraph is cut at every pseudo-edge.
    """
    _check_edges_connected(g)
    if g.n_edges == 0:
        # max(1, k) with k = 0: one empty trail parked at vertex 0
        trails = (Trail((0,), ()),) if g.n_vertices else ()
        return TrailSet(trails, g.n_vertices, 0)
    odd = odd_degree_vertices(g)
    rng = np.random.default_rng(seed)
    remaining = [odd[i] for i in rng.permutation(len(odd))]
    nbr_sets = {v: set(g.neighbors(v)) for v in remaining}
    pseudo: list[tuple[int, int]] = []
    while remaining:
        a = remaining.pop(0)
        pick = next((w for w in remaining if w not in nbr_sets[a]), remaining[0])
        remaining.remove(pick)
        pseudo.append((a, pick))
    k = len(pseudo)
    m = g.n_edges
    aug = Graph(g.n_vertices, g._edges + pseudo)
    start = next(v for v in range(g.n_vertices) if g._degrees[v] > 0)
    used = bytearray(aug.n_edges)
    verts, eids = _trace_eulerian(aug._adj, start, used)
    if len(eids) != aug.n_edges:
        raise Disconnected(f"{aug.n_edges - len(eids)} edges unreachable from {start}")
    if k == 0:
        trails = (Trail(tuple(verts), tuple(eids)),)
        return TrailSet(trails, g.n_vertices, g.n_edges)
    big = len(eids)
    pos = [i for i, e in enumerate(eids) if e >= m]
    trails = []
    for t in range(k):
        a = pos[t] + 1
        b = pos[t + 1] if t + 1 < k else pos[0] + big
        tv = tuple(verts[j % big] for j in range(a, b + 1))
        te = tuple(eids[j % big] for j in range(a, b))
        trails.append(Trail(tv, te))
    assert len(trails) == max(1, k)
    return TrailSet(tuple(trails), g.n_vertices, g.n_edges)


# ---- median / random trail heuristics ---- #

def decompose_median_trails(g: Graph, seed: int = 0, pair_sample_cap: int = 1000) -> TrailSet:
    """Remove median-length odd-pair shortest paths until only Eulerian pieces remain."""
    return _peel_trails(g, seed, pair_sample_cap, median=True)


def decompose_random_trails(g: Graph, seed: int = 0, pair_sample_cap: int = 1000) -> TrailSet:
    """Like decompose_median_trails but removes a uniformly random candidate path."""
    return _peel_trails(g, seed, pair_sample_cap, median=False)


def _sample_pairs(rng, n_odd: int, cap: int) -> list[tuple[int, int]]:
    """Unordered index pairs: all C(n_odd, 2) of them, or cap sampled uniformly
    without replacement when there are more than cap."""
    total = n_odd * (n_odd - 1) // 2
    if total <= cap:
        return list(itertools.combinations(range(n_odd), 2))
    seen: set[int] = set()
    pairs: list[tuple[int, int]] = []
    while len(pairs) < cap:
        draw = rng.integers(0, n_odd, size=2 * (cap - len(pairs)) + 16)
        for t in range(0, draw.size - 1, 2):
            i = int(draw[t])
            j = int(draw[t + 1])
            if i == j:
                continue
            if i > j:
                i, j = j, i
            key = i * n_odd + j
            if key in seen:
                continue
            seen.add(key)
            pairs.append((i, j))
            if len(pairs) == cap:
                break
    return pairs


def _pair_distances(lu, lv, nloc: int, pairs_i, pairs_j) -> np.ndarray:
    """BFS distances for each (pairs_i[t], pairs_j[t]) over the local edges."""
    data = np.ones(2 * lu.size)
    adj = csr_matrix((data, (np.concatenate([lu, lv]), np.concatenate([lv, lu]))),
                     shape=(nloc, nloc))
    srcs, inv = np.unique(pairs_i, return_inverse=True)
    out = np.empty(pairs_i.size)
    # chunk sources so the dense distance block stays modest
    chunk = max(1, int(25_000_000 // max(nloc, 1)))
    for c0 in range(0, srcs.size, chunk):
        sub = srcs[c0:c0 + chunk]
        dm = csgraph.shortest_path(adj, method="D", directed=False,
                                   unweighted=True, indices=sub)
        sel = (inv >= c0) & (inv < c0 + sub.size)
        out[sel] = dm[inv[sel] - c0, pairs_j[sel]]
    return out


def _peel_trails(g: Graph, seed: int, pair_sample_cap: int, median: bool) -> TrailSet:
    _check_edges_connected(g)
    if pair_sample_cap < 1:
        raise ValueError("pair_sample_cap must be >= 1")
    if g.n_edges == 0:
        return TrailSet((), g.n_vertices, 0)
    rng = np.random.default_rng(seed)
    us, vs = g.edge_arrays()
    alive = np.ones(g.n_edges, dtype=bool)
    degrees = np.array(g._degrees, dtype=np.int64)
    glob2loc = np.full(g.n_vertices, -1, dtype=np.int64)
    pseudo_id = g.n_edges  # sentinel edge id for Eulerian-trail closing

    first = sorted(v for v in range(g.n_vertices) if g._degrees[v] > 0)
    queue: deque[list[int]] = deque([first])
    trails: list[Trail] = []

    while queue:
        comp = queue.popleft()
        comp_mask = np.zeros(g.n_vertices, dtype=bool)
        comp_mask[comp] = True
        edges_idx = np.flatnonzero(alive & comp_mask[us])
        if edges_idx.size == 0:
            continue
        odd = [v for v in comp if degrees[v] % 2 == 1]

        if len(odd) <= 2:
            # the whole component is one Eulerian piece
            adj: dict[int, list[tuple[int, int]]] = {v: [] for v in comp}
            for eid in edges_idx:
                a, b = int(us[eid]), int(vs[eid])
                adj[a].append((b, int(eid)))
                adj[b].append((a, int(eid)))
            used = bytearray(pseudo_id + 1)
            if len(odd) == 0:
                start = comp[0]
            else:
                p, q = odd[0], odd[1]
                adj[p] = adj[p] + [(q, pseudo_id)]
                adj[q] = adj[q] + [(p, pseudo_id)]
                start = p
            tverts, teids = _trace_eulerian(adj, start, used)
            if len(teids) != edges_idx.size + len(odd) // 2:
                raise Disconnected("component not actually connected")  # internal bug guard
            if len(odd) == 2:
                cut = teids.index(pseudo_id)
                teids = teids[cut + 1:] + teids[:cut]
                tverts = tverts[cut + 1:] + tverts[1:cut + 1]
            trails.append(Trail(tuple(tverts), tuple(teids)))
            alive[edges_idx] = False
            degrees[comp] = 0
            continue

        # more than two odd vertices: peel one odd-pair shortest path
        nloc = len(comp)
        comp_arr = np.asarray(comp, dtype=np.int64)
        glob2loc[comp_arr] = np.arange(nloc)
        lu = glob2loc[us[edges_idx]]
        lv = glob2loc[vs[edges_idx]]
        pairs = _sample_pairs(rng, len(odd), pair_sample_cap)
        if median:
            pi = np.fromiter((glob2loc[odd[i]] for i, _ in pairs), np.int64, len(pairs))
            pj = np.fromiter((glob2loc[odd[j]] for _, j in pairs), np.int64, len(pairs))
            dists = _pair_distances(lu, lv, nloc, pi, pj)
            gsrc = np.fromiter((odd[i] for i, _ in pairs), np.int64, len(pairs))
            gdst = np.fromiter((odd[j] for _, j in pairs), np.int64, len(pairs))
            order = np.lexsort((gdst, gsrc, dists))
            choice = int(order[(len(pairs) - 1) // 2])
        else:
            # a uniformly random candidate needs no distances at all
            choice = int(rng.integers(len(pairs)))
        src, dst = odd[pairs[choice][0]], odd[pairs[choice][1]]

        badj: dict[int, list[tuple[int, int]]] = {v: [] for v in comp}
        for eid in edges_idx:
            a, b = int(us[eid]), int(vs[eid])
            badj[a].append((b, int(eid)))
            badj[b].append((a, int(eid)))
        for row in badj.values():
            row.sort()
        found = _bfs_path(badj, src, dst)
        assert found is not None
        pverts, peids = found
        trails.append(Trail(tuple(pverts), tuple(peids)))
        alive[peids] = False
        for step, eid in enumerate(peids):
            degrees[pverts[step]] -= 1
            degrees[pverts[step + 1]] -= 1

        # split the residual of this component and enqueue the pieces
        still = alive[edges_idx]
        lu2 = lu[still]
        lv2 = lv[still]
        data = np.ones(2 * lu2.size)
        sub = csr_matrix((data, (np.concatenate([lu2, lv2]), np.concatenate([lv2, lu2]))),
                         shape=(nloc, nloc))
        ncomp, labels = csgraph.connected_components(sub, directed=False)
        groups: dict[int, list[int]] = {}
        for loc in range(nloc):
            gv = comp[loc]
            if degrees[gv] > 0:
                groups.setdefault(int(labels[loc]), []).append(gv)
        glob2loc[comp_arr] = -1
        for piece in sorted(groups.values(), key=lambda c: c[0]):
            queue.append(piece)

    assert not alive.any()
    return TrailSet(tuple(trails), g.n_vertices, g.n_edges)


# ---- post-processing ---- #

def halve_trails(ts: TrailSet) -> TrailSet:
    """Split every trail of length >= 2 at edge index floor(m/2); keep length-1 trails."""
    out = []
    for t in ts.trails:
        m = t.length
        if m < 2:
            out.append(t)
            continue
        s = m // 2
        out.append(Trail(t.vertices[:s + 1], t.edge_ids[:s]))
        out.append(Trail(t.vertices[s:], t.edge_ids[s:]))
    return TrailSet(tuple(out), ts.n_vertices, ts.n_edges)


def trail_stats(ts: TrailSet) -> TrailStats:
    lengths = [t.length for t in ts.trails]
    if not lengths:
        return TrailStats(0, 0, 0.0, 0.0, 0, 0.0, {})
    hist: dict[int, int] = {}
    for ln in lengths:
        hist[ln] = hist.get(ln, 0) + 1
    return TrailStats(
        count=len(lengths),
        min_length=min(lengths),
        median_length=float(statistics.median(lengths)),
        mean_length=float(np.mean(lengths)),
        max_length=max(lengths),
        variance=float(np.var(lengths)),
        histogram=dict(sorted(hist.items())),
    )
