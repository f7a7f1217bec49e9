"""Undirected multigraphs, trails, and the walk algorithms built on them.

Vertices are integers 0..n_vertices-1. Edges keep the ids 0..n_edges-1 given
by their position in the constructing edge list; parallel edges are allowed
(distinct ids), self loops are not. A Graph is immutable once built.

A Trail is a walk that repeats no edge. A TrailSet is a collection of trails
meant to cover each edge of a source graph exactly once; whether it actually
does is checked by validate_trail_partition, never assumed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Disconnected,
    OddDegreePresent,
    Unreachable,
    VertexOutOfRange,
    WrongOddCount,
)

AdjRow = list[tuple[int, int]]  # (neighbor, edge id), ascending edge id


class Graph:
    """Immutable undirected multigraph.

    Parameters
    ----------
    n_vertices : int
        Number of vertices; vertex ids are 0..n_vertices-1.
    edges : iterable of (int, int)
        Edge endpoints. Position in this sequence is the edge id, and the
        original (u, v) orientation is preserved by the ``edges`` property so
        construction followed by re-export round-trips exactly.
    """

    __slots__ = ("n_vertices", "n_edges", "_edges", "_adj", "_degrees",
                 "_adj_by_neighbor", "_edge_arrays")

    def __init__(self, n_vertices: int, edges):
        if n_vertices < 0:
            raise ValueError(f"n_vertices must be >= 0, got {n_vertices}")
        self.n_vertices = int(n_vertices)
        edge_list: list[tuple[int, int]] = []
        adj: list[AdjRow] = [[] for _ in range(self.n_vertices)]
        degrees = [0] * self.n_vertices
        for eid, (u, v) in enumerate(edges):
            u = int(u)
            v = int(v)
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise VertexOutOfRange(
                    f"edge {eid} = ({u}, {v}) outside 0..{self.n_vertices - 1}")
            if u == v:
                raise ValueError(f"edge {eid} is a self loop at vertex {u}")
            edge_list.append((u, v))
            # appending in construction order keeps every row ascending in edge id
            adj[u].append((v, eid))
            adj[v].append((u, eid))
            degrees[u] += 1
            degrees[v] += 1
        self._edges = edge_list
        self.n_edges = len(edge_list)
        self._adj = adj
        self._degrees = degrees
        self._adj_by_neighbor: list[AdjRow] | None = None
        self._edge_arrays: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edge list in id order, original orientation preserved."""
        return list(self._edges)

    def edge_endpoints(self, eid: int) -> tuple[int, int]:
        if not 0 <= eid < self.n_edges:
            raise IndexError(f"edge id {eid} outside 0..{self.n_edges - 1}")
        return self._edges[eid]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return self._degrees[v]

    def adjacency(self, v: int) -> AdjRow:
        """(neighbor, edge id) pairs at v, ascending in edge id."""
        self._check_vertex(v)
        return list(self._adj[v])

    def neighbors(self, v: int) -> list[int]:
        self._check_vertex(v)
        return [nbr for nbr, _ in self._adj[v]]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint arrays (us, vs), both int64 of length n_edges."""
        if self._edge_arrays is None:
            if self.n_edges:
                us, vs = zip(*self._edges)
            else:
                us, vs = (), ()
            self._edge_arrays = (np.asarray(us, dtype=np.int64),
                                 np.asarray(vs, dtype=np.int64))
        return self._edge_arrays

    def _adjacency_by_neighbor(self) -> list[AdjRow]:
        # cached rows sorted by (neighbor id, edge id) for lowest-id BFS
        if self._adj_by_neighbor is None:
            self._adj_by_neighbor = [sorted(row) for row in self._adj]
        return self._adj_by_neighbor

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n_vertices:
            raise VertexOutOfRange(f"vertex {v} outside 0..{self.n_vertices - 1}")

    def __repr__(self) -> str:
        return f"Graph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class Trail:
    """A walk with no repeated edge: vertices[i] -- edge_ids[i] -- vertices[i+1]."""

    vertices: tuple[int, ...]
    edge_ids: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edge_ids) + 1:
            raise ValueError(
                f"trail with {len(self.vertices)} vertices needs "
                f"{len(self.vertices) - 1} edge ids, got {len(self.edge_ids)}")

    @property
    def length(self) -> int:
        """Edge count."""
        return len(self.edge_ids)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def is_circuit(self) -> bool:
        return self.length > 0 and self.start == self.end


@dataclass(frozen=True)
class TrailSet:
    """Trails intended to partition the edges of a graph with the given dims."""

    trails: tuple[Trail, ...]
    n_vertices: int
    n_edges: int

    def __len__(self) -> int:
        return len(self.trails)

    def lengths(self) -> tuple[int, ...]:
        return tuple(t.length for t in self.trails)

    def total_edges(self) -> int:
        return sum(t.length for t in self.trails)


@dataclass
class ValidationReport:
    """Outcome of validate_trail_partition; empty lists mean a valid partition."""

    n_edges: int
    n_trails: int
    unused_edges: list[int] = field(default_factory=list)
    reused_edges: list[int] = field(default_factory=list)
    # (trail index, step index) where consecutive vertices share no edge at all
    nonadjacent_steps: list[tuple[int, int]] = field(default_factory=list)
    # (trail index, step index) where the recorded edge id does not join the pair
    mismatched_edges: list[tuple[int, int]] = field(default_factory=list)
    out_of_range: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.unused_edges or self.reused_edges
                    or self.nonadjacent_steps or self.mismatched_edges
                    or self.out_of_range)

    def summary(self) -> str:
        if self.ok:
            return (f"OK: {self.n_trails} trails cover "
                    f"{self.n_edges} edges exactly once")
        parts = []
        for name in ("unused_edges", "reused_edges", "nonadjacent_steps",
                     "mismatched_edges", "out_of_range"):
            items = getattr(self, name)
            if items:
                head = ", ".join(map(str, items[:5]))
                more = "" if len(items) <= 5 else f", ... ({len(items)} total)"
                parts.append(f"{name}: {head}{more}")
        return "INVALID: " + "; ".join(parts)


# ---- basic structure queries ---- #

def connected_components(g: Graph) -> list[list[int]]:
    """Vertex sets of the connected components.

    Components are ordered by their smallest vertex, vertices ascending, so
    the output is deterministic. Isolated vertices form singleton components.
    """
    seen = [False] * g.n_vertices
    comps: list[list[int]] = []
    for s in range(g.n_vertices):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for nbr, _ in g._adj[v]:
                if not seen[nbr]:
                    seen[nbr] = True
                    comp.append(nbr)
                    queue.append(nbr)
        comp.sort()
        comps.append(comp)
    return comps


def odd_degree_vertices(g: Graph) -> list[int]:
    """Vertices of odd degree, ascending. Always an even count (handshake)."""
    return [v for v in range(g.n_vertices) if g._degrees[v] % 2 == 1]


# ---- Eulerian walks ---- #

def _trace_eulerian(adj, start: int, used) -> tuple[list[int], list[int]]:
    """Hierholzer's algorithm, iterative, smallest-edge-id-first.

    adj maps vertex -> [(neighbor, edge id), ...] ascending in edge id; used
    is indexable by edge id. At every step the walk leaves on the unused
    incident edge with the smallest id; sub-circuits splice in as the stack
    unwinds, which reproduces the classic splice-in order. Returns the circuit
    as (vertices, edge ids); the caller checks that all edges were consumed.
    """
    ptr: dict[int, int] = {}
    stack: list[tuple[int, int]] = [(start, -1)]
    verts: list[int] = []
    eids: list[int] = []
    while stack:
        v, e_in = stack[-1]
        row = adj[v]
        i = ptr.get(v, 0)
        moved = False
        while i < len(row):
            nbr, eid = row[i]
            i += 1
            if not used[eid]:
                used[eid] = 1
                ptr[v] = i
                stack.append((nbr, eid))
                moved = True
                break
        if not moved:
            ptr[v] = i
            stack.pop()
            verts.append(v)
            if e_in >= 0:
                eids.append(e_in)
    verts.reverse()
    eids.reverse()
    return verts, eids


def eulerian_circuit(g: Graph, start: int = 0) -> Trail:
    """Closed trail through every edge exactly once, starting and ending at start.

    Deterministic: the unused edge with the smallest id is taken at each step.
    Raises OddDegreePresent if any vertex has odd degree and Disconnected if
    some edge is unreachable from start (isolated vertices are fine).
    """
    g._check_vertex(start)
    odd = odd_degree_vertices(g)
    if odd:
        raise OddDegreePresent(
            f"{len(odd)} odd-degree vertices (first few: {odd[:6]})")
    if g.n_edges == 0:
        return Trail((start,), ())
    if g._degrees[start] == 0:
        raise Disconnected(f"start vertex {start} touches no edges")
    used = bytearray(g.n_edges)
    verts, eids = _trace_eulerian(g._adj, start, used)
    if len(eids) != g.n_edges:
        raise Disconnected(
            f"{g.n_edges - len(eids)} edges unreachable from vertex {start}")
    return Trail(tuple(verts), tuple(eids))


def eulerian_trail(g: Graph, u: int, v: int) -> Trail:
    """Open trail through every edge exactly once, from u to v (or v to u).

    u and v must be exactly the two odd-degree vertices. Internally a
    temporary edge u-v closes the graph, an Eulerian circuit is traced, and
    the circuit is rotated and cut at the temporary edge.
    """
    g._check_vertex(u)
    g._check_vertex(v)
    odd = odd_degree_vertices(g)
    if u == v or set(odd) != {u, v}:
        raise WrongOddCount(
            f"odd-degree vertices are {odd}, requested endpoints ({u}, {v})")
    m = g.n_edges
    adj = list(g._adj)
    adj[u] = adj[u] + [(v, m)]
    adj[v] = adj[v] + [(u, m)]
    used = bytearray(m + 1)
    verts, eids = _trace_eulerian(adj, u, used)
    if len(eids) != m + 1:
        raise Disconnected(f"{m + 1 - len(eids)} edges unreachable from vertex {u}")
    p = eids.index(m)
    # circuit verts[0..M] with verts[0] == verts[M]; edge j joins verts[j], verts[j+1]
    cut_eids = eids[p + 1:] + eids[:p]
    cut_verts = verts[p + 1:] + verts[1:p + 1]
    return Trail(tuple(cut_verts), tuple(cut_eids))


# ---- shortest paths ---- #

def _bfs_path(adj, source: int, target: int):
    """Layered BFS returning the shortest path as (vertices, edge_ids), or None.

    adj maps vertex -> [(neighbor, edge id), ...] sorted ascending by
    (neighbor, edge id). Layers are expanded in ascending vertex order, so
    each vertex's parent is the lowest-id neighbor in the previous layer and
    the parent edge is the lowest-id edge to that parent.
    """
    if source == target:
        return [source], []
    parent_v = {source: -1}
    parent_e = {source: -1}
    layer = [source]
    while layer:
        nxt = []
        for v in layer:
            for nbr, eid in adj[v]:
                if nbr not in parent_v:
                    parent_v[nbr] = v
                    parent_e[nbr] = eid
                    nxt.append(nbr)
        if target in parent_v:
            break
        nxt.sort()
        layer = nxt
    if target not in parent_v:
        return None
    verts = [target]
    eids = []
    v = target
    while v != source:
        eids.append(parent_e[v])
        v = parent_v[v]
        verts.append(v)
    verts.reverse()
    eids.reverse()
    return verts, eids


def shortest_path(g: Graph, source: int, target: int) -> Trail:
    """Fewest-edge path from source to target as a Trail.

    Ties break toward the lowest vertex id (layered BFS; see _bfs_path).
    source == target yields a zero-edge trail. Raises Unreachable when the
    two vertices lie in different components.
    """
    g._check_vertex(source)
    g._check_vertex(target)
    found = _bfs_path(g._adjacency_by_neighbor(), source, target)
    if found is None:
        raise Unreachable(f"no path from {source} to {target}")
    verts, eids = found
    return Trail(tuple(verts), tuple(eids))


# ---- partition validation ---- #

def validate_trail_partition(g: Graph, ts: TrailSet) -> ValidationReport:
    """Check that ts uses every edge of g exactly once and walks real edges.

    Reports, rather than raises: unused edge ids, reused edge ids, steps whose
    endpoints are not adjacent in g, steps whose recorded edge id does not
    join its endpoints, and out-of-range vertices or edge ids.
    """
    report = ValidationReport(n_edges=g.n_edges, n_trails=len(ts.trails))
    use_count = [0] * g.n_edges
    for ti, trail in enumerate(ts.trails):
        for si, v in enumerate(trail.vertices):
            if not 0 <= v < g.n_vertices:
                report.out_of_range.append((ti, si))
        for si, eid in enumerate(trail.edge_ids):
            a, b = trail.vertices[si], trail.vertices[si + 1]
            if not (0 <= a < g.n_vertices and 0 <= b < g.n_vertices):
                continue  # already reported above
            if not 0 <= eid < g.n_edges:
                report.mismatched_edges.append((ti, si))
                continue
            use_count[eid] += 1
            x, y = g._edges[eid]
            if {x, y} != {a, b}:
                if any(nbr == b for nbr, _ in g._adj[a]):
                    report.mismatched_edges.append((ti, si))
                else:
                    report.nonadjacent_steps.append((ti, si))
    report.unused_edges = [e for e, c in enumerate(use_count) if c == 0]
    report.reused_edges = [e for e, c in enumerate(use_count) if c > 1]
    return report
