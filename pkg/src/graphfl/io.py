"""File formats: edge lists, Matrix Market adjacency, vectors, trails, CSV.

Readers reject malformed input with ParseError naming the 1-based line rather
than silently truncating. Matrix Market files are read as connectivity
patterns: values are ignored, (i,j)/(j,i) duplicates collapse to one
undirected edge, diagonal entries are skipped, and edges are canonicalized to
(min,max) and sorted so edge ids are deterministic regardless of entry order.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .decompose import trail_stats
from .errors import NotCoordinateFormat, ParseError, VertexOutOfRange
from .graph import Graph, Trail, TrailSet

__all__ = [
    "read_edge_list", "write_edge_list", "read_matrix_market_adjacency",
    "write_matrix_market_adjacency", "read_vector_csv", "write_vector_csv",
    "read_trails", "write_trails", "write_results_csv", "write_summary_csv",
    "write_histogram_csv", "write_diagnostics_csv",
]


# ---- edge list ---- #

def read_edge_list(path, n_vertices: int | None = None) -> Graph:
    """One `u v` pair per line, 0-based ids, `#` comments.

    Vertex count comes from (in order) the n_vertices argument, a
    `# vertices: n` comment, or max(id) + 1.
    """
    edges = []
    declared = None
    max_id = -1
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("vertices:"):
                    try:
                        declared = int(body.split(":", 1)[1])
                    except ValueError:
                        raise ParseError("bad vertices comment", line=lineno)
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected `u v`, got {line!r}", line=lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer vertex id in {line!r}", line=lineno)
            if u < 0 or v < 0:
                raise ParseError("negative vertex id", line=lineno)
            edges.append((u, v))
            max_id = max(max_id, u, v)
    n = n_vertices if n_vertices is not None else (
        declared if declared is not None else max_id + 1)
    return Graph(max(n, 0), edges)


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(f"# vertices: {g.n_vertices}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


# ---- Matrix Market ---- #

def read_matrix_market_adjacency(path) -> Graph:
    """Coordinate-format Matrix Market file as an undirected graph pattern."""
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError("empty file", line=1)
    banner = lines[0].split()
    if len(banner) < 4 or not banner[0].lower().startswith("%%matrixmarket"):
        raise ParseError("missing %%MatrixMarket banner", line=1)
    tokens = [t.lower() for t in banner[1:]]
    if tokens[0] != "matrix" or tokens[1] != "coordinate":
        raise NotCoordinateFormat(
            f"need `matrix coordinate`, got `{tokens[0]} {tokens[1]}`", line=1)
    field = tokens[2]
    if field not in ("pattern", "real", "integer"):
        raise ParseError(f"unsupported field {field!r}", line=1)
    symmetry = tokens[3] if len(tokens) > 3 else ""
    if symmetry not in ("symmetric", "general"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", line=1)

    idx = 1
    while idx < len(lines) and (not lines[idx].strip()
                                or lines[idx].lstrip().startswith("%")):
        idx += 1
    if idx == len(lines):
        raise ParseError("missing size line", line=len(lines))
    size_line = idx + 1
    parts = lines[idx].split()
    if len(parts) != 3:
        raise ParseError("size line must be `rows cols nnz`", line=size_line)
    try:
        nrows, ncols, nnz = (int(p) for p in parts)
    except ValueError:
        raise ParseError("non-integer size entry", line=size_line)
    if nrows != ncols:
        raise ParseError(f"adjacency needs a square matrix, got {nrows}x{ncols}",
                         line=size_line)

    want_vals = field != "pattern"
    seen: set[tuple[int, int]] = set()
    count = 0
    for off, raw in enumerate(lines[idx + 1:], idx + 2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if count == nnz:
            raise ParseError("more entries than declared nnz", line=off)
        parts = line.split()
        if len(parts) != (3 if want_vals else 2):
            raise ParseError(
                f"expected {'i j value' if want_vals else 'i j'}, got {line!r}",
                line=off)
        try:
            i, j = int(parts[0]), int(parts[1])
            val = float(parts[2]) if want_vals else 1.0
        except ValueError:
            raise ParseError(f"malformed entry {line!r}", line=off)
        count += 1
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise ParseError(f"index ({i},{j}) outside {nrows}x{ncols}", line=off)
        if i == j or val == 0.0:
            continue
        a, b = (i - 1, j - 1) if i < j else (j - 1, i - 1)
        seen.add((a, b))
    if count != nnz:
        raise ParseError(f"declared {nnz} entries, found {count}", line=len(lines))
    return Graph(nrows, sorted(seen))


def write_matrix_market_adjacency(path, g: Graph) -> None:
    """Symmetric pattern file; lower-triangle entries, canonical sorted order."""
    canon = sorted((min(u, v), max(u, v)) for u, v in g.edges)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate pattern symmetric\n")
        fh.write(f"{g.n_vertices} {g.n_vertices} {len(canon)}\n")
        for a, b in canon:
            fh.write(f"{b + 1} {a + 1}\n")


# ---- vectors ---- #

def read_vector_csv(path) -> np.ndarray:
    """One value per line; empty file gives an empty vector."""
    vals = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise ParseError(f"not a number: {line!r}", line=lineno)
    return np.asarray(vals, dtype=np.float64)


def write_vector_csv(path, v) -> None:
    v = np.asarray(v, dtype=np.float64)
    with open(path, "w") as fh:
        for x in v:
            fh.write(repr(float(x)) + "\n")


# ---- trails ---- #

def write_trails(path, ts: TrailSet) -> None:
    """One trail per line (space-separated vertex ids); `#e` comments carry
    the edge ids so files round-trip without the source graph."""
    st = trail_stats(ts)
    with open(path, "w") as fh:
        fh.write(f"# graphfl-trails n_vertices={ts.n_vertices} "
                 f"n_edges={ts.n_edges} trails={len(ts.trails)}\n")
        fh.write(f"# lengths: min {st.min_length} median {st.median_length} "
                 f"mean {st.mean_length:.3f} max {st.max_length}\n")
        for trail in ts.trails:
            fh.write(" ".join(str(v) for v in trail.vertices) + "\n")
            fh.write("#e " + " ".join(str(e) for e in trail.edge_ids) + "\n")


def read_trails(path, n_vertices: int, graph: Graph | None = None) -> TrailSet:
    """Inverse of write_trails. Vertex ids are range-checked here; edge
    partition validity is a separate explicit call (the source graph may be
    absent). Files without `#e` comments need `graph` to recover edge ids.
    """
    header_edges = None
    rows: list[tuple[int, tuple[int, ...], list[int] | None]] = []
    with open(path) as fh:
        pending = None  # (lineno, vertices) awaiting an optional #e line
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if line.startswith("#e"):
                    if pending is None:
                        raise ParseError("#e line without a trail", line=lineno)
                    try:
                        eids = [int(t) for t in line[2:].split()]
                    except ValueError:
                        raise ParseError("non-integer edge id", line=lineno)
                    rows.append((pending[0], pending[1], eids))
                    pending = None
                elif body.startswith("graphfl-trails"):
                    for tok in body.split()[1:]:
                        key, _, val = tok.partition("=")
                        if key == "n_edges":
                            header_edges = int(val)
                continue
            if pending is not None:
                rows.append((pending[0], pending[1], None))
            try:
                verts = tuple(int(t) for t in line.split())
            except ValueError:
                raise ParseError(f"non-integer vertex id in {line!r}", line=lineno)
            if not verts:
                raise ParseError("empty trail line", line=lineno)
            pending = (lineno, verts)
        if pending is not None:
            rows.append((pending[0], pending[1], None))

    lookup = None
    if graph is not None:
        lookup = {}
        for eid, (u, v) in enumerate(graph.edges):
            lookup[(u, v)] = eid
            lookup[(v, u)] = eid

    trails = []
    for lineno, verts, eids in rows:
        for v in verts:
            if not 0 <= v < n_vertices:
                raise VertexOutOfRange(
                    f"line {lineno}: vertex {v} outside 0..{n_vertices - 1}")
        if eids is None:
            if lookup is None:
                raise ParseError(
                    "no #e edge ids and no graph to look them up", line=lineno)
            eids = []
            for a, b in zip(verts, verts[1:]):
                if (a, b) not in lookup:
                    raise ParseError(f"({a},{b}) is not a graph edge", line=lineno)
                eids.append(lookup[(a, b)])
        if len(eids) != len(verts) - 1:
            raise ParseError(
                f"{len(verts)} vertices need {len(verts) - 1} edge ids, "
                f"got {len(eids)}", line=lineno)
        trails.append(Trail(verts, tuple(eids)))

    if header_edges is not None:
        n_edges = header_edges
    elif graph is not None:
        n_edges = graph.n_edges
    else:
        n_edges = sum(len(t.edge_ids) for t in trails)
    return TrailSet(tuple(trails), n_vertices, n_edges)


# ---- result tables ---- #

def write_results_csv(path, results) -> None:
    """Benchmark rows: graph,strategy,trial,steps,seconds,objective,converged."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["graph", "strategy", "trial", "steps", "seconds",
                    "objective", "converged"])
        for r in results:
            obj = "" if math.isnan(r.objective) else repr(r.objective)
            w.writerow([r.graph, r.strategy, r.trial, r.steps,
                        f"{r.seconds:.6f}", obj, int(r.converged)])


def write_summary_csv(path, summaries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "mean_steps", "stderr_steps", "mean_seconds",
                    "n_trials", "n_converged"])
        for s in summaries:
            w.writerow([s.strategy, repr(s.mean_steps), repr(s.stderr_steps),
                        f"{s.mean_seconds:.6f}", s.n_trials, s.n_converged])


def write_histogram_csv(path, histograms: dict) -> None:
    """Trail-length histograms: strategy,length,count."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "length", "count"])
        for name, hist in histograms.items():
            for length in sorted(hist):
                w.writerow([name, length, hist[length]])


def write_diagnostics_csv(path, diag) -> None:
    """Per-iteration solver trace: iter,r_norm,s_norm,alpha,objective."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "r_norm", "s_norm", "alpha", "objective"])
        r = getattr(diag, "r_norms", np.empty(0))
        s = getattr(diag, "s_norms", np.empty(0))
        a = getattr(diag, "alphas", np.empty(0))
        o = diag.objectives
        for i in range(len(o)):
            w.writerow([i + 1,
                        repr(float(r[i])) if i < len(r) else "",
                        repr(float(s[i])) if i < len(s) else "",
                        repr(float(a[i])) if i < len(a) else "",
                        repr(float(o[i]))])
