"""ADMM solver for the graph fused lasso over a trail decomposition.

The problem

    minimize_beta  loss(y, beta) + lambda * sum_{(r,s) in E} |beta_r - beta_s|

is rewritten with one slack variable z_j for every visit a trail makes to a
vertex. With (A beta)_j = beta_{vertex(j)} the constraint is A beta = z and
scaled-dual ADMM alternates

    beta: closed form (squared loss) or per-coordinate Newton,
    z:    per trail, an exact weighted 1D fused lasso on targets A beta + u,
    u:    u += A beta - z.

Each trail's slacks occupy a contiguous index range, so the z step is one
batched linear-time solve. Convergence uses the usual primal/dual residual
test; optional residual balancing rescales the penalty, and per-slack
penalties can be biased toward long trails (adaptive variant).

The built-in squared loss reports the objective 0.5*||y - beta||^2 + lambda*TV
while the closed-form beta step uses unhalved constants (2y + ...)/(2 + ...);
the solver therefore hands 2*lambda to the z step, which makes the fixed point
minimize exactly the reported objective. Generic losses have no halving
convention and get lambda as passed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .decompose import DecompositionStrategy, decompose
from .errors import DimensionMismatch, NonFiniteDerivative, VertexOutOfRange
from .graph import Graph, TrailSet, connected_components
from .tv1d import _dp_spans

__all__ = [
    "CoordinateLoss", "ProblemInstance", "SolverConfig", "SlackMapping",
    "AdmmState", "SolveDiagnostics", "SQUARED_LOSS", "build_slack_mapping",
    "beta_update_squared", "beta_update_generic", "z_update", "u_update",
    "adaptive_penalties", "residuals", "vary_penalty", "solve_gfl",
    "gfl_objective",
]


@dataclass(frozen=True)
class CoordinateLoss:
    """Separable smooth convex loss given by per-coordinate evaluators.

    value/grad/hess take (beta, y) as arrays and return per-coordinate arrays.
    lower/upper bound the open domain (e.g. beta > 0 for a Poisson loss).
    """

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lower: float = -math.inf
    upper: float = math.inf


# Unhalved squared loss: the generic Newton path with this loss reproduces the
# closed-form beta step exactly (which is what makes it a useful cross-check).
SQUARED_LOSS = CoordinateLoss(
    value=lambda beta, y: (beta - y) ** 2,
    grad=lambda beta, y: 2.0 * (beta - y),
    hess=lambda beta, y: np.full_like(beta, 2.0),
)


@dataclass(frozen=True)
class ProblemInstance:
    """Observations, fusion strength, and loss for one solve."""

    y: np.ndarray
    lam: float
    loss: Union[str, CoordinateLoss] = "squared"

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if y.ndim != 1:
            raise ValueError(f"y must be 1-D, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValueError("y must be finite")
        object.__setattr__(self, "y", y)
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")
        if isinstance(self.loss, str) and self.loss != "squared":
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-4
    max_iters: int = 20000
    alpha0: float = 1.0
    vary_penalty: bool = True
    accel_c: float = 0.0
    newton_iters: int = 20
    newton_tol: float = 1e-10

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.alpha0 <= 0:
            raise ValueError("alpha0 must be > 0")
        if not 0.0 <= self.accel_c <= 1.0:
            raise ValueError("accel_c must lie in [0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


class SlackMapping:
    """Index bookkeeping between vertices, slacks, and trails.

    slack_to_vertex concatenates the trail vertex sequences, so each trail's
    slacks are the contiguous range [trail_starts[t], trail_stops[t]) and
    (A beta)_j is just beta[slack_to_vertex][j].
    """

    __slots__ = ("slack_to_vertex", "trail_starts", "trail_stops",
                 "trail_of_slack", "n_vertices", "n_trails", "d",
                 "vertex_slack_counts", "_slack_order", "_slack_indptr")

    def __init__(self, slack_to_vertex, trail_starts, trail_stops, n_vertices):
        self.slack_to_vertex = slack_to_vertex
        self.trail_starts = trail_starts
        self.trail_stops = trail_stops
        self.n_vertices = int(n_vertices)
        self.n_trails = int(trail_starts.size)
        self.d = int(slack_to_vertex.size)
        lengths = trail_stops - trail_starts
        self.trail_of_slack = np.repeat(np.arange(self.n_trails, dtype=np.int64),
                                        lengths)
        self.vertex_slack_counts = np.bincount(slack_to_vertex,
                                               minlength=self.n_vertices)
        self._slack_order = None
        self._slack_indptr = None

    def trail_edge_counts(self) -> np.ndarray:
        """T(t) = edge count of trail t (= slacks - 1, floored at 0)."""
        return np.maximum(self.trail_stops - self.trail_starts - 1, 0)

    def slacks_of_vertex(self, i: int) -> np.ndarray:
        """The index set J(i) of slacks owned by vertex i, ascending."""
        if self._slack_order is None:
            self._slack_order = np.argsort(self.slack_to_vertex, kind="stable")
            self._slack_indptr = np.concatenate(
                ([0], np.cumsum(self.vertex_slack_counts)))
        if not 0 <= i < self.n_vertices:
            raise VertexOutOfRange(f"vertex {i} outside 0..{self.n_vertices - 1}")
        return self._slack_order[self._slack_indptr[i]:self._slack_indptr[i + 1]]


def build_slack_mapping(ts: TrailSet, n_vertices: int) -> SlackMapping:
    """Lay out one slack per trail-vertex visit, trail-contiguously."""
    starts = np.empty(len(ts.trails), dtype=np.int64)
    stops = np.empty(len(ts.trails), dtype=np.int64)
    chunks = []
    pos = 0
    for t, trail in enumerate(ts.trails):
        starts[t] = pos
        pos += len(trail.vertices)
        stops[t] = pos
        chunks.append(np.asarray(trail.vertices, dtype=np.int64))
    stv = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    if stv.size and (stv.min() < 0 or stv.max() >= n_vertices):
        raise VertexOutOfRange("trail vertex outside 0..n_vertices-1")
    return SlackMapping(stv, starts, stops, n_vertices)


@dataclass
class AdmmState:
    """Mutable iterate bundle for one ADMM run."""

    beta: np.ndarray
    z: np.ndarray
    u: np.ndarray
    alpha: float
    rho: np.ndarray
    iteration: int = 0
    r_norm: float = math.inf
    s_norm: float = math.inf


# ---- individual updates ---- #

def beta_update_squared(y, z, u, rho, mapping: SlackMapping) -> np.ndarray:
    """beta_i = (2 y_i + sum_{j in J(i)} rho_j (z_j - u_j)) / (2 + sum rho_j).

    Vertices with no slacks come out as y_i exactly (2y/2).
    """
    stv = mapping.slack_to_vertex
    num = 2.0 * y + np.bincount(stv, weights=rho * (z - u), minlength=mapping.n_vertices)
    den = 2.0 + np.bincount(stv, weights=rho, minlength=mapping.n_vertices)
    return num / den


def beta_update_generic(loss: CoordinateLoss, y, z, u, rho, mapping: SlackMapping,
                        newton_iters: int = 20, newton_tol: float = 1e-10,
                        beta0=None) -> np.ndarray:
    """Per-coordinate Newton on loss_i(b) + 0.5 sum_{j in J(i)} rho_j (b - z_j + u_j)^2.

    Warm-started at beta0 (default y, clipped into the open domain). Steps
    leaving the domain bisect toward the violated bound instead.
    """
    stv = mapping.slack_to_vertex
    s1 = np.bincount(stv, weights=rho * (z - u), minlength=mapping.n_vertices)
    s2 = np.bincount(stv, weights=rho, minlength=mapping.n_vertices)
    lo, hi = loss.lower, loss.upper
    if beta0 is None:
        beta0 = y
    b = np.clip(np.asarray(beta0, dtype=np.float64),
                None if lo == -math.inf else lo + 1e-12,
                None if hi == math.inf else hi - 1e-12).astype(np.float64)
    for _ in range(newton_iters):
        gp = loss.grad(b, y) + s2 * b - s1
        gh = loss.hess(b, y) + s2
        if not (np.all(np.isfinite(gp)) and np.all(np.isfinite(gh))):
            raise NonFiniteDerivative("loss derivative evaluated to nan/inf")
        step = np.where(gh > 0.0, gp / np.where(gh > 0.0, gh, 1.0), 0.0)
        bn = b - step
        if lo != -math.inf:
            bn = np.where(bn <= lo, 0.5 * (b + lo), bn)
        if hi != math.inf:
            bn = np.where(bn >= hi, 0.5 * (b + hi), bn)
        delta = float(np.max(np.abs(bn - b))) if b.size else 0.0
        b = bn
        if delta < newton_tol:
            break
    return b


def z_update(beta, u, rho, mapping: SlackMapping, lam: float) -> np.ndarray:
    """Per trail: exact 1D fused lasso with targets A beta + u, weights rho/(2*lam)."""
    targets = beta[mapping.slack_to_vertex] + u
    w = rho / (2.0 * lam)
    z = np.empty_like(targets)
    if mapping.d:
        _dp_spans(targets, w, mapping.trail_starts, mapping.trail_stops, z)
    return z


def u_update(u, beta, z, mapping: SlackMapping) -> np.ndarray:
    """u_j += beta_{vertex(j)} - z_j."""
    return u + (beta[mapping.slack_to_vertex] - z)


def adaptive_penalties(mapping: SlackMapping, alpha: float, c: float) -> np.ndarray:
    """rho_j = (c * k * T(j) / d + (1 - c)) * alpha, T(j) = slack count of the trail.

    T(j) measures trail length in visited nodes, so sum_t T(t) = d and the
    first term is exactly T(j) / mean(T) scaled by c. Two exactness properties
    fall out: c = 0 gives rho_j = alpha bitwise (0*x + 1 is exact), and equal
    length trails give k*T = d, hence rho_j = alpha bitwise for c = 0.5 too.
    The latter is why row/column trails on a square grid are insensitive to c.
    """
    k = mapping.n_trails
    d = mapping.d
    t_nodes = (mapping.trail_stops - mapping.trail_starts).astype(np.float64)
    per_trail = (c * k * t_nodes / d + (1.0 - c)) * alpha
    return np.repeat(per_trail, mapping.trail_stops - mapping.trail_starts)


def residuals(beta, z, z_prev, u, rho, mapping: SlackMapping, tol: float):
    """(r_norm, s_norm, eps_pri, eps_dual) for the scaled-dual stopping test.

    r = A beta - z; s = A^T (rho * (z_prev - z)), which is alpha * A^T dz for
    uniform penalties. eps_pri = sqrt(d)*tol + tol*max(||A beta||, ||z||);
    eps_dual = sqrt(n)*tol + tol*||A^T (rho * u)||.
    """
    stv = mapping.slack_to_vertex
    abeta = beta[stv]
    r_norm = float(np.linalg.norm(abeta - z))
    s_vec = np.bincount(stv, weights=rho * (z_prev - z), minlength=mapping.n_vertices)
    s_norm = float(np.linalg.norm(s_vec))
    eps_pri = math.sqrt(mapping.d) * tol + tol * max(
        float(np.linalg.norm(abeta)), float(np.linalg.norm(z)))
    dual_ref = np.bincount(stv, weights=rho * u, minlength=mapping.n_vertices)
    eps_dual = math.sqrt(mapping.n_vertices) * tol + tol * float(np.linalg.norm(dual_ref))
    return r_norm, s_norm, eps_pri, eps_dual


def vary_penalty(state: AdmmState, mapping: SlackMapping, accel_c: float) -> bool:
    """Residual balancing: double alpha (halving u) when the primal residual
    dominates tenfold, halve it (doubling u) in the opposite case. rho is
    recomputed from the new alpha. Returns True when a rescale fired."""
    if state.r_norm > 10.0 * state.s_norm:
        state.alpha *= 2.0
        state.u = state.u * 0.5
    elif state.s_norm > 10.0 * state.r_norm:
        state.alpha *= 0.5
        state.u = state.u * 2.0
    else:
        return False
    state.rho = adaptive_penalties(mapping, state.alpha, accel_c)
    return True


# ---- objective ---- #

def _loss_total(y, beta, loss) -> float:
    if isinstance(loss, str):
        return 0.5 * float(np.sum((y - beta) ** 2))
    return float(np.sum(loss.value(beta, y)))


def gfl_objective(g: Graph, y, beta, lam: float, loss="squared") -> float:
    """loss(y, beta) + lam * sum over edges |beta_r - beta_s|.

    The built-in squared loss counts as 0.5 * sum (y_i - beta_i)^2.
    """
    y = np.asarray(y, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    us, vs = g.edge_arrays()
    penalty = float(np.sum(np.abs(beta[us] - beta[vs]))) if g.n_edges else 0.0
    return _loss_total(y, beta, loss) + lam * penalty


# ---- the full solve ---- #

@dataclass
class SolveDiagnostics:
    steps: int
    converged: bool
    wall_seconds: float
    objective: float
    n_trails: int
    strategy: str | None = None
    r_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    s_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    alphas: np.ndarray = field(default_factory=lambda: np.empty(0))
    objectives: np.ndarray = field(default_factory=lambda: np.empty(0))
    components: list["SolveDiagnostics"] | None = None


DEFAULT_STRATEGY = DecompositionStrategy("pseudotour", seed=0)


def _edges_from_trailset(ts: TrailSet) -> list[tuple[int, int]]:
    edges: list[tuple[int, int] | None] = [None] * ts.n_edges
    for trail in ts.trails:
        for i, eid in enumerate(trail.edge_ids):
            if not 0 <= eid < ts.n_edges or edges[eid] is not None:
                raise ValueError(
                    "trail set is not a valid edge partition; "
                    "run validate_trail_partition against the source graph")
            edges[eid] = (trail.vertices[i], trail.vertices[i + 1])
    if any(e is None for e in edges):
        raise ValueError("trail set leaves edges uncovered")
    return edges  # type: ignore[return-value]


def _admm(ts: TrailSet, g: Graph, problem: ProblemInstance,
          config: SolverConfig, strategy_name: str | None) -> tuple[np.ndarray, SolveDiagnostics]:
    t0 = time.perf_counter()
    y = problem.y
    lam = float(problem.lam)
    loss = problem.loss
    squared = isinstance(loss, str)
    # unhalved beta-step constants + half-squared reported objective
    # balance out only if the z step sees twice the user's lambda
    lam_z = 2.0 * lam if squared else lam
    mapping = build_slack_mapping(ts, g.n_vertices)

    state = AdmmState(
        beta=y.copy(),
        z=None,  # set below from beta
        u=np.zeros(mapping.d),
        alpha=config.alpha0,
        rho=adaptive_penalties(mapping, config.alpha0, config.accel_c),
    )
    state.z = state.beta[mapping.slack_to_vertex]

    r_hist: list[float] = []
    s_hist: list[float] = []
    a_hist: list[float] = []
    o_hist: list[float] = []
    best_obj = math.inf
    best_beta = state.beta
    converged = False
    steps = 0

    for it in range(1, config.max_iters + 1):
        if squared:
            state.beta = beta_update_squared(y, state.z, state.u, state.rho, mapping)
        else:
            state.beta = beta_update_generic(
                loss, y, state.z, state.u, state.rho, mapping,
                config.newton_iters, config.newton_tol, beta0=state.beta)
        z_prev = state.z
        state.z = z_update(state.beta, state.u, state.rho, mapping, lam_z)
        state.u = u_update(state.u, state.beta, state.z, mapping)
        state.iteration = it
        r_norm, s_norm, eps_pri, eps_dual = residuals(
            state.beta, state.z, z_prev, state.u, state.rho, mapping, config.tol)
        state.r_norm, state.s_norm = r_norm, s_norm
        obj = gfl_objective(g, y, state.beta, lam, loss)
        r_hist.append(r_norm)
        s_hist.append(s_norm)
        a_hist.append(state.alpha)
        o_hist.append(obj)
        if obj < best_obj:
            best_obj = obj
            best_beta = state.beta
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            steps = it
            break
        if config.vary_penalty:
            vary_penalty(state, mapping, config.accel_c)
    else:
        steps = config.max_iters

    beta_out = state.beta if converged else best_beta
    diag = SolveDiagnostics(
        steps=steps,
        converged=converged,
        wall_seconds=time.perf_counter() - t0,
        objective=gfl_objective(g, y, beta_out, lam, loss),
        n_trails=mapping.n_trails,
        strategy=strategy_name,
        r_norms=np.asarray(r_hist),
        s_norms=np.asarray(s_hist),
        alphas=np.asarray(a_hist),
        objectives=np.asarray(o_hist),
    )
    return beta_out, diag


def _minimize_loss_only(problem: ProblemInstance, config: SolverConfig) -> np.ndarray:
    if isinstance(problem.loss, str):
        return problem.y.copy()
    empty = SlackMapping(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                         np.empty(0, dtype=np.int64), problem.y.size)
    return beta_update_generic(problem.loss, problem.y, np.empty(0), np.empty(0),
                               np.empty(0), empty, config.newton_iters,
                               config.newton_tol)


def solve_gfl(graph_or_trails: Union[Graph, TrailSet], problem: ProblemInstance,
              strategy: DecompositionStrategy | None = None,
              config: SolverConfig | None = None) -> tuple[np.ndarray, SolveDiagnostics]:
    """Solve the graph fused lasso; returns (beta, diagnostics).

    Accepts either a Graph (decomposed with `strategy`, default pseudotour
    seed 0) or a ready-made TrailSet. Disconnected graphs are split and each
    component solved independently on a relabeled subgraph (components in
    ascending-vertex order); the returned beta is stitched back together and
    diagnostics.steps is the max over components. lambda = 0 skips ADMM and
    returns the plain loss minimizer.
    """
    config = config or SolverConfig()
    strategy = strategy or DEFAULT_STRATEGY
    t0 = time.perf_counter()

    if isinstance(graph_or_trails, TrailSet):
        ts = graph_or_trails
        if problem.y.size != ts.n_vertices:
            raise DimensionMismatch(
                f"y has length {problem.y.size}, trail set covers {ts.n_vertices} vertices")
        if problem.lam == 0.0:
            beta = _minimize_loss_only(problem, config)
            g = Graph(ts.n_vertices, _edges_from_trailset(ts))
            return beta, SolveDiagnostics(
                steps=0, converged=True, wall_seconds=time.perf_counter() - t0,
                objective=gfl_objective(g, problem.y, beta, 0.0, problem.loss),
                n_trails=len(ts.trails), strategy=None)
        g = Graph(ts.n_vertices, _edges_from_trailset(ts))
        return _admm(ts, g, problem, config, None)

    g = graph_or_trails
    if problem.y.size != g.n_vertices:
        raise DimensionMismatch(
            f"y has length {problem.y.size}, graph has {g.n_vertices} vertices")
    if problem.lam == 0.0:
        beta = _minimize_loss_only(problem, config)
        return beta, SolveDiagnostics(
            steps=0, converged=True, wall_seconds=time.perf_counter() - t0,
            objective=gfl_objective(g, problem.y, beta, 0.0, problem.loss),
            n_trails=0, strategy=strategy.variant)

    comps = connected_components(g)
    if len(comps) == 1:
        ts = decompose(g, strategy)
        return _admm(ts, g, problem, config, strategy.variant)

    # disconnected: relabel each component, solve, stitch
    beta = np.empty(g.n_vertices)
    children: list[SolveDiagnostics] = []
    for comp in comps:
        rank = {v: i for i, v in enumerate(comp)}
        sub_edges = [(rank[a], rank[b]) for a, b in g._edges if a in rank]
        sub_g = Graph(len(comp), sub_edges)
        sub_problem = ProblemInstance(problem.y[comp], problem.lam, problem.loss)
        sub_beta, sub_diag = solve_gfl(sub_g, sub_problem, strategy, config)
        beta[comp] = sub_beta
        children.append(sub_diag)
    diag = SolveDiagnostics(
        steps=max(c.steps for c in children),
        converged=all(c.converged for c in children),
        wall_seconds=time.perf_counter() - t0,
        objective=gfl_objective(g, problem.y, beta, problem.lam, problem.loss),
        n_trails=sum(c.n_trails for c in children),
        strategy=strategy.variant,
        components=children,
    )
    return beta, diag
