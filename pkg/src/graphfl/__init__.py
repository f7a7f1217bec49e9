"""Graph fused lasso via trail decomposition.

Decompose a graph into trails, then solve the fused lasso on it with ADMM
whose dual update is an exact linear-time 1D fused-lasso solve per trail.
"""

from .errors import (
    BlobsDontFit,
    DensityBelowTree,
    DimensionMismatch,
    Disconnected,
    GraphFLError,
    LengthMismatch,
    NonFiniteDerivative,
    NotCoordinateFormat,
    OddDegreePresent,
    ParseError,
    Unreachable,
    VertexOutOfRange,
    WrongOddCount,
)
from .graph import (
    Graph,
    Trail,
    TrailSet,
    ValidationReport,
    connected_components,
    eulerian_circuit,
    eulerian_trail,
    odd_degree_vertices,
    shortest_path,
    validate_trail_partition,
)
from .tv1d import solve_tv1d, tv1d_objective, verify_tv1d_kkt

__version__ = "0.1.0"

from .decompose import (
    VARIANTS,
    DecompositionStrategy,
    TrailStats,
    decompose,
    decompose_edge_wise,
    decompose_grid_rows_cols,
    decompose_median_trails,
    decompose_pseudo_tour,
    decompose_random_trails,
    halve_trails,
    trail_stats,
)
from .solver import (
    AdmmState,
    CoordinateLoss,
    ProblemInstance,
    SlackMapping,
    SolveDiagnostics,
    SolverConfig,
    SQUARED_LOSS,
    adaptive_penalties,
    beta_update_generic,
    beta_update_squared,
    build_slack_mapping,
    gfl_objective,
    residuals,
    solve_gfl,
    u_update,
    vary_penalty,
    z_update,
)
from .spg import (SpgConfig, SpgDiagnostics, build_edge_diff,
                  smoothed_objective, spg_solve, truncate)
from .bench import (
    BlobSpec,
    HalvingLevel,
    StrategySummary,
    TrialResult,
    blob_signal,
    grid_graph,
    random_sparse_graph,
    run_trials,
    trail_halving_experiment,
)
