"""Prim's algorithm / invasion percolation on random complete bipartite graphs."""
from .graph_model import (
    Colour,
    EdgeId,
    GraphSpec,
    InputError,
    VertexId,
    WeightOracle,
    edge_weight,
    theta_hat,
)
from .prim import PrimTrace, StartPolicy, colour_ratio, ratio_trajectory, run_prim
from .percolation import (
    ComponentIntervals,
    GiantStats,
    components_bruteforce,
    giant_stats,
    intervals_from_prim,
    realized_edges,
    verify_interval_representation,
)
from .exploration import (
    ExplorationTrace,
    PercolatedGraph,
    check_counting_identities,
    explore_in_order,
    is_geo,
    percolate,
    two_neighbourhood_exploration,
)
from .limits import (
    CurveTable,
    ell_inverse,
    ell_rho,
    extinction_probabilities,
    linear_limit,
    linear_limit_curve,
    simulate_two_type_bp,
    sublinear_limit,
)
from .harness import (
    ExperimentConfig,
    SummaryStats,
    run_conditional_binomial_check,
    run_dual_check,
    run_giant_experiment,
    run_linear_experiment,
    run_sublinear_experiment,
    run_verify_sweep,
)

__version__ = "0.1.0"
