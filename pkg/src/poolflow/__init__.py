"""Time-invariant network-flow model of two-person ride-pooling."""

from .assignment import (
    AssignmentState,
    PooledDemandResult,
    build_pooled_demand,
    greedy_assign,
    no_pooling_solution,
    solve_ridepooling,
)
from .flow import (
    DemandMatrix,
    FlowSolution,
    Request,
    RequestSet,
    demand_from_requests,
    evaluate_objective,
    solve_flow,
)
from .graph import (
    NoPathError,
    RoadGraph,
    TravelTimeTable,
    all_pairs_shortest_times,
    build_graph,
    shortest_path_arcs,
)
from .spatial import (
    ConfigEvaluation,
    PairwiseTable,
    PoolingConfig,
    build_pairwise_table,
    enumerate_configs,
    evaluate_pair,
)
from .sweep import CellReport, SweepRow, SweepSpec, run_single, run_sweep
from .temporal import WaitWindow, pair_probability, pair_probability_mc
from .tntp import (
    TntpParseError,
    TripTable,
    format_tntp_trips,
    parse_tntp_network,
    parse_tntp_trips,
    scale_to_requests,
)

__all__ = [
    "AssignmentState",
    "CellReport",
    "ConfigEvaluation",
    "DemandMatrix",
    "FlowSolution",
    "NoPathError",
    "PairwiseTable",
    "PooledDemandResult",
    "PoolingConfig",
    "Request",
    "RequestSet",
    "RoadGraph",
    "SweepRow",
    "SweepSpec",
    "TntpParseError",
    "TravelTimeTable",
    "TripTable",
    "WaitWindow",
    "all_pairs_shortest_times",
    "build_graph",
    "build_pairwise_table",
    "build_pooled_demand",
    "demand_from_requests",
    "enumerate_configs",
    "evaluate_objective",
    "evaluate_pair",
    "format_tntp_trips",
    "greedy_assign",
    "no_pooling_solution",
    "pair_probability",
    "pair_probability_mc",
    "parse_tntp_network",
    "parse_tntp_trips",
    "run_single",
    "run_sweep",
    "scale_to_requests",
    "shortest_path_arcs",
    "solve_flow",
    "solve_ridepooling",
]

__version__ = "0.1.0"
