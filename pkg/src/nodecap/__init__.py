"""Transmission capacity of networks under heterogeneous node capabilities.

Graphs, generators (ER, BA, PFP), shortest-path routing fields, capability
allocation, a packet-level traffic simulator and critical-rate analysis.
"""

from .allocation import AllocationError, allocate, allocate_betweenness, allocate_degree_power, allocate_uniform
from .capacity import (
    CapacityCurve,
    CapacityError,
    FitResult,
    LambdaSearchConfig,
    analytical_lambda_c,
    estimate_alpha_star,
    find_lambda_c,
    fit_bplus_exponent,
    sweep_alpha,
)
from .generators import GeneratorSpec, generate_ba, generate_er, generate_pfp, topology_stats
from .graph import Graph, GraphError, from_edge_list, largest_connected_component, read_edge_list, write_edge_list
from .paths import RoutingState, all_pairs, b_plus_by_degree, betweenness, bfs_from
from .simulation import SimConfig, SimResult, SimulationError, order_parameter, run

__all__ = [
    "AllocationError",
    "CapacityCurve",
    "CapacityError",
    "FitResult",
    "GeneratorSpec",
    "Graph",
    "GraphError",
    "LambdaSearchConfig",
    "RoutingState",
    "SimConfig",
    "SimResult",
    "SimulationError",
    "all_pairs",
    "allocate",
    "allocate_betweenness",
    "allocate_degree_power",
    "allocate_uniform",
    "analytical_lambda_c",
    "b_plus_by_degree",
    "betweenness",
    "bfs_from",
    "estimate_alpha_star",
    "find_lambda_c",
    "fit_bplus_exponent",
    "from_edge_list",
    "generate_ba",
    "generate_er",
    "generate_pfp",
    "largest_connected_component",
    "order_parameter",
    "read_edge_list",
    "run",
    "sweep_alpha",
    "topology_stats",
    "write_edge_list",
]
