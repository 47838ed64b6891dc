"""Hybrid trust model for inter-domain routing.

Trust-rate arithmetic, trust-aware path-vector routing, neighbourhood vote
aggregation and the grid-world experiments built on them.
"""

__version__ = "0.1.0"

from .routing import (
    CompleteDistrustError,
    CostModel,
    RouteEntry,
    enumerate_paths,
    normalized_cost,
    path_cost,
    path_cost_direct,
    path_cost_recommended,
    propagate_routes,
)
from .simulation import (
    SweepConfig,
    SweepResult,
    VariationConfig,
    detection_failures,
    run_alpha_sweep,
    run_trust_variation,
)
from .topology import (
    AsGraph,
    AsNode,
    GridConfig,
    Role,
    TrustEdge,
    assign_roles,
    average_degree,
    build_example_graph,
    build_grid_world,
    generate_grid,
    sample_direct_trust,
    thin_links,
)
from .trust import (
    Leaf,
    NoVotersError,
    TrustBand,
    TrustDomainError,
    TrustTree,
    TrustWeights2,
    TrustWeights3,
    WeightedVote,
    aggregate_votes,
    classify,
    combine_alpha,
    evaluate_trust_tree,
    hybrid_trust,
    make_rate,
    strict_rate,
    universal_trust,
)
from .voting import TrustState, VoteParams, collect_votes, init_state, run_vote_round, run_votes
