"""Solver for egalitarian jurisdiction-formation games.

Coalitions pick the project location minimizing their aggregate transport
cost and split the total burden equally; on top of that this package builds
core-stable partitions and audits core and Nash stability.
"""
from .coalition import (
    cost_table,
    egalitarian_cost,
    enumerate_coalitions,
    evaluate,
    project_cost,
    rank_coalitions,
)
from .location import LocationResult, aggregate_cost, min_transport_cost, optimal_location
from .model import (
    DELTA,
    NEW_SINGLETON,
    BadExponent,
    Coalition,
    CoalitionEvaluation,
    DeviationMove,
    DimensionMismatch,
    DynamicsTrace,
    EmptyAgentSet,
    GameError,
    IncompleteCover,
    Instance,
    InstanceTooLarge,
    MissingTableEntry,
    NonConvergence,
    NonPositiveProjectCost,
    OverlappingBlocks,
    Partition,
    ProjectCostSpec,
    StepLimitExceeded,
    TransportSpec,
    ValidationError,
    canonical_partition,
    validate_instance,
)
from .stability import (
    all_core_stable_partitions,
    best_response_dynamics,
    check_nash,
    find_blocking_coalition,
    find_nash_stable,
    greedy_core_partition,
    greedy_core_sequence,
    is_core_stable,
    is_nash_stable,
)
from .instance_file import ParseError, parse_instance

__version__ = "0.1.0"
