"""Collaborative graphical Bayesian games: models, solvers, generators, benchmarks."""

from .baselines import (
    CE_FAST,
    CE_NORMAL,
    CeParams,
    PolicyDistribution,
    alternating_maximization,
    cross_entropy,
)
from .bench import ExperimentConfig, ResultRow, StatsSummary, emit, run_experiment, summarize
from .errors import ConfigurationError, DeadlineExceeded, ResourceLimitError
from .factorgraph import (
    Factor,
    FactorGraph,
    FgStats,
    Variable,
    assignment_to_policy,
    build_factor_graph,
    fg_stats,
    policy_to_assignment,
)
from .games import (
    CGBG,
    Component,
    JointPolicy,
    SolveResult,
    StateModel,
    bg_from_state_model,
    build_two_agent_firefight,
    evaluate_policy,
    is_nash_equilibrium,
    load_game,
    save_game,
    solve_brute_force,
)
from .generators import (
    GffConfig,
    GffLayout,
    RandomGameConfig,
    generate_gff,
    generate_random_cgbg,
    is_connected,
)
from .indexing import local_index, local_unindex
from .maxplus import MaxPlusParams, MaxPlusResult, MaxPlusState, max_plus
from .ndp import (
    EliminationOrder,
    NdpResult,
    compute_order,
    ndp_solve,
    predicted_width_lower_bound,
)

__all__ = [
    "CE_FAST",
    "CE_NORMAL",
    "CGBG",
    "CeParams",
    "Component",
    "ConfigurationError",
    "DeadlineExceeded",
    "EliminationOrder",
    "ExperimentConfig",
    "Factor",
    "FactorGraph",
    "FgStats",
    "GffConfig",
    "GffLayout",
    "JointPolicy",
    "MaxPlusParams",
    "MaxPlusResult",
    "MaxPlusState",
    "NdpResult",
    "PolicyDistribution",
    "RandomGameConfig",
    "ResourceLimitError",
    "ResultRow",
    "SolveResult",
    "StateModel",
    "StatsSummary",
    "Variable",
    "alternating_maximization",
    "assignment_to_policy",
    "bg_from_state_model",
    "build_factor_graph",
    "build_two_agent_firefight",
    "compute_order",
    "cross_entropy",
    "emit",
    "evaluate_policy",
    "fg_stats",
    "generate_gff",
    "generate_random_cgbg",
    "is_connected",
    "is_nash_equilibrium",
    "load_game",
    "local_index",
    "local_unindex",
    "max_plus",
    "ndp_solve",
    "policy_to_assignment",
    "predicted_width_lower_bound",
    "run_experiment",
    "save_game",
    "solve_brute_force",
    "summarize",
]
