"""Contextual matching-bandit simulator.

Two-sided markets where one side learns its preferences from noisy linear
scores over per-round contexts: deferred-acceptance matching, per-agent
online ridge regression, an explore-then-commit policy, stable-regret
accounting, closed-form bound evaluators, and a seeded experiment harness.
"""

from .bounds import (
    BoundInputs,
    CorollaryConstants,
    EstimatorMoments,
    EventNus,
    ProbabilityBound,
    TrajectoryLowerBound,
    bad_event_lower_bound,
    corollary_constants,
    event_nus,
    gaussian_tail_bounds,
    good_event_lower_bound,
    invalid_ranking_bound,
    lower_bound_trajectory,
    posterior_moments,
    regret_upper_bound,
)
from .config import MarketConfig, build_environment, load_config, make_config, plan_exploration
from .environment import (
    AgentParams,
    ContextProcess,
    NoiseModel,
    make_lower_bound_instance,
    mean_score,
    sample_context,
    sample_score,
)
from .errors import (
    CapacityError,
    DegenerateCovarianceError,
    HorizonTooShortError,
    MarginAssumptionError,
    MatchingBanditsError,
    OrderingViolationError,
    ValidationError,
)
from .harness import ExperimentResult, run_experiment, run_replication, static_diagnostics
from .matching import enumerate_stable_matchings, find_blocking_pairs, gale_shapley
from .policy import (
    EpisodeLog,
    ExplorationPlan,
    MarketEnvironment,
    exploration_assignment,
    exploration_length,
    run_episode,
    run_exploitation,
    run_exploration,
)
from .regret import (
    GapStats,
    MarginAudit,
    ReplicationBands,
    TwoByThreeCase,
    aggregate_replications,
    audit_margin,
    classify_two_by_three_case,
    gap_stats,
    instantaneous_regret,
    is_valid_ranking,
    optimal_change_flags,
    oracle_matching,
)
from .ridge import RidgeState, predict_mean, rank_arms, ridge_init, ridge_solve, ridge_update
from .scenarios import list_scenarios, scenario_defaults

__version__ = "0.1.0"
