"""Ground-truth oracles and regret accounting.

Per-round agent-optimal stable matching, instantaneous regret against it,
gap statistics with similarity scores, valid-ranking checks, the canonical
two-agent/three-arm case taxonomy, oracle-change detection, replication
aggregation, and the realized-margin audit.

Regret is always computed on true mean scores, never on noisy observations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Sequence

import numpy as np

from .environment import AgentParams
from .errors import ValidationError
from .matching import Matching, _check_permutation, gale_shapley


def true_scores(params: AgentParams, contexts_t: np.ndarray) -> np.ndarray:
    """(n_agents, n_arms) true mean scores for one round's contexts."""
    contexts_t = np.asarray(contexts_t, dtype=float)
    if contexts_t.ndim != 2 or contexts_t.shape[1] != params.dim:
        raise ValidationError(
            f"contexts must have shape (n_arms, {params.dim}), got {contexts_t.shape}"
        )
    return params.thetas @ contexts_t.T


def ranking_from_scores(scores: Sequence[float]) -> tuple[int, ...]:
    """Arms by strictly descending score; exact ties go to the lower index."""
    return tuple(sorted(range(len(scores)), key=lambda j: (-scores[j], j)))


def oracle_matching(
    params: AgentParams, contexts_t: np.ndarray, arm_prefs: Sequence[Sequence[int]]
) -> Matching:
    """Agent-optimal stable matching under the round's true preferences."""
    scores = true_scores(params, contexts_t)
    rankings = [ranking_from_scores(row) for row in scores]
    return gale_shapley(rankings, arm_prefs)


def instantaneous_regret(
    params: AgentParams,
    contexts_t: np.ndarray,
    matching: Sequence[int],
    oracle: Sequence[int],
) -> np.ndarray:
    """Per-agent gap between the oracle match's and the realized match's mean.

    Negative entries mean the agent was matched above its oracle arm (possible
    during forced exploration and under lucky invalid rankings).
    """
    scores = true_scores(params, contexts_t)
    n = params.n_agents
    if len(matching) != n or len(oracle) != n:
        raise ValidationError("matching and oracle must cover every agent")
    agents = np.arange(n)
    return scores[agents, list(oracle)] - scores[agents, list(matching)]


@dataclass(frozen=True)
class GapStats:
    """Per-agent gap structure of one round, relative to the oracle matching.

    ``gaps[i, j]`` is the oracle arm's mean minus arm j's mean for agent i.
    ``delta_min``/``delta_max`` are the smallest positive and the largest gap
    (delta_min is NaN when the agent has no sub-optimal arm). ``cos_phi`` is
    the similarity score against each non-oracle arm; entries are NaN at the
    oracle arm itself and for degenerate pairs (identical contexts), which
    are also reported in ``degenerate_pairs`` as margin violations.
    """

    oracle: Matching
    gaps: np.ndarray
    delta_min: np.ndarray
    delta_max: np.ndarray
    sub_optimal: np.ndarray
    super_optimal: np.ndarray
    cos_phi: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...]


def gap_stats(
    params: AgentParams, contexts_t: np.ndarray, oracle: Sequence[int]
) -> GapStats:
    contexts_t = np.asarray(contexts_t, dtype=float)
    scores = true_scores(params, contexts_t)
    n, k = scores.shape
    if len(oracle) != n:
        raise ValidationError("oracle matching must cover every agent")
    oracle = tuple(int(j) for j in oracle)
    gaps = scores[np.arange(n), list(oracle)][:, None] - scores
    sub = gaps > 0
    sup = gaps < 0
    delta_min = np.array(
        [row[mask].min() if mask.any() else np.nan for row, mask in zip(gaps, sub)]
    )
    delta_max = gaps.max(axis=1)
    cos_phi = np.full((n, k), np.nan)
    degenerate = []
    theta_norms = np.linalg.norm(params.thetas, axis=1)
    for i in range(n):
        x_star = contexts_t[oracle[i]]
        for j in range(k):
            if j == oracle[i]:
                continue
            diff = x_star - contexts_t[j]
            norm = float(np.linalg.norm(diff))
            if norm == 0.0 or theta_norms[i] == 0.0:
                degenerate.append((i, j))
                continue
            cos_phi[i, j] = float(params.thetas[i] @ diff) / (theta_norms[i] * norm)
    return GapStats(
        oracle=oracle,
        gaps=gaps,
        delta_min=delta_min,
        delta_max=delta_max,
        sub_optimal=sub,
        super_optimal=sup,
        cos_phi=cos_phi,
        degenerate_pairs=tuple(degenerate),
    )


def is_valid_ranking(
    ranking: Sequence[int], true_means: Sequence[float], oracle_arm: int
) -> bool:
    """True iff every arm ranked above the oracle arm has a strictly larger mean."""
    k = len(true_means)
    _check_permutation(ranking, k, "ranking")
    if not 0 <= oracle_arm < k:
        raise ValidationError("oracle arm out of range")
    anchor = true_means[oracle_arm]
    for arm in ranking:
        if arm == oracle_arm:
            return True
        if true_means[arm] <= anchor:
            return False
    return True


# Canonical two-agent / three-arm fixture: agent 0 truly prefers
# a0 > a1 > a2, agent 1 truly prefers a1 > a0 > a2, every arm prefers
# agent 0 over agent 1, and agent 1 always submits its correct ranking.
TWO_BY_THREE_TRUE_MEANS = np.array([[0.9, 0.6, 0.3], [0.5, 0.8, 0.2]])
TWO_BY_THREE_ARM_PREFS = ((0, 1), (0, 1), (0, 1))

_CASE_BY_SUBMISSION = {
    (2, 0, 1): 1,
    (2, 1, 0): 2,
    (1, 2, 0): 3,
    (1, 0, 2): 4,
    (0, 2, 1): 5,
    (0, 1, 2): 6,
}


@dataclass(frozen=True)
class TwoByThreeCase:
    case_index: int
    matching: Matching
    regret: np.ndarray
    agent0_suffers: bool
    agent1_suffers: bool


def classify_two_by_three_case(
    submitted: Sequence[int], true_means: np.ndarray | None = None
) -> TwoByThreeCase:
    """Run the canonical 2x3 fixture with agent 0 submitting ``submitted``.

    Returns the case index (1..6) together with the realized matching and the
    sign pattern of the per-agent regret. ``true_means`` may override the
    default score table but must keep the fixture's preference orders.
    """
    _check_permutation(submitted, 3, "submitted ranking")
    means = TWO_BY_THREE_TRUE_MEANS if true_means is None else np.asarray(true_means, float)
    if means.shape != (2, 3):
        raise ValidationError("fixture needs a (2, 3) true-mean table")
    if ranking_from_scores(means[0]) != (0, 1, 2) or ranking_from_scores(means[1]) != (1, 0, 2):
        raise ValidationError("true means must give agent 0: a0>a1>a2 and agent 1: a1>a0>a2")
    params = AgentParams(thetas=means)
    contexts = np.eye(3)
    oracle = oracle_matching(params, contexts, TWO_BY_THREE_ARM_PREFS)
    submitted_rankings = [tuple(submitted), ranking_from_scores(means[1])]
    matching = gale_shapley(submitted_rankings, TWO_BY_THREE_ARM_PREFS)
    regret = instantaneous_regret(params, contexts, matching, oracle)
    return TwoByThreeCase(
        case_index=_CASE_BY_SUBMISSION[tuple(submitted)],
        matching=matching,
        regret=regret,
        agent0_suffers=bool(regret[0] > 0),
        agent1_suffers=bool(regret[1] > 0),
    )


def optimal_change_flags(oracle_seq: Sequence[Sequence[int]]) -> np.ndarray:
    """Boolean flags marking round t when the oracle differs from round t-1."""
    arr = np.asarray(oracle_seq, dtype=int)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValidationError("need oracle matchings for at least two rounds")
    flags = np.zeros(arr.shape[0], dtype=bool)
    flags[1:] = np.any(arr[1:] != arr[:-1], axis=1)
    return flags


@dataclass(frozen=True)
class ReplicationBands:
    """Pointwise envelope over replications; the mean is order-independent."""

    minimum: np.ndarray
    mean: np.ndarray
    maximum: np.ndarray


def aggregate_replications(traces: Sequence[np.ndarray]) -> ReplicationBands:
    """Pointwise min/mean/max over replications of equally shaped traces.

    The mean is accumulated with compensated summation so the output is
    bit-identical under any reordering of the replications.
    """
    if len(traces) < 1:
        raise ValidationError("need at least one trace")
    stacked = np.stack([np.asarray(t, dtype=float) for t in traces])
    flat = stacked.reshape(stacked.shape[0], -1)
    means = np.array([fsum(flat[:, c]) for c in range(flat.shape[1])]) / len(traces)
    return ReplicationBands(
        minimum=stacked.min(axis=0),
        mean=means.reshape(stacked.shape[1:]),
        maximum=stacked.max(axis=0),
    )


@dataclass(frozen=True)
class MarginAudit:
    """Realized margins of an episode versus the configured assumption.

    ``realized_min`` is each agent's smallest positive per-round margin over
    the horizon (NaN if the agent never had a sub-optimal arm);
    ``violations`` counts (round, agent) events where the realized margin
    fell below the configured one; ``degenerate_rounds`` counts rounds with
    an exactly tied or identical-context pair at the oracle arm.
    """

    realized_min: np.ndarray
    violations: np.ndarray
    degenerate_rounds: int


def audit_margin(
    params: AgentParams,
    contexts: np.ndarray,
    arm_prefs: Sequence[Sequence[int]],
    configured_margins: Sequence[float],
) -> MarginAudit:
    """Scan realized contexts for violations of the assumed minimum margin."""
    contexts = np.asarray(contexts, dtype=float)
    if contexts.ndim != 3:
        raise ValidationError("contexts must have shape (horizon, n_arms, dim)")
    margins = np.asarray(configured_margins, dtype=float)
    if margins.shape != (params.n_agents,):
        raise ValidationError("one configured margin per agent is required")
    realized = np.full(params.n_agents, np.nan)
    violations = np.zeros(params.n_agents, dtype=int)
    degenerate_rounds = 0
    for t in range(contexts.shape[0]):
        stats = gap_stats(params, contexts[t], oracle_matching(params, contexts[t], arm_prefs))
        if stats.degenerate_pairs:
            degenerate_rounds += 1
        for i in range(params.n_agents):
            value = stats.delta_min[i]
            if np.isnan(value):
                continue
            if np.isnan(realized[i]) or value < realized[i]:
                realized[i] = value
            if value < margins[i]:
                violations[i] += 1
    return MarginAudit(
        realized_min=realized, violations=violations, degenerate_rounds=degenerate_rounds
    )
