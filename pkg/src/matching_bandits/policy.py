"""Explore-then-commit matching policy.

Forced cyclic exploration, one-shot ridge estimation at the commit point,
then deferred-acceptance exploitation with frozen estimates. A single
episode is strictly sequential; distinct replications are independent
given the master seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import ceil, comb, log
from typing import Sequence

import numpy as np

from .environment import (
    AgentParams,
    ContextProcess,
    NoiseModel,
    draw_contexts,
    draw_score_noise,
)
from .errors import HorizonTooShortError, MarginAssumptionError, ValidationError
from .matching import gale_shapley
from .regret import (
    instantaneous_regret,
    optimal_change_flags,
    oracle_matching,
    ranking_from_scores,
)
from .ridge import RidgeState, ridge_init, ridge_solve, ridge_update


@dataclass(frozen=True)
class ExplorationPlan:
    """Number of forced-exploration loops and the per-loop round count."""

    loops: int
    loop_len: int

    def __post_init__(self) -> None:
        if self.loops < 1 or self.loop_len < 1:
            raise ValidationError("exploration plan must have positive loops and loop_len")

    @property
    def rounds(self) -> int:
        return self.loops * self.loop_len


def _per_agent(value, n_agents: int, label: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n_agents, float(arr))
    if arr.shape != (n_agents,):
        raise ValidationError(f"{label} must be a scalar or one value per agent")
    return arr


def exploration_length(
    *,
    n_agents: int,
    n_arms: int,
    dim: int,
    horizon: int,
    sigma: float,
    lam,
    delta_min,
    x_max=1.0,
) -> ExplorationPlan:
    """Exploration budget that balances forced-exploration and commit risk.

    Per agent the raw length is
    (2 d^2 x_max^2 sigma^2 / (delta_min^2 lam^2)) * log(T N K lam^2
    delta_min^2 / (d x_max^2 sigma^2)); the plan takes the max over agents,
    rounded up to the next multiple of C(n_arms, n_agents), floored at one
    loop. Agents whose log argument is not above 1 fall back to the floor
    with a warning.
    """
    if n_agents < 1 or n_arms < n_agents:
        raise ValidationError("need 1 <= n_agents <= n_arms")
    if sigma <= 0:
        raise ValidationError("exploration planning requires sigma > 0")
    lam = _per_agent(lam, n_agents, "lam")
    delta_min = _per_agent(delta_min, n_agents, "delta_min")
    x_max = _per_agent(x_max, n_agents, "x_max")
    if np.any(lam <= 0) or np.any(x_max <= 0):
        raise ValidationError("lam and x_max must be positive")
    if np.any(delta_min <= 0):
        raise MarginAssumptionError("delta_min must be strictly positive for every agent")
    loop_len = comb(n_arms, n_agents)
    raw = 0.0
    for i in range(n_agents):
        coeff = 2 * dim**2 * x_max[i] ** 2 * sigma**2 / (delta_min[i] ** 2 * lam[i] ** 2)
        arg = horizon * n_agents * n_arms * lam[i] ** 2 * delta_min[i] ** 2 / (
            dim * x_max[i] ** 2 * sigma**2
        )
        if arg <= 1.0:
            warnings.warn(
                f"agent {i}: exploration log argument {arg:.4g} <= 1, using the "
                f"{loop_len}-round floor",
                stacklevel=2,
            )
            continue
        raw = max(raw, coeff * log(arg))
    loops = max(1, ceil(raw / loop_len))
    plan = ExplorationPlan(loops=loops, loop_len=loop_len)
    if plan.rounds > horizon:
        raise HorizonTooShortError(
            f"exploration needs {plan.rounds} rounds but the horizon is {horizon}"
        )
    return plan


def exploration_assignment(t: int, agent: int, n_agents: int, n_arms: int) -> int:
    """Arm forced on ``agent`` at round ``t`` (1-based) during exploration.

    The assignment cycles so that it is injective across agents at every
    round and each agent sees every arm once per n_arms consecutive rounds.
    """
    if not 1 <= n_agents <= n_arms:
        raise ValidationError("need 1 <= n_agents <= n_arms")
    if not 0 <= agent < n_agents:
        raise ValidationError(f"agent index {agent} out of range")
    if t < 1:
        raise ValidationError(f"rounds are 1-based, got t={t}")
    return (t - 1 + agent) % n_arms


@dataclass(frozen=True)
class MarketEnvironment:
    """Everything the policy needs about the world for one market."""

    params: AgentParams
    process: ContextProcess
    noise: NoiseModel
    arm_prefs: tuple[tuple[int, ...], ...]
    horizon: int

    @property
    def n_agents(self) -> int:
        return self.params.n_agents

    @property
    def n_arms(self) -> int:
        return self.process.n_arms


@dataclass
class EpisodeLog:
    """Complete record of one episode.

    Rounds are 1-based; row t-1 of every per-round array belongs to round t.
    ``assigned`` is injective across agents at every round, the phase is
    exploration exactly for t <= h_bar, and ``estimates`` are frozen at the
    commit point (post-commit scores never feed back into the policy).
    """

    h_bar: int
    assigned: np.ndarray
    scores: np.ndarray
    mean_scores: np.ndarray
    oracle: np.ndarray
    regret: np.ndarray
    optimal_changed: np.ndarray
    contexts: np.ndarray
    estimates: np.ndarray

    @property
    def horizon(self) -> int:
        return self.assigned.shape[0]

    @property
    def n_agents(self) -> int:
        return self.assigned.shape[1]

    def phase(self, t: int) -> str:
        return "explore" if t <= self.h_bar else "exploit"

    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.regret, axis=0)

    def exploration_design(self, agent: int) -> np.ndarray:
        """(h_bar, dim) design matrix of the agent's explored contexts."""
        rows = self.assigned[: self.h_bar, agent]
        return self.contexts[np.arange(self.h_bar), rows]


def run_exploration(
    env: MarketEnvironment,
    plan_rounds: int,
    lam,
    contexts: np.ndarray,
    noise_table: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Forced exploration for rounds 1..plan_rounds.

    Returns (estimates, assigned, scores, mean_scores) where the estimates
    are the one-shot ridge solutions at the commit point.
    """
    n, k = env.n_agents, env.n_arms
    if plan_rounds > env.horizon:
        raise HorizonTooShortError("exploration exceeds the horizon")
    lams = _per_agent(lam, n, "lam")
    states: list[RidgeState] = [ridge_init(env.params.dim, lams[i]) for i in range(n)]
    assigned = np.empty((plan_rounds, n), dtype=int)
    scores = np.empty((plan_rounds, n))
    means = np.empty((plan_rounds, n))
    for t in range(1, plan_rounds + 1):
        for agent in range(n):
            arm = exploration_assignment(t, agent, n, k)
            x = contexts[t - 1, arm]
            mu = float(env.params.thetas[agent] @ x)
            y = mu + noise_table[t - 1, arm]
            states[agent] = ridge_update(states[agent], x, y)
            assigned[t - 1, agent] = arm
            scores[t - 1, agent] = y
            means[t - 1, agent] = mu
    estimates = np.stack([ridge_solve(state) for state in states])
    return estimates, assigned, scores, means


def run_exploitation(
    env: MarketEnvironment,
    estimates: np.ndarray,
    contexts: np.ndarray,
    noise_table: np.ndarray,
    start_round: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deferred-acceptance exploitation for rounds start_round..horizon.

    Every agent ranks arms with its frozen estimate, the platform matches via
    deferred acceptance, and only the resulting scores are logged; nothing
    observed here changes the policy.
    """
    n = env.n_agents
    horizon = env.horizon
    rounds = horizon - start_round + 1
    assigned = np.empty((rounds, n), dtype=int)
    scores = np.empty((rounds, n))
    means = np.empty((rounds, n))
    est_scores = np.einsum("ad,tkd->tak", estimates, contexts[start_round - 1 :])
    for offset in range(rounds):
        rankings = [ranking_from_scores(est_scores[offset, agent]) for agent in range(n)]
        match = gale_shapley(rankings, env.arm_prefs)
        t_index = start_round - 1 + offset
        for agent, arm in enumerate(match):
            mu = float(env.params.thetas[agent] @ contexts[t_index, arm])
            assigned[offset, agent] = arm
            means[offset, agent] = mu
            scores[offset, agent] = mu + noise_table[t_index, arm]
    return assigned, scores, means


def run_episode(
    env: MarketEnvironment,
    plan_rounds: int,
    lam,
    master_seed: int,
    replication: int,
) -> EpisodeLog:
    """One full episode: exploration, commit, exploitation, and accounting."""
    n = env.n_agents
    horizon = env.horizon
    if not 1 <= plan_rounds <= horizon:
        raise HorizonTooShortError(
            f"exploration rounds {plan_rounds} must lie in 1..{horizon}"
        )
    contexts = draw_contexts(env.process, horizon, master_seed, replication)
    noise_table = draw_score_noise(env.noise, env.n_arms, horizon, master_seed, replication)

    assigned = np.empty((horizon, n), dtype=int)
    scores = np.empty((horizon, n))
    means = np.empty((horizon, n))
    estimates, assigned[:plan_rounds], scores[:plan_rounds], means[:plan_rounds] = (
        run_exploration(env, plan_rounds, lam, contexts, noise_table)
    )

    if plan_rounds < horizon:
        ex_assigned, ex_scores, ex_means = run_exploitation(
            env, estimates, contexts, noise_table, plan_rounds + 1
        )
        assigned[plan_rounds:] = ex_assigned
        scores[plan_rounds:] = ex_scores
        means[plan_rounds:] = ex_means

    oracle = np.empty((horizon, n), dtype=int)
    regret = np.empty((horizon, n))
    for t in range(horizon):
        m_bar = oracle_matching(env.params, contexts[t], env.arm_prefs)
        oracle[t] = m_bar
        regret[t] = instantaneous_regret(env.params, contexts[t], assigned[t], m_bar)
    changed = (
        optimal_change_flags(oracle) if horizon >= 2 else np.zeros(horizon, dtype=bool)
    )
    return EpisodeLog(
        h_bar=plan_rounds,
        assigned=assigned,
        scores=scores,
        mean_scores=means,
        oracle=oracle,
        regret=regret,
        optimal_changed=changed,
        contexts=contexts,
        estimates=estimates,
    )
