"""Experiment driver.

Runs seeded replications of a config (optionally on a process pool), writes
the flat per-round CSV and a JSON diagnostics report, and aggregates regret
traces into min/mean/max bands. Identical (config, seed) inputs produce
byte-identical output files regardless of worker count.

CSV schema (one row per round x agent x replication, all ids 1-based)::

    replication,t,agent,phase,assigned_arm,oracle_arm,regret_instant,regret_cum,optimal_changed
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import corollary_constants, invalid_ranking_bound
from .config import MarketConfig, build_environment, plan_exploration
from .errors import ValidationError
from .policy import EpisodeLog, ExplorationPlan, run_episode
from .regret import (
    ReplicationBands,
    aggregate_replications,
    audit_margin,
    is_valid_ranking,
    true_scores,
)
from .ridge import rank_arms

CSV_HEADER = (
    "replication",
    "t",
    "agent",
    "phase",
    "assigned_arm",
    "oracle_arm",
    "regret_instant",
    "regret_cum",
    "optimal_changed",
)


@dataclass(frozen=True)
class ReplicationSummary:
    """Scalars kept per replication after the full log is folded away."""

    replication: int
    final_regret: tuple[float, ...]
    exploit_match_rate: float
    invalid_at_commit: tuple[bool, ...]
    margin_violations: tuple[int, ...]
    realized_margin_min: tuple[float, ...]
    realized_delta_max: tuple[float, ...]
    optimal_changes: int


@dataclass
class ExperimentResult:
    config: MarketConfig
    plan: ExplorationPlan
    bands: ReplicationBands
    summaries: list[ReplicationSummary]
    diagnostics: dict
    csv_path: Path | None = None
    json_path: Path | None = None


def run_replication(config: MarketConfig, replication: int) -> EpisodeLog:
    """One seeded episode of the configured market."""
    env = build_environment(config)
    plan = plan_exploration(config)
    return run_episode(
        env,
        plan.rounds,
        config.lam,
        master_seed=config.master_seed,
        replication=replication,
    )


def summarize_replication(
    config: MarketConfig, replication: int, log: EpisodeLog
) -> ReplicationSummary:
    env = build_environment(config)
    cum = log.cumulative_regret()
    exploit = slice(log.h_bar, log.horizon)
    exploit_rounds = log.horizon - log.h_bar
    if exploit_rounds > 0:
        match_rate = float(
            np.mean(np.all(log.assigned[exploit] == log.oracle[exploit], axis=1))
        )
    else:
        match_rate = float("nan")
    invalid = _invalid_at_first_exploit(config, log)
    audit = audit_margin(env.params, log.contexts, env.arm_prefs, config.delta_min)
    gaps = np.einsum(
        "ad,tkd->tak", env.params.thetas, log.contexts
    )  # (T, N, K) true scores
    oracle_scores = np.take_along_axis(
        gaps, log.oracle[:, :, None], axis=2
    ).squeeze(2)
    delta_max = (oracle_scores[:, :, None] - gaps).max(axis=(0, 2))
    return ReplicationSummary(
        replication=replication,
        final_regret=tuple(float(v) for v in cum[-1]),
        exploit_match_rate=match_rate,
        invalid_at_commit=invalid,
        margin_violations=tuple(int(v) for v in audit.violations),
        realized_margin_min=tuple(float(v) for v in audit.realized_min),
        realized_delta_max=tuple(float(v) for v in delta_max),
        optimal_changes=int(log.optimal_changed.sum()),
    )


def _invalid_at_first_exploit(config: MarketConfig, log: EpisodeLog) -> tuple[bool, ...]:
    """Validity of each agent's submitted ranking at round h_bar + 1."""
    if log.h_bar >= log.horizon:
        return tuple(False for _ in range(log.n_agents))
    t = log.h_bar  # 0-based row of round h_bar + 1
    env = build_environment(config)
    scores = true_scores(env.params, log.contexts[t])
    flags = []
    for agent in range(log.n_agents):
        ranking = rank_arms(log.estimates[agent], log.contexts[t])
        flags.append(
            not is_valid_ranking(ranking, scores[agent], int(log.oracle[t, agent]))
        )
    return tuple(flags)


def _csv_rows(replication: int, log: EpisodeLog):
    cum = log.cumulative_regret()
    for t in range(log.horizon):
        phase = "explore" if t < log.h_bar else "exploit"
        changed = int(bool(log.optimal_changed[t]))
        for agent in range(log.n_agents):
            yield (
                replication + 1,
                t + 1,
                agent + 1,
                phase,
                int(log.assigned[t, agent]) + 1,
                int(log.oracle[t, agent]) + 1,
                repr(float(log.regret[t, agent])),
                repr(float(cum[t, agent])),
                changed,
            )


def static_diagnostics(config: MarketConfig) -> dict:
    """Plan and bound values derivable from the config alone."""
    plan = plan_exploration(config)
    per_agent = []
    for i in range(config.n_agents):
        bound = invalid_ranking_bound(
            h_bar=plan.rounds,
            lam=config.lam[i],
            delta_min=config.delta_min[i],
            dim=config.dim,
            x_max=config.x_max[i],
            sigma=config.sigma,
            n_arms=config.n_arms,
        ) if config.sigma > 0 else None
        constants = corollary_constants(
            dim=config.dim,
            x_max=config.x_max[i],
            sigma=config.sigma,
            lam=config.lam[i],
            delta_min=config.delta_min[i],
            delta_max=1.0,
            n_agents=config.n_agents,
            n_arms=config.n_arms,
        ) if config.sigma > 0 else None
        per_agent.append(
            {
                "invalid_ranking_bound_raw": None if bound is None else bound.raw,
                "invalid_ranking_bound": None if bound is None else bound.clamped,
                "invalid_ranking_bound_vacuous": None if bound is None else bound.vacuous,
                "c1_per_unit_delta_max": None if constants is None else constants.c1,
                "c2": None if constants is None else constants.c2,
            }
        )
    return {
        "scenario": config.scenario,
        "n_agents": config.n_agents,
        "n_arms": config.n_arms,
        "dim": config.dim,
        "horizon": config.horizon,
        "sigma": config.sigma,
        "zeta": config.zeta,
        "loop_len": plan.loop_len,
        "exploration_loops": plan.loops,
        "exploration_rounds": plan.rounds,
        "per_agent": per_agent,
    }


def _pool_worker(args: tuple) -> tuple[int, EpisodeLog, ReplicationSummary]:
    config, replication = args
    log = run_replication(config, replication)
    summary = summarize_replication(config, replication, log)
    return replication, log, summary


def run_experiment(
    config: MarketConfig, out_dir: str | Path | None = None, workers: int = 1
) -> ExperimentResult:
    """Run all replications, aggregate, and (optionally) write output files."""
    if workers < 1:
        raise ValidationError("workers must be positive")
    plan = plan_exploration(config)
    reps = range(config.replications)
    if workers == 1:
        produced = [_pool_worker((config, r)) for r in reps]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            produced = list(pool.map(_pool_worker, [(config, r) for r in reps]))
    produced.sort(key=lambda item: item[0])

    traces = [log.cumulative_regret() for _, log, _ in produced]
    bands = aggregate_replications(traces)
    summaries = [summary for _, _, summary in produced]

    diagnostics = static_diagnostics(config)
    invalid_counts = np.sum([s.invalid_at_commit for s in summaries], axis=0)
    diagnostics["empirical"] = {
        "replications": config.replications,
        "master_seed": config.master_seed,
        "mean_final_regret": [
            float(np.mean([s.final_regret[i] for s in summaries]))
            for i in range(config.n_agents)
        ],
        "exploit_match_rate": float(
            np.mean([s.exploit_match_rate for s in summaries])
        ),
        "invalid_ranking_rate_at_commit": [
            float(invalid_counts[i]) / config.replications
            for i in range(config.n_agents)
        ],
        "margin_violation_rounds": [
            int(np.sum([s.margin_violations[i] for s in summaries]))
            for i in range(config.n_agents)
        ],
        "realized_margin_min": [
            float(np.nanmin([s.realized_margin_min[i] for s in summaries]))
            for i in range(config.n_agents)
        ],
        "realized_delta_max": [
            float(np.max([s.realized_delta_max[i] for s in summaries]))
            for i in range(config.n_agents)
        ],
        "mean_optimal_changes": float(np.mean([s.optimal_changes for s in summaries])),
    }

    csv_path = json_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "results.csv"
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for replication, log, _ in produced:
                writer.writerows(_csv_rows(replication, log))
        json_path = out_dir / "diagnostics.json"
        json_path.write_text(json.dumps(diagnostics, indent=2, sort_keys=True) + "\n")

    return ExperimentResult(
        config=config,
        plan=plan,
        bands=bands,
        summaries=summaries,
        diagnostics=diagnostics,
        csv_path=csv_path,
        json_path=json_path,
    )
