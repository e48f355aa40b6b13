"""Experiment configuration: validated market parameters plus scenario glue.

A config is a scenario preset with flat key overrides applied on top. The
JSON file format mirrors the field names, e.g.::

    {"scenario": "s1", "zeta": 0.05, "replications": 100, "master_seed": 7}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from .environment import (
    UNIFORM_IID,
    AgentParams,
    ContextProcess,
    NoiseModel,
    make_lower_bound_instance,
)
from .errors import ValidationError
from .policy import ExplorationPlan, MarketEnvironment, exploration_length
from .scenarios import scenario_defaults


@dataclass
class MarketConfig:
    scenario: str
    n_agents: int
    n_arms: int
    dim: int
    horizon: int
    sigma: float
    zeta: float
    lam: tuple[float, ...]
    delta_min: tuple[float, ...]
    x_max: tuple[float, ...]
    context_kind: str
    means: np.ndarray | None
    thetas: np.ndarray | None
    arm_prefs: tuple[tuple[int, ...], ...]
    normalize_contexts: bool
    drift_rate: float
    drift_arm: int
    replications: int
    master_seed: int
    exploration_rounds: int | None

    @property
    def loop_len(self) -> int:
        return comb(self.n_arms, self.n_agents)


_PER_AGENT_FIELDS = ("lam", "delta_min", "x_max")


def _broadcast(name: str, value, n_agents: int) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return tuple(float(value) for _ in range(n_agents))
    values = tuple(float(v) for v in value)
    if len(values) != n_agents:
        raise ValidationError(f"{name!r} needs one value per agent, got {len(values)}")
    return values


def _materialize_arm_prefs(spec, n_agents: int, n_arms: int) -> tuple[tuple[int, ...], ...]:
    if spec == "global":
        return tuple(tuple(range(n_agents)) for _ in range(n_arms))
    prefs = tuple(tuple(int(i) for i in row) for row in spec)
    if len(prefs) != n_arms:
        raise ValidationError(f"'arm_prefs' needs one list per arm, got {len(prefs)}")
    for j, row in enumerate(prefs):
        if sorted(row) != list(range(n_agents)):
            raise ValidationError(
                f"'arm_prefs' row {j} must be a permutation of 0..{n_agents - 1}"
            )
    return prefs


def make_config(scenario: str = "s1", **overrides) -> MarketConfig:
    """Build a validated config from a preset plus flat key overrides."""
    table = scenario_defaults(scenario)
    for key, value in overrides.items():
        if key == "scenario":
            continue
        if key not in table:
            raise ValidationError(f"unknown config key {key!r}")
        table[key] = value

    n_agents, n_arms = int(table["n_agents"]), int(table["n_arms"])
    if n_agents < 1 or n_arms < n_agents:
        raise ValidationError("'n_agents' must satisfy 1 <= n_agents <= n_arms")
    dim = int(table["dim"])
    if dim < 1:
        raise ValidationError("'dim' must be positive")
    horizon = int(table["horizon"])
    if horizon < comb(n_arms, n_agents):
        raise ValidationError(
            f"'horizon' must be at least C(n_arms, n_agents) = {comb(n_arms, n_agents)}"
        )
    sigma = float(table["sigma"])
    if sigma < 0:
        raise ValidationError("'sigma' must be nonnegative")
    zeta = float(table["zeta"])
    if zeta < 0:
        raise ValidationError("'zeta' must be nonnegative")
    replications = int(table["replications"])
    if replications < 1:
        raise ValidationError("'replications' must be positive")

    kind = table["context_kind"]
    means = table["means"]
    if means is not None:
        means = np.asarray(means, dtype=float)
        if means.shape != (n_arms, dim):
            raise ValidationError(f"'means' must have shape ({n_arms}, {dim})")
    elif kind != UNIFORM_IID and scenario != "lower_bound":
        raise ValidationError(f"context kind {kind!r} requires 'means'")

    exploration_rounds = table["exploration_rounds"]
    if exploration_rounds is not None:
        exploration_rounds = int(exploration_rounds)
        loop = comb(n_arms, n_agents)
        if exploration_rounds < 1 or exploration_rounds % loop:
            raise ValidationError(
                f"'exploration_rounds' must be a positive multiple of {loop}"
            )
        if exploration_rounds > horizon:
            raise ValidationError("'exploration_rounds' exceeds the horizon")

    thetas = table["thetas"]
    if thetas is None:
        if scenario != "lower_bound":
            raise ValidationError("'thetas' is required outside the lower_bound preset")
        if exploration_rounds is None:
            raise ValidationError("lower_bound needs explicit 'exploration_rounds'")
        params, _, _ = make_lower_bound_instance(dim, exploration_rounds)
        thetas = params.thetas
    thetas = np.asarray(thetas, dtype=float)
    if thetas.shape != (n_agents, dim):
        raise ValidationError(f"'thetas' must have shape ({n_agents}, {dim})")

    return MarketConfig(
        scenario=scenario,
        n_agents=n_agents,
        n_arms=n_arms,
        dim=dim,
        horizon=horizon,
        sigma=sigma,
        zeta=zeta,
        lam=_broadcast("lam", table["lam"], n_agents),
        delta_min=_broadcast("delta_min", table["delta_min"], n_agents),
        x_max=_broadcast("x_max", table["x_max"], n_agents),
        context_kind=kind,
        means=means,
        thetas=thetas,
        arm_prefs=_materialize_arm_prefs(table["arm_prefs"], n_agents, n_arms),
        normalize_contexts=bool(table["normalize_contexts"]),
        drift_rate=float(table["drift_rate"]),
        drift_arm=int(table["drift_arm"]),
        replications=replications,
        master_seed=int(table["master_seed"]),
        exploration_rounds=exploration_rounds,
    )


def load_config(path: str | Path) -> MarketConfig:
    """Read a JSON config file: a scenario name plus flat overrides."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    scenario = raw.pop("scenario", "s1")
    return make_config(scenario, **raw)


def build_environment(config: MarketConfig) -> MarketEnvironment:
    """Materialize the ground-truth environment described by a config."""
    process = ContextProcess(
        kind=config.context_kind,
        n_arms=config.n_arms,
        dim=config.dim,
        means=config.means,
        zeta=config.zeta,
        drift_rate=config.drift_rate,
        drift_arm=config.drift_arm,
        normalize=config.normalize_contexts,
    )
    params = AgentParams(thetas=config.thetas)
    return MarketEnvironment(
        params=params,
        process=process,
        noise=NoiseModel(sigma=config.sigma),
        arm_prefs=config.arm_prefs,
        horizon=config.horizon,
    )


def plan_exploration(config: MarketConfig) -> ExplorationPlan:
    """The exploration plan a run of this config will use."""
    if config.exploration_rounds is not None:
        return ExplorationPlan(
            loops=config.exploration_rounds // config.loop_len, loop_len=config.loop_len
        )
    return exploration_length(
        n_agents=config.n_agents,
        n_arms=config.n_arms,
        dim=config.dim,
        horizon=config.horizon,
        sigma=config.sigma,
        lam=config.lam,
        delta_min=config.delta_min,
        x_max=config.x_max,
    )
