"""Ground-truth market environment.

True agent parameters, per-round context generation (fixed Gaussian means,
an angular-drift variant, and i.i.d. uniform contexts), Gaussian score noise,
and the deterministic random-stream layout shared by every consumer.

Random streams: one independent generator per (replication, purpose, arm),
derived from the master seed via ``SeedSequence(master, spawn_key=(rep,
purpose, arm))``. Purpose 0 draws contexts, purpose 1 draws score noise.
Adding replications therefore never perturbs existing ones, and the context
trace of a replication does not depend on the policy being played.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

CONTEXT_STREAM = 0
NOISE_STREAM = 1

FIXED_GAUSSIAN_MEAN = "fixed_gaussian_mean"
ANGULAR_DRIFT_MEAN = "angular_drift_mean"
UNIFORM_IID = "uniform_iid"

_KINDS = (FIXED_GAUSSIAN_MEAN, ANGULAR_DRIFT_MEAN, UNIFORM_IID)

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class AgentParams:
    """True preference weights, one row per agent."""

    thetas: np.ndarray
    positive_weights: bool = False
    unit_norm: bool = False

    def __post_init__(self) -> None:
        thetas = np.asarray(self.thetas, dtype=float)
        if thetas.ndim != 2:
            raise ValidationError("thetas must be an (n_agents, dim) array")
        object.__setattr__(self, "thetas", thetas)
        if self.positive_weights and not np.all(thetas > 0):
            raise ValidationError("positive_weights is set but a coordinate is <= 0")
        if self.unit_norm:
            norms = np.linalg.norm(thetas, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
                raise ValidationError("unit_norm is set but a row is not unit length")

    @property
    def n_agents(self) -> int:
        return self.thetas.shape[0]

    @property
    def dim(self) -> int:
        return self.thetas.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    """Standard deviation of the i.i.d. Gaussian score noise."""

    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValidationError(f"sigma must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class ContextProcess:
    """Per-arm context generator.

    ``fixed_gaussian_mean`` draws N(mean_j, zeta I); ``angular_drift_mean``
    additionally shifts the drifting arm's first mean coordinate by
    drift_rate * t before sampling; ``uniform_iid`` draws each coordinate
    U(0, 1). When ``normalize`` is set, every emitted context is projected to
    the unit sphere after sampling (the drifted mean is renormalized rather
    than wrapped; disable ``normalize`` to see the raw shifted context).
    """

    kind: str
    n_arms: int
    dim: int
    means: np.ndarray | None = None
    zeta: float = 0.0
    drift_rate: float = 0.0
    drift_arm: int = 0
    normalize: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown context kind {self.kind!r}")
        if self.zeta < 0:
            raise ValidationError(f"zeta must be nonnegative, got {self.zeta}")
        if self.n_arms < 1 or self.dim < 1:
            raise ValidationError("n_arms and dim must be positive")
        if self.kind == UNIFORM_IID:
            if self.means is not None:
                raise ValidationError("uniform contexts take no mean vectors")
            return
        means = np.asarray(self.means, dtype=float)
        if means.shape != (self.n_arms, self.dim):
            raise ValidationError(
                f"means must have shape ({self.n_arms}, {self.dim}), got {means.shape}"
            )
        object.__setattr__(self, "means", means)
        if not 0 <= self.drift_arm < self.n_arms:
            raise ValidationError("drift_arm out of range")


def _normalize_rows(block: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(block, axis=-1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return block / safe


def mean_for_round(process: ContextProcess, arm: int, t: int) -> np.ndarray:
    """Pre-noise mean vector of ``arm`` at round ``t`` (1-based)."""
    if process.kind == UNIFORM_IID:
        return np.full(process.dim, 0.5)
    mean = np.array(process.means[arm], dtype=float)
    if process.kind == ANGULAR_DRIFT_MEAN and arm == process.drift_arm:
        mean[0] += process.drift_rate * t
    return mean


def sample_context(
    process: ContextProcess, arm: int, t: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw one context for ``arm`` at round ``t`` (1-based)."""
    if t < 1:
        raise ValidationError(f"rounds are 1-based, got t={t}")
    if process.kind == UNIFORM_IID:
        return rng.random(process.dim)
    draw = mean_for_round(process, arm, t)
    if process.zeta > 0:
        draw = draw + np.sqrt(process.zeta) * rng.standard_normal(process.dim)
    if process.normalize:
        draw = _normalize_rows(draw)
    return draw


def sample_context_block(
    process: ContextProcess, arm: int, horizon: int, rng: np.random.Generator
) -> np.ndarray:
    """Contexts of ``arm`` for rounds 1..horizon, identical to per-round draws."""
    if process.kind == UNIFORM_IID:
        return rng.random((horizon, process.dim))
    rounds = np.arange(1, horizon + 1)
    means = np.tile(process.means[arm], (horizon, 1))
    if process.kind == ANGULAR_DRIFT_MEAN and arm == process.drift_arm:
        means[:, 0] += process.drift_rate * rounds
    noise = rng.standard_normal((horizon, process.dim))
    block = means + np.sqrt(process.zeta) * noise if process.zeta > 0 else means
    if process.normalize:
        block = _normalize_rows(block)
    return block


def context_rng(
    master_seed: int, replication: int, arm: int
) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(replication, CONTEXT_STREAM, arm))
    )


def noise_rng(master_seed: int, replication: int, arm: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(replication, NOISE_STREAM, arm))
    )


def draw_contexts(
    process: ContextProcess, horizon: int, master_seed: int, replication: int
) -> np.ndarray:
    """Full (horizon, n_arms, dim) context tensor for one replication."""
    blocks = [
        sample_context_block(process, arm, horizon, context_rng(master_seed, replication, arm))
        for arm in range(process.n_arms)
    ]
    return np.stack(blocks, axis=1)


def draw_score_noise(
    noise: NoiseModel, n_arms: int, horizon: int, master_seed: int, replication: int
) -> np.ndarray:
    """(horizon, n_arms) noise table; entry (t-1, j) perturbs arm j's score at t."""
    columns = [
        noise.sigma * noise_rng(master_seed, replication, arm).standard_normal(horizon)
        for arm in range(n_arms)
    ]
    return np.stack(columns, axis=1)


def mean_score(params: AgentParams, agent: int, x: Sequence[float]) -> float:
    """True mean score of ``agent`` for a context: <theta_agent, x>."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.dim,):
        raise ValidationError(f"context must have shape ({params.dim},), got {x.shape}")
    return float(params.thetas[agent] @ x)


def sample_score(mu: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    """Noisy score: the true mean plus one Gaussian draw."""
    return float(mu + noise.sigma * rng.standard_normal())


def make_lower_bound_instance(
    dim: int, h_bar: int, sigma: float = 0.05
) -> tuple[AgentParams, ContextProcess, NoiseModel]:
    """Two-agent, three-arm hard instance with uniform i.i.d. contexts.

    Both true parameters share the first coordinate sqrt(1 - 1/h_bar) and put
    1/sqrt(h_bar) on their own private coordinate, so they are unit norm and
    nearly collinear for large h_bar.
    """
    if dim < 3:
        raise ValidationError(f"instance needs dim >= 3, got {dim}")
    if h_bar < 1:
        raise ValidationError(f"h_bar must be positive, got {h_bar}")
    head = np.sqrt(1.0 - 1.0 / h_bar)
    tail = 1.0 / np.sqrt(h_bar)
    thetas = np.zeros((2, dim))
    thetas[0, 0] = head
    thetas[0, 1] = tail
    thetas[1, 0] = head
    thetas[1, 2] = tail
    params = AgentParams(thetas=thetas, unit_norm=True)
    process = ContextProcess(kind=UNIFORM_IID, n_arms=3, dim=dim)
    return params, process, NoiseModel(sigma=sigma)
