"""Closed-form bound evaluators.

Finite-sample regret upper bound and its optimized-budget constants, the
invalid-ranking probability bound, standard-normal tail sandwich, conditional
moments of the committed ridge estimate, per-pair standardized gaps with the
good/bad ordering-event bounds they feed, and the per-trajectory regret
lower bound for the two-agent/three-arm hard instance.

Probability bounds are returned raw; values outside [0, 1] are vacuous but
kept so callers can see how loose a regime is. Clamping happens at the
reporting layer (and inside the trajectory bound, where a vacuous factor
must contribute zero for the product of lower bounds to stay valid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateCovarianceError,
    OrderingViolationError,
    ValidationError,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(t: float) -> float:
    return math.exp(-0.5 * t * t) / _SQRT_2PI


def gaussian_tail_bounds(t: float) -> tuple[float, float]:
    """Sandwich for P(g >= t), g standard normal, valid for t > 0.

    Returns (lower, upper) = ((1/t - 1/t^3) phi(t), (1/t) phi(t)).
    """
    if t <= 0:
        raise ValidationError(f"tail bounds require t > 0, got {t}")
    pdf = _phi(t)
    return (1.0 / t - 1.0 / t**3) * pdf, pdf / t


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the finite-horizon regret upper bound for one agent."""

    h_bar: int
    lam: float
    delta_min: float
    delta_max_seq: np.ndarray
    dim: int
    x_max: float
    sigma: float
    n_agents: int
    n_arms: int
    horizon: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "delta_max_seq", np.asarray(self.delta_max_seq, dtype=float)
        )
        if min(self.h_bar, self.dim, self.n_agents, self.n_arms, self.horizon) < 1:
            raise ValidationError("counts must be positive")
        if self.lam <= 0 or self.delta_min <= 0 or self.x_max <= 0 or self.sigma <= 0:
            raise ValidationError("lam, delta_min, x_max, and sigma must be positive")
        if self.delta_max_seq.shape != (self.horizon - self.h_bar,):
            raise ValidationError(
                "delta_max_seq must hold one value per post-commit round"
            )


def commit_error_exponent(
    h_bar: int, lam: float, delta_min: float, dim: int, x_max: float, sigma: float
) -> float:
    """Exponent -h_bar lam^2 delta_min^2 / (2 d^2 x_max^2 sigma^2) + log(2d)."""
    return (
        -h_bar * lam**2 * delta_min**2 / (2.0 * dim**2 * x_max**2 * sigma**2)
        + math.log(2.0 * dim)
    )


def regret_upper_bound(inputs: BoundInputs, exploration_gaps: Sequence[float]) -> float:
    """Exploration gap sum plus the exponentially damped post-commit term."""
    exploration_gaps = np.asarray(exploration_gaps, dtype=float)
    if exploration_gaps.shape != (inputs.h_bar,):
        raise ValidationError("need one realized gap per exploration round")
    part_one = float(np.sum(exploration_gaps))
    tail = math.exp(
        commit_error_exponent(
            inputs.h_bar, inputs.lam, inputs.delta_min, inputs.dim, inputs.x_max, inputs.sigma
        )
    )
    part_two = inputs.n_agents * inputs.n_arms * float(np.sum(inputs.delta_max_seq)) * tail
    return part_one + part_two


@dataclass(frozen=True)
class CorollaryConstants:
    """Constants of the optimized-exploration logarithmic bound."""

    c1: float
    c2: float
    delta_max: float

    def bound(self, horizon: float) -> float:
        return self.c1 * math.log(self.c2 * horizon) + self.c1 + self.delta_max


def corollary_constants(
    *,
    dim: int,
    x_max: float,
    sigma: float,
    lam: float,
    delta_min: float,
    delta_max: float,
    n_agents: int,
    n_arms: int,
) -> CorollaryConstants:
    if min(lam, delta_min, x_max, sigma) <= 0:
        raise ValidationError("lam, delta_min, x_max, and sigma must be positive")
    c1 = 2.0 * dim**2 * x_max**2 * sigma**2 * delta_max / (delta_min**2 * lam**2)
    c2 = n_agents * n_arms * lam**2 * delta_min**2 / (dim * x_max**2 * sigma**2)
    return CorollaryConstants(c1=c1, c2=c2, delta_max=delta_max)


@dataclass(frozen=True)
class ProbabilityBound:
    """A bound on a probability, kept raw alongside its reporting clamp."""

    raw: float

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.raw))

    @property
    def vacuous(self) -> bool:
        return not 0.0 <= self.raw <= 1.0


def invalid_ranking_bound(
    h_bar: int,
    lam: float,
    delta_min: float,
    dim: int,
    x_max: float,
    sigma: float,
    n_arms: int,
) -> ProbabilityBound:
    """Upper bound on the chance a committed agent ranks a worse arm above
    its oracle arm at any single post-commit round."""
    if min(lam, delta_min, x_max, sigma) <= 0 or min(h_bar, dim, n_arms) < 1:
        raise ValidationError("all bound inputs must be positive")
    raw = n_arms * math.exp(
        commit_error_exponent(h_bar, lam, delta_min, dim, x_max, sigma)
    )
    return ProbabilityBound(raw=raw)


@dataclass(frozen=True)
class EstimatorMoments:
    """Conditional mean and covariance scale of the committed estimate.

    Given the realized design, the estimate is Gaussian with mean
    ``theta_bar`` and covariance sigma^2 * ``m_matrix``.
    """

    theta_bar: np.ndarray
    m_matrix: np.ndarray


def posterior_moments(
    x_matrix: np.ndarray, lam: float, theta_star: Sequence[float], sigma: float
) -> EstimatorMoments:
    """Moments of the ridge estimate conditioned on the design ``x_matrix``.

    ``sigma`` scales the covariance as sigma^2 * m_matrix; it is validated
    here and applied by consumers.
    """
    x_matrix = np.asarray(x_matrix, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    if x_matrix.ndim != 2 or x_matrix.shape[1] != theta_star.shape[0]:
        raise ValidationError("design matrix columns must match theta_star")
    if lam <= 0:
        raise ValidationError("lam must be positive")
    if sigma < 0:
        raise ValidationError("sigma must be nonnegative")
    gram = x_matrix.T @ x_matrix
    reg_inv = np.linalg.inv(gram + lam * np.eye(gram.shape[0]))
    shrink = reg_inv @ gram
    return EstimatorMoments(theta_bar=shrink @ theta_star, m_matrix=shrink @ reg_inv)


@dataclass(frozen=True)
class PairGap:
    """Standardized mean gap of one ordered arm pair."""

    var_sum: float
    var_diff: float
    nu: float
    nu_tilde: float


@dataclass(frozen=True)
class EventNus:
    """Standardized gaps for the three ordered pairs of a preference triple.

    Pair keys follow the true order (best, middle, worst) = (j1, j2, j3):
    ``top_mid`` is (j1, j2), ``top_low`` is (j1, j3), ``mid_low`` is (j2, j3).
    """

    top_mid: PairGap
    top_low: PairGap
    mid_low: PairGap


def _pair_gap(
    theta_bar: np.ndarray,
    m_matrix: np.ndarray,
    x_a: np.ndarray,
    x_b: np.ndarray,
    sigma: float,
    literal_variance_scaling: bool,
) -> PairGap:
    qa = float(x_a @ m_matrix @ x_a)
    qb = float(x_b @ m_matrix @ x_b)
    qab = float(x_a @ m_matrix @ x_b)
    var_sum = sigma**2 * (qa + qb)
    var_diff = sigma**2 * (qa + qb - 2.0 * qab)
    if var_sum <= 0 or var_diff <= 0:
        raise DegenerateCovarianceError(
            f"variance terms must be positive, got sum={var_sum:.3e} diff={var_diff:.3e}"
        )
    gap = float(theta_bar @ (x_a - x_b))
    if literal_variance_scaling:
        return PairGap(var_sum, var_diff, gap / var_sum, gap / var_diff)
    return PairGap(var_sum, var_diff, gap / math.sqrt(var_sum), gap / math.sqrt(var_diff))


def event_nus(
    moments: EstimatorMoments,
    contexts_t: np.ndarray,
    sigma: float,
    triple: Sequence[int],
    *,
    literal_variance_scaling: bool = False,
) -> EventNus:
    """Standardized gaps for a round's true preference triple j1 > j2 > j3.

    By default gaps are divided by the standard deviation of the estimated
    score difference, which is what the normal tail bounds require;
    ``literal_variance_scaling`` divides by the variance instead, for audit.
    """
    contexts_t = np.asarray(contexts_t, dtype=float)
    if len(triple) != 3 or len(set(triple)) != 3:
        raise ValidationError("triple must be three distinct arm indices")
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    j1, j2, j3 = triple
    x1, x2, x3 = contexts_t[j1], contexts_t[j2], contexts_t[j3]
    args = (moments.theta_bar, moments.m_matrix)
    return EventNus(
        top_mid=_pair_gap(*args, x1, x2, sigma, literal_variance_scaling),
        top_low=_pair_gap(*args, x1, x3, sigma, literal_variance_scaling),
        mid_low=_pair_gap(*args, x2, x3, sigma, literal_variance_scaling),
    )


def good_event_lower_bound(nus: EventNus) -> float:
    """Raw lower bound on the chance the full estimated order is correct."""
    values = (nus.top_mid.nu, nus.top_low.nu, nus.mid_low.nu)
    if any(v <= 0 for v in values):
        raise OrderingViolationError(
            "good-event bound needs positive standardized gaps for all pairs"
        )
    return 1.0 - sum(_phi(v) / v for v in values)


def bad_event_lower_bound(nus: EventNus) -> float:
    """Raw lower bound on the chance the estimated order is wrong.

    Uses the adjacent pairs (top, mid) and (mid, low); a standardized gap at
    or below 1 makes the corresponding tail term nonpositive (vacuous), and
    the raw value is returned as is.
    """
    terms = []
    for value in (nus.top_mid.nu_tilde, nus.mid_low.nu_tilde):
        if value == 0:
            return -math.inf
        terms.append((1.0 / value - 1.0 / value**3) * _phi(value))
    return min(terms)


@dataclass(frozen=True)
class TrajectoryLowerBound:
    """Per-trajectory regret lower bound, split by phase.

    ``vacuous_rounds`` counts post-commit rounds whose event bounds clamped
    to zero (they contribute nothing to the exploitation part).
    """

    exploration_part: float
    exploitation_part: float
    vacuous_rounds: int

    @property
    def total(self) -> float:
        return self.exploration_part + self.exploitation_part


def trajectory_round_term(
    delta_min_t: float, bad_self: float, bad_other: float, good_other: float
) -> float:
    """Per-round lower-bound contribution for the tracked agent."""
    return delta_min_t * (bad_self * bad_other + good_other * bad_self)


def lower_bound_trajectory(
    *,
    thetas: np.ndarray,
    contexts: np.ndarray,
    assigned: np.ndarray,
    oracle: np.ndarray,
    h_bar: int,
    lam,
    sigma: float,
    agent: int = 0,
    literal_variance_scaling: bool = False,
) -> TrajectoryLowerBound:
    """Evaluate the trajectory regret lower bound for one realized episode.

    Requires the two-agent, three-arm instance. The exploration part is the
    realized gap sum of the tracked agent; each post-commit round adds the
    minimum oracle gap times a product of good/bad ordering-event bounds
    evaluated at the realized contexts, with vacuous factors clamped to zero
    (any probability is at least zero, so the product stays a lower bound).
    """
    thetas = np.asarray(thetas, dtype=float)
    contexts = np.asarray(contexts, dtype=float)
    if thetas.shape[0] != 2 or contexts.shape[1] != 3:
        raise ValidationError("trajectory bound is defined for 2 agents and 3 arms")
    horizon = contexts.shape[0]
    if not 1 <= h_bar <= horizon:
        raise ValidationError("h_bar must lie within the horizon")
    lams = np.asarray(lam, dtype=float)
    if lams.ndim == 0:
        lams = np.full(2, float(lams))

    moments = [
        posterior_moments(
            contexts[np.arange(h_bar), assigned[:h_bar, i]], lams[i], thetas[i], sigma
        )
        for i in range(2)
    ]

    true_score = np.einsum("ad,tkd->tak", thetas, contexts)
    exploration_part = float(
        sum(
            true_score[t, agent, oracle[t, agent]]
            - true_score[t, agent, assigned[t, agent]]
            for t in range(h_bar)
        )
    )

    # per-round tables: expected estimated scores and quadratic forms x^T M x'
    bar_score = np.stack(
        [contexts @ moments[i].theta_bar for i in range(2)], axis=1
    )  # (T, 2, K)
    quad = np.stack(
        [
            np.einsum("tkd,de,tle->tkl", contexts, moments[i].m_matrix, contexts)
            for i in range(2)
        ],
        axis=1,
    )  # (T, 2, K, K)

    other = 1 - agent
    exploitation_part = 0.0
    vacuous = 0
    for t in range(h_bar, horizon):
        own_scores = true_score[t, agent]
        delta_min_t = float(
            min(
                own_scores[oracle[t, agent]] - own_scores[j]
                for j in range(3)
                if j != oracle[t, agent]
            )
        )
        factors = {}
        for who in (agent, other):
            triple = sorted(range(3), key=lambda j: (-true_score[t, who, j], j))
            nus = _event_nus_from_tables(
                bar_score[t, who], quad[t, who], sigma, triple, literal_variance_scaling
            )
            if nus is None:
                factors[who] = (0.0, 0.0)
                continue
            try:
                good = max(0.0, good_event_lower_bound(nus))
            except OrderingViolationError:
                good = 0.0
            bad = max(0.0, bad_event_lower_bound(nus))
            factors[who] = (good, bad)
        good_other = factors[other][0]
        bad_self = factors[agent][1]
        bad_other = factors[other][1]
        term = trajectory_round_term(delta_min_t, bad_self, bad_other, good_other)
        if term <= 0.0:
            vacuous += 1
            continue
        exploitation_part += term
    return TrajectoryLowerBound(
        exploration_part=exploration_part,
        exploitation_part=exploitation_part,
        vacuous_rounds=vacuous,
    )


def _pair_from_tables(
    bar_score_t: np.ndarray,
    quad_t: np.ndarray,
    sigma: float,
    a: int,
    b: int,
    literal: bool,
) -> PairGap | None:
    var_sum = sigma**2 * (quad_t[a, a] + quad_t[b, b])
    var_diff = sigma**2 * (quad_t[a, a] + quad_t[b, b] - 2.0 * quad_t[a, b])
    if var_sum <= 0 or var_diff <= 0:
        return None
    gap = float(bar_score_t[a] - bar_score_t[b])
    if literal:
        return PairGap(var_sum, var_diff, gap / var_sum, gap / var_diff)
    return PairGap(
        var_sum, var_diff, gap / math.sqrt(var_sum), gap / math.sqrt(var_diff)
    )


def _event_nus_from_tables(
    bar_score_t: np.ndarray,
    quad_t: np.ndarray,
    sigma: float,
    triple: Sequence[int],
    literal: bool,
) -> EventNus | None:
    """Table-driven equivalent of :func:`event_nus` for the trajectory loop."""
    j1, j2, j3 = triple
    top_mid = _pair_from_tables(bar_score_t, quad_t, sigma, j1, j2, literal)
    top_low = _pair_from_tables(bar_score_t, quad_t, sigma, j1, j3, literal)
    mid_low = _pair_from_tables(bar_score_t, quad_t, sigma, j2, j3, literal)
    if top_mid is None or top_low is None or mid_low is None:
        return None
    return EventNus(top_mid=top_mid, top_low=top_low, mid_low=mid_low)
