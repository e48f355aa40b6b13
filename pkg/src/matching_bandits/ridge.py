"""Per-agent online ridge regression.

Sufficient statistics are kept explicitly (regularized Gram matrix and the
response-weighted context sum) so a single linear solve at the commit point
reproduces the batch ridge estimate exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

SOLVE_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class RidgeState:
    """Accumulated statistics for one agent.

    ``gram`` is lam * I plus the sum of x x^T over observations; ``xty`` is
    the sum of x * y. The minimum eigenvalue of ``gram`` is at least ``lam``,
    so the state is always solvable.
    """

    gram: np.ndarray
    xty: np.ndarray
    lam: float
    n_obs: int = 0

    @property
    def dim(self) -> int:
        return self.xty.shape[0]


def ridge_init(dim: int, lam: float) -> RidgeState:
    if dim < 1:
        raise ValidationError(f"dimension must be positive, got {dim}")
    if lam <= 0:
        raise ValidationError(f"ridge parameter must be positive, got {lam}")
    return RidgeState(gram=lam * np.eye(dim), xty=np.zeros(dim), lam=float(lam))


def ridge_update(state: RidgeState, x: Sequence[float], y: float) -> RidgeState:
    """Fold one (context, score) observation into the statistics."""
    x = np.asarray(x, dtype=float)
    if x.shape != (state.dim,):
        raise ValidationError(f"context must have shape ({state.dim},), got {x.shape}")
    return RidgeState(
        gram=state.gram + np.outer(x, x),
        xty=state.xty + x * float(y),
        lam=state.lam,
        n_obs=state.n_obs + 1,
    )


def ridge_solve(state: RidgeState) -> np.ndarray:
    """Solve gram @ theta = xty for the current point estimate.

    Equals the batch ridge estimator on the same observations. With zero
    observations the estimate is the zero vector.
    """
    theta = np.linalg.solve(state.gram, state.xty)
    scale = max(1.0, float(np.linalg.norm(state.xty)))
    residual = float(np.linalg.norm(state.gram @ theta - state.xty))
    if residual > SOLVE_RESIDUAL_TOL * scale:
        raise ValidationError(f"ridge solve residual {residual:.3e} exceeds tolerance")
    return theta


def predict_mean(estimate: Sequence[float], x: Sequence[float]) -> float:
    """Predicted mean score <estimate, x>."""
    estimate = np.asarray(estimate, dtype=float)
    x = np.asarray(x, dtype=float)
    if estimate.shape != x.shape:
        raise ValidationError(
            f"estimate shape {estimate.shape} does not match context shape {x.shape}"
        )
    return float(estimate @ x)


def rank_arms(estimate: Sequence[float], contexts: np.ndarray) -> tuple[int, ...]:
    """Arm indices by descending predicted mean; ties go to the lower index."""
    contexts = np.asarray(contexts, dtype=float)
    if contexts.ndim != 2 or contexts.shape[0] < 1:
        raise ValidationError("contexts must be a nonempty (n_arms, dim) array")
    scores = contexts @ np.asarray(estimate, dtype=float)
    return tuple(sorted(range(len(scores)), key=lambda j: (-scores[j], j)))
