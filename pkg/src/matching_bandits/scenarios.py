"""Named scenario presets.

Every preset constant lives here, never in engine logic, and any field can
be overridden through the config layer. The s4/s5 parameter vectors are
generated once from a fixed preset seed (independent of the experiment
master seed) so the presets are true constants.
"""

from __future__ import annotations

import numpy as np

from .environment import ANGULAR_DRIFT_MEAN, FIXED_GAUSSIAN_MEAN, UNIFORM_IID
from .errors import ValidationError

_PRESET_SEED = 83231

S1_MEANS = ((0.667, 0.745), (0.745, 0.667), (0.994, 0.110))
S1_THETAS = ((0.530, 0.848), (0.894, 0.447))
# per-arm agent preference lists, most preferred first
S1_ARM_PREFS = ((0, 1), (1, 0), (0, 1))

LOWER_BOUND_EXPLORATION_ROUNDS = 60


def _unit_positive(rng: np.random.Generator, rows: int, dim: int) -> tuple:
    """Random strictly positive unit-norm rows (coordinates in (0.05, 1])."""
    block = 0.05 + 0.95 * rng.random((rows, dim))
    block /= np.linalg.norm(block, axis=1, keepdims=True)
    return tuple(tuple(float(v) for v in row) for row in block)


def _generated_vectors(tag: int, rows: int, dim: int) -> tuple:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=_PRESET_SEED, spawn_key=(tag,)))
    return _unit_positive(rng, rows, dim)


def scenario_defaults(name: str) -> dict:
    """Full config-field dictionary for a named preset."""
    base = {
        "scenario": name,
        "n_agents": 2,
        "n_arms": 3,
        "dim": 2,
        "horizon": 1000,
        "sigma": 0.05,
        "zeta": 0.01,
        "lam": 0.1,
        "delta_min": 0.2,
        "x_max": 1.0,
        "context_kind": FIXED_GAUSSIAN_MEAN,
        "means": S1_MEANS,
        "thetas": S1_THETAS,
        "arm_prefs": S1_ARM_PREFS,
        "normalize_contexts": True,
        "drift_rate": 0.0,
        "drift_arm": 0,
        "replications": 100,
        "master_seed": 0,
        "exploration_rounds": None,
    }
    if name == "s1":
        return base
    if name == "s2":
        base.update(context_kind=ANGULAR_DRIFT_MEAN, drift_rate=0.005, zeta=0.2)
        return base
    if name == "s3":
        base.update(
            context_kind=ANGULAR_DRIFT_MEAN,
            drift_rate=0.005,
            zeta=0.1,
            delta_min=0.05,
            horizon=5000,
        )
        return base
    if name == "s4":
        base.update(
            dim=10,
            horizon=10000,
            means=_generated_vectors(40, 3, 10),
            thetas=_generated_vectors(41, 2, 10),
            arm_prefs="global",
        )
        return base
    if name == "s5":
        base.update(
            n_agents=5,
            n_arms=5,
            dim=5,
            horizon=15000,
            delta_min=0.1,
            means=_generated_vectors(50, 5, 5),
            thetas=_generated_vectors(51, 5, 5),
            arm_prefs="global",
        )
        return base
    if name == "lower_bound":
        base.update(
            dim=3,
            horizon=2000,
            context_kind=UNIFORM_IID,
            means=None,
            thetas=None,  # derived from dim and exploration_rounds at build time
            arm_prefs="global",
            delta_min=0.05,
            normalize_contexts=False,
            zeta=0.0,
            replications=200,
            exploration_rounds=LOWER_BOUND_EXPLORATION_ROUNDS,
        )
        return base
    raise ValidationError(
        f"unknown scenario {name!r}; known: s1, s2, s3, s4, s5, lower_bound"
    )


def list_scenarios() -> dict[str, dict]:
    """Every preset's full parameter table, in a JSON-friendly form."""
    names = ("s1", "s2", "s3", "s4", "s5", "lower_bound")
    out = {}
    for name in names:
        table = scenario_defaults(name)
        out[name] = table
    # studied sweep values, for reference alongside the single-value defaults
    out["s1"]["zeta_levels"] = (0.01, 0.05, 0.1, 0.2)
    out["s2"]["sigma_levels"] = (0.01, 0.02, 0.05)
    out["s3"]["sigma_levels"] = (0.01, 0.02, 0.05)
    return out
