"""Deterministic two-sided matching.

Agent-proposing deferred acceptance, blocking-pair detection, and a
brute-force enumerator of all stable matchings (used as a test oracle).

Conventions: agents and arms are 0-based indices. A ranking is a sequence of
arm indices ordered most-preferred first; an arm preference is a sequence of
agent indices ordered most-preferred first. A matching is a tuple mapping
agent index to arm index and is injective (requires n_agents <= n_arms).
All functions are pure.
"""

from __future__ import annotations

from collections import deque
from itertools import permutations
from typing import Sequence

from .errors import CapacityError, ValidationError

Matching = tuple[int, ...]

MAX_ENUMERATION_ARMS = 6


def _check_permutation(seq: Sequence[int], size: int, label: str) -> None:
    if len(seq) != size or sorted(seq) != list(range(size)):
        raise ValidationError(
            f"{label} must be a permutation of 0..{size - 1}, got {list(seq)}"
        )


def _validate_market(
    rankings: Sequence[Sequence[int]], arm_prefs: Sequence[Sequence[int]]
) -> tuple[int, int]:
    n, k = len(rankings), len(arm_prefs)
    if n < 1 or k < 1:
        raise ValidationError("need at least one agent and one arm")
    if n > k:
        raise ValidationError(f"{n} agents cannot be injectively matched to {k} arms")
    for i, ranking in enumerate(rankings):
        _check_permutation(ranking, k, f"ranking of agent {i}")
    for j, pref in enumerate(arm_prefs):
        _check_permutation(pref, n, f"preference list of arm {j}")
    return n, k


def _check_matching(matching: Sequence[int], n: int, k: int) -> None:
    if len(matching) != n:
        raise ValidationError(f"matching must assign all {n} agents")
    if any(not 0 <= j < k for j in matching):
        raise ValidationError("matching assigns an unknown arm index")
    if len(set(matching)) != n:
        raise ValidationError("matching must be injective")


def gale_shapley(
    rankings: Sequence[Sequence[int]], arm_prefs: Sequence[Sequence[int]]
) -> Matching:
    """Agent-proposing deferred acceptance.

    Free agents propose round-robin in ascending index order, each to the best
    arm it has not proposed to yet; an arm always keeps the proposer it ranks
    highest. The result is stable for the submitted preferences and
    agent-optimal among all stable matchings. The proposal order does not
    affect the outcome; fixing it keeps traces byte-reproducible.
    """
    n, _ = _validate_market(rankings, arm_prefs)
    arm_rank = [{i: r for r, i in enumerate(pref)} for pref in arm_prefs]
    next_choice = [0] * n
    holder: dict[int, int] = {}
    matched: list[int | None] = [None] * n
    free = deque(range(n))
    while free:
        agent = free.popleft()
        arm = rankings[agent][next_choice[agent]]
        next_choice[agent] += 1
        current = holder.get(arm)
        if current is None:
            holder[arm] = agent
            matched[agent] = arm
        elif arm_rank[arm][agent] < arm_rank[arm][current]:
            holder[arm] = agent
            matched[agent] = arm
            matched[current] = None
            free.append(current)
        else:
            free.append(agent)
    # n <= k with complete lists guarantees every agent ends up matched
    return tuple(matched)  # type: ignore[arg-type]


def find_blocking_pairs(
    matching: Sequence[int],
    rankings: Sequence[Sequence[int]],
    arm_prefs: Sequence[Sequence[int]],
) -> list[tuple[int, int]]:
    """All (agent, arm) pairs that would jointly defect from ``matching``.

    A pair blocks when the agent strictly prefers the arm over its assigned
    match and the arm is unmatched or strictly prefers the agent over its
    current partner. An empty result means the matching is stable.
    """
    n, k = _validate_market(rankings, arm_prefs)
    _check_matching(matching, n, k)
    agent_pos = [{j: r for r, j in enumerate(ranking)} for ranking in rankings]
    arm_rank = [{i: r for r, i in enumerate(pref)} for pref in arm_prefs]
    partner: list[int | None] = [None] * k
    for agent, arm in enumerate(matching):
        partner[arm] = agent
    pairs = []
    for agent in range(n):
        own = agent_pos[agent][matching[agent]]
        for arm in range(k):
            if agent_pos[agent][arm] >= own:
                continue
            current = partner[arm]
            if current is None or arm_rank[arm][agent] < arm_rank[arm][current]:
                pairs.append((agent, arm))
    return pairs


def enumerate_stable_matchings(
    rankings: Sequence[Sequence[int]], arm_prefs: Sequence[Sequence[int]]
) -> list[Matching]:
    """Every stable matching, by exhaustive search over injective assignments.

    Returned in lexicographic order of the agent->arm tuple. Guarded to small
    markets; the intended use is cross-checking ``gale_shapley``.
    """
    n, k = _validate_market(rankings, arm_prefs)
    if k > MAX_ENUMERATION_ARMS:
        raise CapacityError(
            f"enumeration supports at most {MAX_ENUMERATION_ARMS} arms, got {k}"
        )
    return [
        candidate
        for candidate in permutations(range(k), n)
        if not find_blocking_pairs(candidate, rankings, arm_prefs)
    ]
