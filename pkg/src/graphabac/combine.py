"""Combining algorithms: reduce a match list to one Permit/Deny decision.

All five algorithms are total pure functions and default to Deny on an
empty match list.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .matcher import AccessQuery, PolicyMatch, matching_policies
from .policy import Decision, PolicyStore


class CombiningAlgorithm(enum.Enum):
    DENY_OVERRIDES = "deny-overrides"
    PERMIT_OVERRIDES = "permit-overrides"
    FIRST_APPLICABLE = "first-applicable"
    MAX_SCORE_DENY_OVERRIDES = "max-score-deny-overrides"
    SHORTEST_PATH_DENY_OVERRIDES = "shortest-path-deny-overrides"


ALGORITHM_NAMES = tuple(a.value for a in CombiningAlgorithm)


@dataclass(frozen=True)
class EvaluationResult:
    decision: Decision
    algorithm: CombiningAlgorithm
    matches: tuple[PolicyMatch, ...]
    deciding_policies: tuple[PolicyMatch, ...]


def _deny_overrides(matches: list[PolicyMatch]) -> tuple[Decision, list[PolicyMatch]]:
    if not matches:
        return Decision.DENY, []
    denies = [m for m in matches if m.policy.decision is Decision.DENY]
    if denies:
        return Decision.DENY, denies
    return Decision.PERMIT, list(matches)


def combine(
    q: AccessQuery, matches: list[PolicyMatch], alg: CombiningAlgorithm
) -> EvaluationResult:
    """Pure reduction of an ordered match list to a decision.

    ``matches`` must be in insertion-sequence order, as produced by the
    matcher; first-applicable depends on it.
    """
    restricted = list(matches)
    if alg is CombiningAlgorithm.DENY_OVERRIDES:
        decision, deciding = _deny_overrides(restricted)
    elif alg is CombiningAlgorithm.PERMIT_OVERRIDES:
        permits = [m for m in restricted if m.policy.decision is Decision.PERMIT]
        if permits:
            decision, deciding = Decision.PERMIT, permits
        else:
            decision, deciding = Decision.DENY, restricted
    elif alg is CombiningAlgorithm.FIRST_APPLICABLE:
        if restricted:
            decision, deciding = restricted[0].policy.decision, [restricted[0]]
        else:
            decision, deciding = Decision.DENY, []
    elif alg is CombiningAlgorithm.MAX_SCORE_DENY_OVERRIDES:
        if restricted:
            top = max(m.policy.score for m in restricted)
            restricted = [m for m in restricted if m.policy.score == top]
        decision, deciding = _deny_overrides(restricted)
    elif alg is CombiningAlgorithm.SHORTEST_PATH_DENY_OVERRIDES:
        if restricted:
            shortest = min(m.total_len for m in restricted)
            restricted = [m for m in restricted if m.total_len == shortest]
        decision, deciding = _deny_overrides(restricted)
    else:  # pragma: no cover - sealed enum
        raise ValueError(f"unknown algorithm {alg!r}")
    return EvaluationResult(
        decision=decision,
        algorithm=alg,
        matches=tuple(matches),
        deciding_policies=tuple(deciding),
    )


def evaluate(
    store: PolicyStore,
    q: AccessQuery,
    alg: CombiningAlgorithm = CombiningAlgorithm.DENY_OVERRIDES,
    depth: Optional[int] = None,
) -> EvaluationResult:
    """Match then combine: the full decision pipeline for one query."""
    return combine(q, matching_policies(store, q, depth=depth), alg)
