"""Policy matching over the frozen graph.

Two interchangeable implementations are provided:

* ``matching_policies`` — the production path: three bounded BFS closures
  per query (one per query primitive), then a count-based gate per policy
  slot (a policy survives a slot iff every required reference is inside
  the closure, i.e. satisfied-count equals required-count).
* ``matching_policies_oracle`` — a deliberately independent check that
  evaluates every required condition by exhaustive simple-path
  enumeration.  It exists to cross-validate the production path and is
  O(paths); keep it to small graphs.

Both report, per match, the minimal path length from each query primitive
to the policy (closure hops plus the condition edge).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NotFrozenError, NotMatchingError
from .graph import Graph, HAS_ATTR, NodeRef
from .policy import (
    And,
    ConditionExpr,
    ConditionType,
    Not,
    Or,
    Policy,
    PolicyStore,
    Ref,
    ref_leaves,
)


@dataclass(frozen=True)
class AccessQuery:
    sub: NodeRef
    act: NodeRef
    obj: NodeRef

    def primitive(self, t: ConditionType) -> NodeRef:
        if t is ConditionType.SUB_CON:
            return self.sub
        if t is ConditionType.ACT_CON:
            return self.act
        return self.obj


@dataclass(frozen=True)
class PolicyMatch:
    policy: Policy
    len_sub: int
    len_act: int
    len_obj: int

    @property
    def total_len(self) -> int:
        return self.len_sub + self.len_act + self.len_obj

    def length(self, t: ConditionType) -> int:
        if t is ConditionType.SUB_CON:
            return self.len_sub
        if t is ConditionType.ACT_CON:
            return self.len_act
        return self.len_obj


# -- closure-based evaluation (production path) -----------------------


def is_satisfied(graph: Graph, x: NodeRef, c: NodeRef, depth: int) -> bool:
    """True iff ``c`` is reachable from ``x`` via 0..depth HAS_ATTR hops."""
    return c in graph.attribute_closure(x, depth)


def eval_condition_expr(
    graph: Graph, x: NodeRef, expr: ConditionExpr, depth: int
) -> bool:
    closure = graph.attribute_closure(x, depth)
    return _eval_with_closure(closure, expr)


def _eval_with_closure(closure: dict[NodeRef, int], expr: ConditionExpr) -> bool:
    if isinstance(expr, Ref):
        return expr.node in closure
    if isinstance(expr, Not):
        return not _eval_with_closure(closure, expr.inner)
    if isinstance(expr, And):
        return all(_eval_with_closure(closure, c) for c in expr.children)
    if isinstance(expr, Or):
        return any(_eval_with_closure(closure, c) for c in expr.children)
    raise TypeError(f"unknown expression node {expr!r}")  # pragma: no cover


def _slot_length(
    exprs: frozenset[ConditionExpr], closure: dict[NodeRef, int], depth: int
) -> Optional[int]:
    """Match one condition slot against a precomputed closure.

    Returns the slot's contribution to the policy length, or None when the
    slot fails.  Simple slots use the count gate (satisfied == required);
    compound slots evaluate every expression recursively.  A slot whose
    only satisfied evidence is negative (no true Ref leaf) contributes
    depth + 1, one more than any real path can be.
    """
    refs = [e for e in exprs if isinstance(e, Ref)]
    if len(refs) == len(exprs):
        sat = [e.node for e in refs if e.node in closure]
        if len(sat) != len(refs):
            return None
        return 1 + min(closure[n] for n in sat)
    for e in exprs:
        if not _eval_with_closure(closure, e):
            return None
    hops = [
        closure[leaf.node]
        for e in exprs
        for leaf in ref_leaves(e)
        if leaf.node in closure
    ]
    return 1 + min(hops) if hops else depth + 1


def match_single(
    graph: Graph, policy: Policy, q: AccessQuery, depth: int
) -> Optional[PolicyMatch]:
    if not policy.is_valid_shape():
        return None
    lengths: dict[ConditionType, int] = {}
    for t in ConditionType:
        closure = graph.attribute_closure(q.primitive(t), depth)
        length = _slot_length(policy.conditions[t], closure, depth)
        if length is None:
            return None
        lengths[t] = length
    return PolicyMatch(
        policy=policy,
        len_sub=lengths[ConditionType.SUB_CON],
        len_act=lengths[ConditionType.ACT_CON],
        len_obj=lengths[ConditionType.OBJ_CON],
    )


def matching_policies(
    store: PolicyStore, q: AccessQuery, depth: Optional[int] = None
) -> list[PolicyMatch]:
    """All valid policies matching ``q``, ordered by insertion sequence."""
    graph = store.graph
    if not graph.frozen:
        raise NotFrozenError("freeze the graph before matching")
    if depth is None:
        depth = graph.attr_depth
    closures = {
        t: graph.attribute_closure(q.primitive(t), depth) for t in ConditionType
    }
    out: list[PolicyMatch] = []
    for policy in store.policies():
        if not policy.is_valid_shape():
            continue
        lengths: dict[ConditionType, int] = {}
        for t in ConditionType:
            length = _slot_length(policy.conditions[t], closures[t], depth)
            if length is None:
                break
            lengths[t] = length
        else:
            out.append(
                PolicyMatch(
                    policy=policy,
                    len_sub=lengths[ConditionType.SUB_CON],
                    len_act=lengths[ConditionType.ACT_CON],
                    len_obj=lengths[ConditionType.OBJ_CON],
                )
            )
    return out


def policy_length(
    store: PolicyStore, q: AccessQuery, policy_name: str, depth: Optional[int] = None
) -> int:
    graph = store.graph
    if depth is None:
        depth = graph.attr_depth
    match = match_single(graph, store.get(policy_name), q, depth)
    if match is None:
        raise NotMatchingError(f"policy {policy_name!r} does not match {q}")
    return match.total_len


# -- path-enumeration oracle ------------------------------------------


def _oracle_min_hops(
    graph: Graph, x: NodeRef, c: NodeRef, depth: int
) -> Optional[int]:
    """Minimal length over all simple HAS_ATTR paths x -> c of length <= depth,
    found by exhaustive DFS enumeration (no closure reuse)."""
    best: Optional[int] = None

    def walk(node: NodeRef, hops: int, on_path: set[NodeRef]) -> None:
        nonlocal best
        if node == c:
            if best is None or hops < best:
                best = hops
        if hops == depth:
            return
        for m in graph.out_neighbors(node, HAS_ATTR):
            if m not in on_path:
                on_path.add(m)
                walk(m, hops + 1, on_path)
                on_path.remove(m)

    walk(x, 0, {x})
    return best


def _oracle_eval(graph: Graph, x: NodeRef, expr: ConditionExpr, depth: int) -> bool:
    if isinstance(expr, Ref):
        return _oracle_min_hops(graph, x, expr.node, depth) is not None
    if isinstance(expr, Not):
        return not _oracle_eval(graph, x, expr.inner, depth)
    if isinstance(expr, And):
        return all(_oracle_eval(graph, x, c, depth) for c in expr.children)
    if isinstance(expr, Or):
        return any(_oracle_eval(graph, x, c, depth) for c in expr.children)
    raise TypeError(f"unknown expression node {expr!r}")  # pragma: no cover


def match_single_oracle(
    graph: Graph, policy: Policy, q: AccessQuery, depth: int
) -> Optional[PolicyMatch]:
    if not policy.is_valid_shape():
        return None
    lengths: dict[ConditionType, int] = {}
    for t in ConditionType:
        x = q.primitive(t)
        for expr in policy.conditions[t]:
            if not _oracle_eval(graph, x, expr, depth):
                return None
        hops = [
            h
            for expr in policy.conditions[t]
            for leaf in ref_leaves(expr)
            if (h := _oracle_min_hops(graph, x, leaf.node, depth)) is not None
        ]
        lengths[t] = 1 + min(hops) if hops else depth + 1
    return PolicyMatch(
        policy=policy,
        len_sub=lengths[ConditionType.SUB_CON],
        len_act=lengths[ConditionType.ACT_CON],
        len_obj=lengths[ConditionType.OBJ_CON],
    )


def matching_policies_oracle(
    store: PolicyStore, q: AccessQuery, depth: Optional[int] = None
) -> list[PolicyMatch]:
    graph = store.graph
    if not graph.frozen:
        raise NotFrozenError("freeze the graph before matching")
    if depth is None:
        depth = graph.attr_depth
    out = []
    for policy in store.policies():
        match = match_single_oracle(graph, policy, q, depth)
        if match is not None:
            out.append(match)
    return out
