"""Exact inference over influence diagrams by full joint enumeration.

Posteriors condition on hard evidence only; clearing evidence reverts a node
to its prior. Expected utility is the probability-weighted sum of utility
entries over each utility node's parent combinations.

Enumeration visits chance nodes in topological order and iterates states in
canonical combination order, so results are bit-stable across runs and do not
depend on node declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .diagram import (
    ChanceNode,
    InfluenceDiagram,
    combination_count,
    topological_order,
)

Evidence = Mapping[str, str]

DEFAULT_STATE_LIMIT = 1_000_000


class InferenceError(Exception):
    """Base class for inference failures."""


class ImpossibleEvidenceError(InferenceError):
    """The observed evidence has probability 0 under the model."""


class StateSpaceLimitError(InferenceError):
    """The joint state space is too large for exact enumeration."""


@dataclass(frozen=True)
class Posterior:
    """Distribution over one node's states given the evidence."""

    node_id: str
    probabilities: Mapping[str, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probabilities", dict(self.probabilities))

    def __getitem__(self, state: str) -> float:
        return self.probabilities[state]


@dataclass(frozen=True)
class InferenceResult:
    posterior: Posterior
    expected_utility: float


@dataclass(frozen=True)
class SensitivityRow:
    """Inference outcome with the varied node pinned to one of its states."""

    state: str
    posterior: Posterior
    expected_utility: float


@dataclass(frozen=True)
class SensitivityResult:
    vary: str
    target_state: str
    rows: tuple[SensitivityRow, ...]
    spread: float


def check_evidence(diagram: InfluenceDiagram, evidence: Evidence) -> None:
    """Raise ValueError naming the valid options when evidence is malformed."""
    for node_id, state in evidence.items():
        node = diagram.chance_node(node_id)  # KeyError lists valid node ids
        if state not in node.scale.states:
            raise ValueError(
                f"unknown state {state!r} for node {node_id!r} "
                f"(valid: {', '.join(node.scale.states)})"
            )


def _check_state_space(diagram: InfluenceDiagram, state_limit: int) -> None:
    if diagram.joint_state_count > state_limit:
        raise StateSpaceLimitError(
            f"model too large for exact enumeration: "
            f"{diagram.joint_state_count} joint states exceeds the limit of {state_limit}"
        )


def _iter_joint(
    diagram: InfluenceDiagram, evidence: Evidence, order: list[str]
) -> Iterator[tuple[dict[str, int], float]]:
    """Yield (state-index assignment, joint weight) for assignments consistent with evidence."""
    nodes: dict[str, ChanceNode] = {n.id: n for n in diagram.chance_nodes}
    plan: list[tuple[str, ChanceNode, tuple[int, ...], list[str], list[int]]] = []
    for nid in order:
        node = nodes[nid]
        if nid in evidence:
            allowed: tuple[int, ...] = (node.scale.index_of(evidence[nid]),)
        else:
            allowed = tuple(range(node.scale.size))
        # strides for the canonical column index: last parent varies fastest
        strides: list[int] = []
        acc = 1
        for p in reversed(node.parents):
            strides.append(acc)
            acc *= nodes[p].scale.size
        strides.reverse()
        plan.append((nid, node, allowed, list(node.parents), strides))

    assignment: dict[str, int] = {}

    def descend(depth: int, weight: float) -> Iterator[tuple[dict[str, int], float]]:
        if depth == len(plan):
            yield assignment, weight
            return
        nid, node, allowed, parents, strides = plan[depth]
        for state_idx in allowed:
            assignment[nid] = state_idx
            if parents:
                column = 0
                for p, stride in zip(parents, strides):
                    column += assignment[p] * stride
                p_state = node.cpt.columns[column][state_idx]
            else:
                p_state = node.prior[node.scale.states[state_idx]]
            yield from descend(depth + 1, weight * p_state)
        del assignment[nid]

    yield from descend(0, 1.0)


def posterior(
    diagram: InfluenceDiagram,
    evidence: Evidence,
    query: str,
    *,
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> Posterior:
    """Exact P(query | evidence), computed by enumerating the full joint."""
    check_evidence(diagram, evidence)
    query_node = diagram.chance_node(query)
    _check_state_space(diagram, state_limit)

    order = topological_order(diagram)
    sums = [0.0] * query_node.scale.size
    for assignment, weight in _iter_joint(diagram, evidence, order):
        sums[assignment[query]] += weight

    normalizer = 0.0
    for s in sums:
        normalizer += s
    if normalizer == 0.0:
        raise ImpossibleEvidenceError(
            f"impossible evidence: {dict(evidence)!r} has probability 0 under the model"
        )
    return Posterior(
        node_id=query,
        probabilities={
            state: sums[i] / normalizer for i, state in enumerate(query_node.scale.states)
        },
    )


def expected_utility(
    diagram: InfluenceDiagram,
    evidence: Evidence,
    *,
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> float:
    """Sum over utility nodes of P(parent combination | evidence) x utility."""
    check_evidence(diagram, evidence)
    _check_state_space(diagram, state_limit)

    order = topological_order(diagram)
    nodes = {n.id: n for n in diagram.chance_nodes}

    tables: list[tuple[tuple[str, ...], list[int], list[float]]] = []
    for unode in diagram.utility_nodes:
        strides: list[int] = []
        acc = 1
        for p in reversed(unode.parents):
            strides.append(acc)
            acc *= nodes[p].scale.size
        strides.reverse()
        marginal = [0.0] * combination_count(diagram.parent_scales(unode.parents))
        tables.append((unode.parents, strides, marginal))

    normalizer = 0.0
    for assignment, weight in _iter_joint(diagram, evidence, order):
        normalizer += weight
        for parents, strides, marginal in tables:
            combo = 0
            for p, stride in zip(parents, strides):
                combo += assignment[p] * stride
            marginal[combo] += weight

    if normalizer == 0.0:
        raise ImpossibleEvidenceError(
            f"impossible evidence: {dict(evidence)!r} has probability 0 under the model"
        )

    total = 0.0
    for unode, (_, _, marginal) in zip(diagram.utility_nodes, tables):
        for combo_index, weight in enumerate(marginal):
            total += (weight / normalizer) * unode.utilities[combo_index]
    return total


def infer(
    diagram: InfluenceDiagram,
    evidence: Evidence,
    query: str,
    *,
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> InferenceResult:
    """Posterior over the query node plus total expected utility, in one call."""
    return InferenceResult(
        posterior=posterior(diagram, evidence, query, state_limit=state_limit),
        expected_utility=expected_utility(diagram, evidence, state_limit=state_limit),
    )


def sensitivity(
    diagram: InfluenceDiagram,
    evidence: Evidence,
    query: str,
    vary: str,
    *,
    target_state: str | None = None,
    state_limit: int = DEFAULT_STATE_LIMIT,
) -> SensitivityResult:
    """One-way what-if sweep: pin ``vary`` to each of its states and re-infer.

    Any existing evidence on ``vary`` is overridden row by row. The spread is
    max - min of P(query = target_state) across the rows; ``target_state``
    defaults to the query node's first state.
    """
    if vary == query:
        raise ValueError("the varied node must differ from the query node")
    vary_node = diagram.chance_node(vary)
    query_node = diagram.chance_node(query)
    target = query_node.scale.states[0] if target_state is None else target_state
    if target not in query_node.scale.states:
        raise ValueError(
            f"unknown target state {target!r} for node {query!r} "
            f"(valid: {', '.join(query_node.scale.states)})"
        )

    rows = []
    for state in vary_node.scale.states:
        pinned = dict(evidence)
        pinned[vary] = state
        rows.append(SensitivityRow(
            state=state,
            posterior=posterior(diagram, pinned, query, state_limit=state_limit),
            expected_utility=expected_utility(diagram, pinned, state_limit=state_limit),
        ))
    targets = [row.posterior[target] for row in rows]
    return SensitivityResult(
        vary=vary,
        target_state=target,
        rows=tuple(rows),
        spread=max(targets) - min(targets),
    )
