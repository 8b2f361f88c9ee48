"""Influence-diagram data model: chance nodes with CPTs, utility nodes, validation.

Diagrams are immutable value objects. Construction is permissive; structural
problems are reported by :func:`validate` as a deterministic list of
violations rather than raised piecemeal, so authoring tools can show a full
report.

Parent-state combinations are enumerated in a single canonical order used
everywhere (CPT columns, utility tables, file formats): parents in their
declared order, with the *last* declared parent's state varying fastest
(odometer order).
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

PROBABILITY_TOLERANCE = 1e-9


class DiagramError(Exception):
    """A structural defect that prevents an operation (e.g. a cycle)."""


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate`."""

    node_id: str
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.node_id}: {self.kind}: {self.message}"


@dataclass(frozen=True)
class OutcomeScale:
    """Ordered discrete states of a chance node, optionally mapped to numbers in [0, 1]."""

    states: tuple[str, ...]
    numeric_values: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        if self.numeric_values is not None:
            object.__setattr__(self, "numeric_values", dict(self.numeric_values))

    @property
    def size(self) -> int:
        return len(self.states)

    def index_of(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise KeyError(
                f"unknown state {state!r} (valid: {', '.join(self.states)})"
            ) from None


@dataclass(frozen=True)
class CptTable:
    """Conditional distribution of a child's states, one column per parent-state combination.

    ``columns[i]`` is the distribution over ``child_states`` for the i-th
    parent combination in canonical order.
    """

    child_states: tuple[str, ...]
    parent_ids: tuple[str, ...]
    columns: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "child_states", tuple(self.child_states))
        object.__setattr__(self, "parent_ids", tuple(self.parent_ids))
        object.__setattr__(self, "columns", tuple(tuple(c) for c in self.columns))

    def column(self, index: int) -> tuple[float, ...]:
        return self.columns[index]


@dataclass(frozen=True)
class ChanceNode:
    """Discrete random variable; carries a prior when it has no parents, a CPT otherwise."""

    id: str
    label: str
    scale: OutcomeScale
    parents: tuple[str, ...] = ()
    cpt: CptTable | None = None
    prior: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        if self.prior is not None:
            object.__setattr__(self, "prior", dict(self.prior))


@dataclass(frozen=True)
class UtilityNode:
    """Maps each combination of its parents' states to a real-valued outcome (currency units)."""

    id: str
    label: str
    parents: tuple[str, ...]
    utilities: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "utilities", tuple(float(u) for u in self.utilities))


@dataclass(frozen=True)
class InfluenceDiagram:
    """A DAG of chance nodes plus utility nodes hanging off them."""

    chance_nodes: tuple[ChanceNode, ...]
    utility_nodes: tuple[UtilityNode, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "chance_nodes", tuple(self.chance_nodes))
        object.__setattr__(self, "utility_nodes", tuple(self.utility_nodes))

    def chance_node(self, node_id: str) -> ChanceNode:
        for node in self.chance_nodes:
            if node.id == node_id:
                return node
        raise KeyError(
            f"unknown chance node {node_id!r} "
            f"(valid: {', '.join(sorted(n.id for n in self.chance_nodes))})"
        )

    def has_chance_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.chance_nodes)

    def parent_scales(self, parents: Sequence[str]) -> list[OutcomeScale]:
        return [self.chance_node(p).scale for p in parents]

    @property
    def joint_state_count(self) -> int:
        total = 1
        for node in self.chance_nodes:
            total *= node.scale.size
        return total


# --- canonical parent-combination enumeration ---------------------------------

def combination_count(scales: Sequence[OutcomeScale]) -> int:
    total = 1
    for scale in scales:
        total *= scale.size
    return total


def enumerate_combinations(scales: Sequence[OutcomeScale]) -> Iterator[tuple[str, ...]]:
    """Yield parent-state combinations in canonical order (last scale fastest)."""
    return itertools.product(*(scale.states for scale in scales))


def combination_index(combo: Sequence[str], scales: Sequence[OutcomeScale]) -> int:
    """Canonical index of a combination; inverse of :func:`combination_at`."""
    if len(combo) != len(scales):
        raise ValueError(f"combination has {len(combo)} states, expected {len(scales)}")
    index = 0
    for state, scale in zip(combo, scales):
        index = index * scale.size + scale.index_of(state)
    return index


def combination_at(index: int, scales: Sequence[OutcomeScale]) -> tuple[str, ...]:
    """Combination at a canonical index; inverse of :func:`combination_index`."""
    total = combination_count(scales)
    if not 0 <= index < total:
        raise IndexError(f"combination index {index} out of range [0, {total})")
    digits: list[str] = []
    for scale in reversed(scales):
        index, rem = divmod(index, scale.size)
        digits.append(scale.states[rem])
    return tuple(reversed(digits))


# --- validation ----------------------------------------------------------------

def _scale_violations(node_id: str, scale: OutcomeScale) -> list[Violation]:
    found = []
    if len(scale.states) < 2:
        found.append(Violation(node_id, "scale", f"needs at least 2 states, has {len(scale.states)}"))
    if len(set(scale.states)) != len(scale.states):
        found.append(Violation(node_id, "scale", "state names are not unique"))
    if any(not s for s in scale.states):
        found.append(Violation(node_id, "scale", "state names must be non-empty"))
    if scale.numeric_values is not None:
        missing = [s for s in scale.states if s not in scale.numeric_values]
        if missing:
            found.append(Violation(
                node_id, "numeric-values", f"no numeric value for states: {', '.join(missing)}"))
        bad = [s for s, v in scale.numeric_values.items() if not 0.0 <= v <= 1.0]
        if bad:
            found.append(Violation(
                node_id, "numeric-values", f"values outside [0, 1] for states: {', '.join(sorted(bad))}"))
    return found


def _distribution_violations(node_id: str, kind_prefix: str, where: str,
                             states: Sequence[str], values: Sequence[float]) -> list[Violation]:
    found = []
    if any(not 0.0 <= v <= 1.0 for v in values):
        found.append(Violation(node_id, f"{kind_prefix}-range", f"{where} has entries outside [0, 1]"))
    total = 0.0
    for v in values:
        total += v
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        deficit = 1.0 - total
        found.append(Violation(
            node_id, f"{kind_prefix}-normalization",
            f"{where} sums to {total:.12g} (deficit {deficit:.12g})"))
    return found


def _cycle_components(parents_of: Mapping[str, Sequence[str]]) -> list[list[str]]:
    """Strongly connected components that contain a cycle, as sorted id lists.

    Iterative Tarjan over the parent->child direction; a component counts as
    cyclic when it has more than one node or a self-loop.
    """
    children: dict[str, list[str]] = {nid: [] for nid in parents_of}
    for nid, parents in parents_of.items():
        for p in parents:
            if p in children:
                children[p].append(nid)

    index_of: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = itertools.count()
    components: list[list[str]] = []

    for root in sorted(parents_of):
        if root in index_of:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, child_pos = work.pop()
            if child_pos == 0:
                index_of[node] = lowlink[node] = next(counter)
                stack.append(node)
                on_stack.add(node)
            advanced = False
            kids = children[node]
            while child_pos < len(kids):
                kid = kids[child_pos]
                child_pos += 1
                if kid not in index_of:
                    work.append((node, child_pos))
                    work.append((kid, 0))
                    advanced = True
                    break
                if kid in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[kid])
            if advanced:
                continue
            if lowlink[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in children[node]:
                    components.append(sorted(component))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return sorted(components)


def validate(diagram: InfluenceDiagram) -> list[Violation]:
    """Check every structural invariant; returns all violations, sorted (node id, kind)."""
    found: list[Violation] = []

    seen: set[str] = set()
    all_nodes: list[tuple[str, str]] = [(n.id, "chance") for n in diagram.chance_nodes]
    all_nodes += [(n.id, "utility") for n in diagram.utility_nodes]
    for node_id, _ in all_nodes:
        if node_id in seen:
            found.append(Violation(node_id, "duplicate-id", "node id used more than once"))
        seen.add(node_id)

    chance_ids = {n.id for n in diagram.chance_nodes}

    def check_parents(node_id: str, parents: Sequence[str]) -> bool:
        ok = True
        for p in parents:
            if p not in chance_ids:
                found.append(Violation(
                    node_id, "unknown-parent", f"parent {p!r} is not a chance node"))
                ok = False
        return ok

    for node in diagram.chance_nodes:
        found.extend(_scale_violations(node.id, node.scale))
        parents_ok = check_parents(node.id, node.parents)
        if not node.parents:
            if node.prior is None:
                found.append(Violation(node.id, "missing-prior", "root node has no prior"))
            else:
                extra = set(node.prior) - set(node.scale.states)
                missing = [s for s in node.scale.states if s not in node.prior]
                if extra or missing:
                    found.append(Violation(
                        node.id, "prior-states",
                        f"prior states do not match the scale "
                        f"(missing: {', '.join(missing) or 'none'}; "
                        f"extra: {', '.join(sorted(extra)) or 'none'})"))
                else:
                    values = [node.prior[s] for s in node.scale.states]
                    found.extend(_distribution_violations(node.id, "prior", "prior", node.scale.states, values))
            continue
        if node.cpt is None:
            found.append(Violation(node.id, "missing-cpt", "node with parents has no CPT"))
            continue
        cpt = node.cpt
        if cpt.child_states != node.scale.states:
            found.append(Violation(
                node.id, "cpt-shape", "CPT child states do not match the node's scale"))
            continue
        if cpt.parent_ids != node.parents:
            found.append(Violation(
                node.id, "cpt-shape", "CPT parent ids do not match the node's parents"))
            continue
        if not parents_ok:
            continue
        expected = combination_count(diagram.parent_scales(node.parents))
        if len(cpt.columns) != expected:
            found.append(Violation(
                node.id, "cpt-shape",
                f"CPT has {len(cpt.columns)} columns, expected {expected}"))
            continue
        for i, column in enumerate(cpt.columns):
            if len(column) != len(cpt.child_states):
                found.append(Violation(
                    node.id, "cpt-shape",
                    f"column {i} has {len(column)} entries, expected {len(cpt.child_states)}"))
                continue
            found.extend(_distribution_violations(
                node.id, "cpt", f"column {i}", cpt.child_states, column))

    for unode in diagram.utility_nodes:
        if not check_parents(unode.id, unode.parents):
            continue
        expected = combination_count(diagram.parent_scales(unode.parents))
        if len(unode.utilities) != expected:
            found.append(Violation(
                unode.id, "utility-shape",
                f"utility table has {len(unode.utilities)} entries, expected {expected}"))
        if any(not math.isfinite(u) for u in unode.utilities):
            found.append(Violation(unode.id, "utility-value", "utility values must be finite"))

    parents_of = {n.id: [p for p in n.parents if p in chance_ids] for n in diagram.chance_nodes}
    for component in _cycle_components(parents_of):
        found.append(Violation(
            component[0], "cycle", f"cycle through nodes: {', '.join(component)}"))

    return sorted(found, key=lambda v: (v.node_id, v.kind, v.message))


def topological_order(diagram: InfluenceDiagram) -> list[str]:
    """Chance-node ids with every parent before its children; ties broken by id."""
    chance_ids = {n.id for n in diagram.chance_nodes}
    parents_of = {n.id: [p for p in n.parents if p in chance_ids] for n in diagram.chance_nodes}
    children: dict[str, list[str]] = {nid: [] for nid in parents_of}
    pending = {nid: len(parents) for nid, parents in parents_of.items()}
    for nid, parents in parents_of.items():
        for p in parents:
            children[p].append(nid)

    ready = [nid for nid, count in pending.items() if count == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for child in children[nid]:
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(ready, child)

    if len(order) != len(parents_of):
        cycles = _cycle_components(parents_of)
        named = "; ".join(", ".join(c) for c in cycles) or ", ".join(
            sorted(nid for nid, count in pending.items() if count > 0))
        raise DiagramError(f"diagram contains a cycle: {named}")
    return order
