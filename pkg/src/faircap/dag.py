"""Causal DAG handling: validation, adjustment sets, simplified test graphs.

The adjustment-set rule is the parents-of-treatment heuristic: the union of
DAG parents of all treatment attributes, minus the treatments themselves and
minus anything downstream of a treatment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .data import AttributeSpec, Role
from .errors import CyclicGraph, OutcomeInTreatment, UnknownNode


@dataclass(frozen=True, eq=False)
class CausalDag:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    @classmethod
    def from_edges(
        cls, edges: Iterable[tuple[str, str]], extra_nodes: Iterable[str] = ()
    ) -> "CausalDag":
        edges = frozenset((str(a), str(b)) for a, b in edges)
        nodes = frozenset(extra_nodes) | {a for a, _ in edges} | {b for _, b in edges}
        return cls(nodes=nodes, edges=edges)

    def parents(self, node: str) -> frozenset[str]:
        return frozenset(a for a, b in self.edges if b == node)

    def children(self, node: str) -> frozenset[str]:
        return frozenset(b for a, b in self.edges if a == node)

    def descendants(self, node: str) -> frozenset[str]:
        out: set[str] = set()
        stack = [node]
        succ = _adjacency(self.edges)
        while stack:
            x = stack.pop()
            for child in succ.get(x, ()):
                if child not in out:
                    out.add(child)
                    stack.append(child)
        out.discard(node)
        return frozenset(out)


def _adjacency(edges: Iterable[tuple[str, str]]) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
    return adj


def topological_order(dag: CausalDag) -> list[str]:
    """Kahn's algorithm; raises CyclicGraph naming one cycle on failure."""
    indeg = {n: 0 for n in dag.nodes}
    succ = _adjacency(dag.edges)
    for _, b in dag.edges:
        indeg[b] += 1
    queue = deque(sorted(n for n, d in indeg.items() if d == 0))
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in sorted(succ.get(u, ())):
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if len(order) != len(dag.nodes):
        raise CyclicGraph(_find_cycle(dag))
    return order


def _find_cycle(dag: CausalDag) -> list[str]:
    succ = _adjacency(dag.edges)
    color: dict[str, int] = {}
    parent: dict[str, str] = {}

    def dfs(u: str):
        color[u] = 1
        for v in sorted(succ.get(u, ())):
            if color.get(v, 0) == 0:
                parent[v] = u
                found = dfs(v)
                if found:
                    return found
            elif color.get(v) == 1:
                cycle = [v, u]
                x = u
                while x != v:
                    x = parent[x]
                    cycle.append(x)
                cycle.reverse()
                return cycle
        color[u] = 2
        return None

    for node in sorted(dag.nodes):
        if color.get(node, 0) == 0:
            found = dfs(node)
            if found:
                return found
    return []  # unreachable when called on a cyclic graph


def validate_dag(dag: CausalDag, schema: Sequence[AttributeSpec]) -> list[str]:
    """Check acyclicity and node names; returns a topological order as evidence."""
    known = {a.name for a in schema}
    for node in sorted(dag.nodes):
        if node not in known:
            raise UnknownNode(f"graph node {node!r} is not a schema attribute")
    for a, b in dag.edges:
        if a == b:
            raise CyclicGraph([a, a])
    return topological_order(dag)


def causally_relevant_attributes(dag: CausalDag, outcome: str) -> frozenset[str]:
    """Attributes with a directed path to the outcome."""
    pred: dict[str, set[str]] = {}
    for a, b in dag.edges:
        pred.setdefault(b, set()).add(a)
    out: set[str] = set()
    stack = [outcome]
    while stack:
        x = stack.pop()
        for p in pred.get(x, ()):
            if p not in out:
                out.add(p)
                stack.append(p)
    out.discard(outcome)
    return frozenset(out)


def adjustment_set(
    dag: CausalDag, treatment_attrs: Iterable[str], outcome: str
) -> frozenset[str]:
    """Parents of the treatments, minus the treatments and their descendants."""
    treatments = frozenset(treatment_attrs)
    if outcome in treatments:
        raise OutcomeInTreatment(f"outcome {outcome!r} cannot be a treatment")
    adj: set[str] = set()
    for t in treatments:
        adj |= dag.parents(t)
    downstream: set[str] = set()
    for t in treatments:
        downstream |= dag.descendants(t)
    adj -= treatments
    adj -= downstream
    adj.discard(outcome)
    return frozenset(adj)


class DagKind(str, Enum):
    ONE_LAYER_INDEP = "one_layer_indep"
    TWO_LAYER_MUTABLE = "two_layer_mutable"
    TWO_LAYER = "two_layer"


def generate_simplified_dag(kind: DagKind, schema: Sequence[AttributeSpec]) -> CausalDag:
    """Three stylized graph shapes used as robustness fixtures."""
    immutable = [a.name for a in schema if a.role is Role.IMMUTABLE]
    mutable = [a.name for a in schema if a.role is Role.MUTABLE]
    outcome = next(a.name for a in schema if a.role is Role.OUTCOME)
    if not immutable or not mutable:
        raise ValueError("schema needs at least one immutable and one mutable attribute")
    edges: set[tuple[str, str]] = set()
    if kind is DagKind.ONE_LAYER_INDEP:
        for x in immutable + mutable:
            edges.add((x, outcome))
    elif kind is DagKind.TWO_LAYER_MUTABLE:
        for i in immutable:
            for m in mutable:
                edges.add((i, m))
        for m in mutable:
            edges.add((m, outcome))
    elif kind is DagKind.TWO_LAYER:
        for i in immutable:
            for m in mutable:
                edges.add((i, m))
        for m in mutable:
            edges.add((m, outcome))
        for i in immutable:
            edges.add((i, outcome))
    else:
        raise ValueError(f"unknown DAG kind {kind!r}")
    return CausalDag.from_edges(edges)


def parse_dot(text: str) -> CausalDag:
    """Parse the DOT subset: `A -> B;` edge lines and `#` comment lines."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.endswith(";"):
            line = line[:-1].strip()
        if "->" not in line:
            raise ValueError(f"line {lineno}: expected 'A -> B;', got {raw!r}")
        left, _, right = line.partition("->")
        a, b = left.strip(), right.strip()
        if not a or not b:
            raise ValueError(f"line {lineno}: empty node name in {raw!r}")
        edges.append((a, b))
    return CausalDag.from_edges(edges)


def format_dot(dag: CausalDag) -> str:
    lines = [f"{a} -> {b};" for a, b in sorted(dag.edges)]
    return "\n".join(lines) + "\n"
