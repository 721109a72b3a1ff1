"""Claim diagrams over finite sets: validation gating and colimit synthesis.

A diagram is a DAG of claims, each carrying a finite set of labels, with a
total label map along every edge. The colimit over the validated part is the
disjoint union of the validated payloads glued along the edge maps.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Mapping

from app.services.errors import (
    CycleError,
    DuplicateClaimError,
    EmptyDiagramError,
    MappingError,
    ParameterError,
)
from app.services.threshold import GrowthParams, Integrability, predicted_integrability

__all__: list[str] = [
    "Status",
    "ClaimNode",
    "ClaimEdge",
    "ClaimDAG",
    "ColimitResult",
    "UnionFind",
    "Checker",
    "accept_all",
    "reject_ids",
    "threshold_checker",
    "validate",
    "colimit",
    "parse_dag",
    "dump_dag",
    "format_colimit",
]

Element = tuple[str, str]  # (node id, label)


class Status(str, Enum):
    PENDING = "Pending"
    VALIDATED = "Validated"
    REJECTED = "Rejected"


@dataclass(frozen=True)
class ClaimNode:
    id: str
    payload: tuple[str, ...] = ()
    statement: str = ""
    status: Status = Status.PENDING

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", tuple(self.payload))
        if len(set(self.payload)) != len(self.payload):
            raise MappingError(f"claim {self.id!r} has duplicate payload labels")

    def with_status(self, status: Status) -> "ClaimNode":
        if self.status is not Status.PENDING or status is Status.PENDING:
            raise ParameterError(f"claim {self.id!r} cannot move from {self.status.value} to {status.value}")
        return replace(self, status=status)


@dataclass(frozen=True)
class ClaimEdge:
    source: str
    target: str
    mapping: Mapping[str, str] = field(default_factory=dict)


class ClaimDAG:
    """Single-writer builder; every mutation keeps the graph acyclic and the edge maps total."""

    def __init__(self) -> None:
        self._nodes: dict[str, ClaimNode] = {}
        self._edges: list[ClaimEdge] = []

    @property
    def nodes(self) -> dict[str, ClaimNode]:
        return dict(self._nodes)

    @property
    def edges(self) -> list[ClaimEdge]:
        return list(self._edges)

    def __len__(self) -> int:
        return len(self._nodes)

    def add_claim(self, node: ClaimNode) -> "ClaimDAG":
        if node.id in self._nodes:
            raise DuplicateClaimError(f"claim {node.id!r} already exists")
        self._nodes[node.id] = node
        return self

    def add_edge(self, edge: ClaimEdge) -> "ClaimDAG":
        for end in (edge.source, edge.target):
            if end not in self._nodes:
                raise ParameterError(f"edge endpoint {end!r} is not a claim")
        source, target = self._nodes[edge.source], self._nodes[edge.target]
        if set(edge.mapping) != set(source.payload):
            missing = sorted(set(source.payload) - set(edge.mapping))
            extra = sorted(set(edge.mapping) - set(source.payload))
            raise MappingError(f"edge {edge.source}->{edge.target} is not total: missing {missing}, unknown {extra}")
        stray = sorted(set(edge.mapping.values()) - set(target.payload))
        if stray:
            raise MappingError(f"edge {edge.source}->{edge.target} maps outside the target payload: {stray}")
        if edge.source == edge.target or self._reaches(edge.target, edge.source):
            raise CycleError(f"edge {edge.source}->{edge.target} closes a cycle")
        self._edges.append(ClaimEdge(edge.source, edge.target, dict(edge.mapping)))
        return self

    def parents(self, node_id: str) -> list[str]:
        return [e.source for e in self._edges if e.target == node_id]

    def _reaches(self, start: str, goal: str) -> bool:
        children: dict[str, list[str]] = {}
        for e in self._edges:
            children.setdefault(e.source, []).append(e.target)
        seen, stack = {start}, [start]
        while stack:
            current = stack.pop()
            if current == goal:
                return True
            for nxt in children.get(current, []):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; ties broken by insertion order."""
        indegree = {nid: 0 for nid in self._nodes}
        children: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        for e in self._edges:
            indegree[e.target] += 1
            children[e.source].append(e.target)
        ready = deque(nid for nid, deg in indegree.items() if deg == 0)
        order = []
        while ready:
            current = ready.popleft()
            order.append(current)
            for nxt in children[current]:
                indegree[nxt] -= 1
                if indegree[nxt] == 0:
                    ready.append(nxt)
        return order

    def _with_nodes(self, nodes: dict[str, ClaimNode]) -> "ClaimDAG":
        dag = ClaimDAG()
        dag._nodes = {nid: nodes[nid] for nid in self._nodes}
        dag._edges = list(self._edges)
        return dag


# -----------------------------------------------------------------------------
# Validation
# -----------------------------------------------------------------------------
Checker = Callable[[ClaimNode], bool]


def accept_all(node: ClaimNode) -> bool:
    return True


def reject_ids(ids: Iterable[str]) -> Checker:
    rejected = frozenset(ids)
    return lambda node: node.id not in rejected


_HOLDS_RE = re.compile(
    r"^holds\s+p=(?P<p>\S+)\s+q=(?P<q>\S+)\s+alpha=(?P<alpha>\S+)\s+n=(?P<n>\d+)\s*$"
)


def threshold_checker(node: ClaimNode) -> bool:
    """Claims of the form ``holds p=.. q=.. alpha=.. n=..`` pass iff gradient regularity is predicted."""
    match = _HOLDS_RE.match(node.statement.strip())
    if match is None:
        return True
    try:
        params = GrowthParams(p=float(match["p"]), q=float(match["q"]),
                              alpha=float(match["alpha"]), n=int(match["n"]))
    except ValueError:
        return False
    return predicted_integrability(params) is Integrability.ALL_FINITE_EXPONENTS


def validate(dag: ClaimDAG, checker: Checker) -> ClaimDAG:
    """Validated iff the checker accepts the claim and every parent is Validated; Rejected otherwise."""
    nodes = dag.nodes
    if any(node.status is not Status.PENDING for node in nodes.values()):
        raise ParameterError("validate expects every claim to be Pending")
    for nid in dag.topological_order():
        parents_ok = all(nodes[parent].status is Status.VALIDATED for parent in dag.parents(nid))
        status = Status.VALIDATED if parents_ok and checker(nodes[nid]) else Status.REJECTED
        nodes[nid] = nodes[nid].with_status(status)
    return dag._with_nodes(nodes)


# -----------------------------------------------------------------------------
# Colimit
# -----------------------------------------------------------------------------
class UnionFind:
    def __init__(self, elements: Iterable[Element]):
        self.parent = {x: x for x in elements}
        self.rank = {x: 0 for x in self.parent}

    def find(self, x: Element) -> Element:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: Element, y: Element) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x

    def groups(self) -> list[list[Element]]:
        members: dict[Element, list[Element]] = {}
        for x in self.parent:
            members.setdefault(self.find(x), []).append(x)
        return sorted((sorted(group) for group in members.values()), key=lambda g: g[0])


@dataclass(frozen=True)
class ColimitResult:
    classes: list[list[Element]]  # ordered by smallest member
    cocone: dict[str, dict[str, int]]  # node id -> label -> class index

    def partition(self) -> frozenset[frozenset[Element]]:
        return frozenset(frozenset(c) for c in self.classes)


def colimit(dag: ClaimDAG) -> ColimitResult:
    """Quotient of the disjoint union of validated payloads by the edge maps between validated claims."""
    validated = {nid: node for nid, node in dag.nodes.items() if node.status is Status.VALIDATED}
    if not validated:
        raise EmptyDiagramError("colimit needs at least one Validated claim")
    uf = UnionFind((nid, label) for nid, node in validated.items() for label in node.payload)
    for edge in dag.edges:
        if edge.source in validated and edge.target in validated:
            for src_label, dst_label in edge.mapping.items():
                uf.union((edge.source, src_label), (edge.target, dst_label))
    classes = uf.groups()
    index = {element: k for k, group in enumerate(classes) for element in group}
    cocone = {nid: {label: index[(nid, label)] for label in node.payload} for nid, node in validated.items()}
    return ColimitResult(classes, cocone)


# -----------------------------------------------------------------------------
# Text format
# -----------------------------------------------------------------------------
def _labels(token: str | None) -> tuple[str, ...]:
    if not token:
        return ()
    return tuple(label for label in token.split(",") if label)


def parse_dag(text: str) -> ClaimDAG:
    """Read ``node <id> <l1,l2,..>``, ``edge <src> <dst> <a=b,..>`` and ``statement <id> <text>`` lines."""
    nodes: list[tuple[str, tuple[str, ...]]] = []
    statements: dict[str, str] = {}
    edges: list[ClaimEdge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        parts = rest.split()
        if keyword == "node" and 1 <= len(parts) <= 2:
            nodes.append((parts[0], _labels(parts[1] if len(parts) == 2 else None)))
        elif keyword == "edge" and 2 <= len(parts) <= 3:
            pairs = {}
            for item in _labels(parts[2] if len(parts) == 3 else None):
                src, sep, dst = item.partition("=")
                if not sep or not src or not dst:
                    raise ParameterError(f"line {lineno}: malformed label pair {item!r}")
                if src in pairs:
                    raise MappingError(f"line {lineno}: label {src!r} is mapped twice")
                pairs[src] = dst
            edges.append(ClaimEdge(parts[0], parts[1], pairs))
        elif keyword == "statement" and parts:
            statements[parts[0]] = rest.strip()[len(parts[0]):].strip()
        else:
            raise ParameterError(f"line {lineno}: cannot parse {raw!r}")

    dag = ClaimDAG()
    for nid, labels in nodes:
        dag.add_claim(ClaimNode(nid, labels, statements.pop(nid, "")))
    if statements:
        raise ParameterError(f"statements for unknown claims: {sorted(statements)}")
    for edge in edges:
        dag.add_edge(edge)
    return dag


def dump_dag(dag: ClaimDAG) -> str:
    lines = []
    for node in dag.nodes.values():
        lines.append(f"node {node.id} {','.join(node.payload)}".rstrip())
        if node.statement:
            lines.append(f"statement {node.id} {node.statement}")
    for edge in dag.edges:
        pairs = ",".join(f"{src}={dst}" for src, dst in edge.mapping.items())
        lines.append(f"edge {edge.source} {edge.target} {pairs}".rstrip())
    return "\n".join(lines) + "\n"


def format_colimit(result: ColimitResult) -> str:
    lines = [
        f"class {k}: " + " ".join(f"{nid}.{label}" for nid, label in group)
        for k, group in enumerate(result.classes)
    ]
    return "\n".join(lines) + "\n"
