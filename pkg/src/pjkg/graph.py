"""Embedded labeled property graph with ontology-checked mutation.

Nodes are keyed by id, edges by ``(source, type, target)``.  Mutations
check every edge against the schema's relationship definitions; batch
merges are applied to a staged copy and swapped in only if the whole graph
still satisfies its invariants.
"""
from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import (
    ConstraintViolation,
    DanglingEndpoint,
    DuplicateIdConflict,
    MalformedJourney,
    StartUniquenessViolation,
    UnknownClass,
    UnknownNode,
    UnknownPatient,
    UnknownRelationship,
)
from .ontology import HAS_START, SUCCESSOR_EDGES, OntologySchema, load_default_schema


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    properties: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    type: str
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source, self.type, self.target)


@dataclass
class Subgraph:
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def extend(self, other: "Subgraph") -> None:
        self.nodes.extend(other.nodes)
        self.edges.extend(other.edges)


@dataclass(frozen=True)
class MergeStats:
    nodes_added: int = 0
    edges_added: int = 0
    merged: int = 0  # items already present with identical content


class RWLock:
    """Many readers or one writer.  Writers are preferred once waiting."""

    def __init__(self):
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


PropertyFilter = Mapping[str, str] | Callable[[Mapping[str, str]], bool] | None


class PropertyGraph:
    def __init__(self, schema: OntologySchema | None = None):
        self.schema = schema if schema is not None else load_default_schema()
        self._nodes: dict[str, Node] = {}
        self._edges: dict[tuple[str, str, str], Edge] = {}
        self._out: dict[str, dict[tuple[str, str, str], Edge]] = {}
        self._in: dict[str, dict[tuple[str, str, str], Edge]] = {}
        self._by_label: dict[str, set[str]] = {}
        self._lock = RWLock()
        # Bumped on every successful mutation; lets callers prove a run was read-only.
        self.version = 0

    # -- inspection -------------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def nodes(self) -> list[Node]:
        with self._lock.read():
            return [self._nodes[k] for k in sorted(self._nodes)]

    def edges(self) -> list[Edge]:
        with self._lock.read():
            return [self._edges[k] for k in sorted(self._edges)]

    def copy(self) -> "PropertyGraph":
        g = PropertyGraph(self.schema)
        g._nodes = dict(self._nodes)
        g._edges = dict(self._edges)
        g._out = {k: dict(v) for k, v in self._out.items()}
        g._in = {k: dict(v) for k, v in self._in.items()}
        g._by_label = {k: set(v) for k, v in self._by_label.items()}
        return g

    # -- mutation ---------------------------------------------------------

    def add_node(self, node: Node) -> str:
        with self._lock.write():
            added = self._add_node(node)
            if added:
                self.version += 1
        return node.id

    def add_edge(self, edge: Edge) -> None:
        with self._lock.write():
            if self._add_edge(edge):
                self.version += 1

    def merge_subgraph(self, sub: Subgraph) -> MergeStats:
        """Union ``sub`` into the graph by id; all-or-nothing."""
        with self._lock.write():
            staged = self.copy()
            nodes_added = edges_added = merged = 0
            for node in sub.nodes:
                if staged._add_node(node):
                    nodes_added += 1
                else:
                    merged += 1
            for edge in sub.edges:
                if staged._add_edge(edge):
                    edges_added += 1
                else:
                    merged += 1
            problems = staged.check_invariants()
            if problems:
                raise ConstraintViolation("; ".join(problems))
            if nodes_added or edges_added:
                self._nodes, self._edges = staged._nodes, staged._edges
                self._out, self._in = staged._out, staged._in
                self._by_label = staged._by_label
                self.version += 1
        return MergeStats(nodes_added, edges_added, merged)

    def _add_node(self, node: Node) -> bool:
        cls = self.schema.lookup_class(node.label)
        for name, value in node.properties.items():
            if not cls.has_property(name):
                raise ConstraintViolation(f"{node.label} has no property {name!r} (node {node.id!r})")
            if not isinstance(value, str):
                raise ConstraintViolation(f"property {name!r} of node {node.id!r} must be text")
        existing = self._nodes.get(node.id)
        if existing is not None:
            if existing.label != node.label or dict(existing.properties) != dict(node.properties):
                raise DuplicateIdConflict(f"node {node.id!r} already exists with different content")
            return False
        self._nodes[node.id] = Node(node.id, node.label, dict(node.properties))
        self._by_label.setdefault(node.label, set()).add(node.id)
        return True

    def _add_edge(self, edge: Edge) -> bool:
        src = self._nodes.get(edge.source)
        tgt = self._nodes.get(edge.target)
        if src is None or tgt is None:
            missing = edge.source if src is None else edge.target
            raise DanglingEndpoint(f"edge {edge.key} references missing node {missing!r}")
        if edge.type not in self.schema.relationship_types:
            raise ConstraintViolation(f"relationship type {edge.type!r} is not in the schema")
        rel = self.schema.relationship_for(edge.type, src.label, tgt.label)
        if rel is None:
            raise ConstraintViolation(
                f"{src.label} -[{edge.type}]-> {tgt.label} is not allowed by the schema"
            )
        existing = self._edges.get(edge.key)
        if existing is not None:
            if dict(existing.properties) != dict(edge.properties):
                raise DuplicateIdConflict(f"edge {edge.key} already exists with different properties")
            return False
        if rel.cardinality == "one":
            for other in self._out.get(edge.source, {}).values():
                if other.type == edge.type:
                    if edge.type == HAS_START:
                        raise StartUniquenessViolation(
                            f"patient {edge.source!r} already starts at {other.target!r}"
                        )
                    raise ConstraintViolation(
                        f"{edge.source!r} already has a {edge.type} edge (to {other.target!r})"
                    )
        stored = Edge(edge.source, edge.target, edge.type, dict(edge.properties))
        self._edges[edge.key] = stored
        self._out.setdefault(edge.source, {})[edge.key] = stored
        self._in.setdefault(edge.target, {})[edge.key] = stored
        return True

    # -- invariants -------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Describe every broken graph invariant; empty when the graph is sound."""
        problems = []
        for key, edge in self._edges.items():
            if edge.source not in self._nodes or edge.target not in self._nodes:
                problems.append(f"dangling edge {key}")
        reached: dict[str, list[str]] = {}
        for pid in sorted(self._by_label.get("Patient", ())):
            starts = [e.target for e in self._out.get(pid, {}).values() if e.type == HAS_START]
            if len(starts) > 1:
                problems.append(f"patient {pid!r} has {len(starts)} HAS_START edges")
            seen: set[str] = set()
            frontier = list(starts)
            while frontier:
                cur = frontier.pop()
                if cur in seen:
                    continue
                seen.add(cur)
                frontier.extend(
                    e.target for e in self._out.get(cur, {}).values() if e.type in SUCCESSOR_EDGES
                )
            for enc in seen:
                reached.setdefault(enc, []).append(pid)
        for enc_id in sorted(self._by_label.get("Encounter", ())):
            owners = reached.get(enc_id, [])
            if len(owners) != 1:
                problems.append(
                    f"encounter {enc_id!r} reachable from {len(owners)} patients (expected exactly 1)"
                )
        return problems

    # -- queries ----------------------------------------------------------

    def find_nodes(self, label: str, where: PropertyFilter = None) -> list[Node]:
        self.schema.lookup_class(label)
        if where is None:
            match = lambda props: True  # noqa: E731
        elif callable(where):
            match = where
        else:
            wanted = dict(where)
            match = lambda props: all(props.get(k) == v for k, v in wanted.items())  # noqa: E731
        with self._lock.read():
            ids = sorted(self._by_label.get(label, ()))
            return [self._nodes[i] for i in ids if match(self._nodes[i].properties)]

    def neighbors(self, node_id: str, direction: str = "both",
                  type_filter: str | Iterable[str] | None = None) -> list[tuple[Edge, Node]]:
        if direction not in ("in", "out", "both"):
            raise ValueError(f"direction must be in/out/both, got {direction!r}")
        if isinstance(type_filter, str):
            type_filter = {type_filter}
        elif type_filter is not None:
            type_filter = set(type_filter)
        with self._lock.read():
            if node_id not in self._nodes:
                raise UnknownNode(node_id)
            found: list[tuple[Edge, Node]] = []
            if direction in ("out", "both"):
                found += [(e, self._nodes[e.target]) for e in self._out.get(node_id, {}).values()]
            if direction in ("in", "both"):
                found += [(e, self._nodes[e.source]) for e in self._in.get(node_id, {}).values()]
        if type_filter is not None:
            found = [(e, n) for e, n in found if e.type in type_filter]
        return sorted(found, key=lambda pair: (pair[0].type, pair[1].id, pair[0].source))

    def journey(self, patient_id: str) -> list[tuple[Node, str]]:
        """Encounters of one patient in journey order with their incoming journey edge type."""
        with self._lock.read():
            patient = self._nodes.get(patient_id)
            if patient is None or patient.label != "Patient":
                raise UnknownPatient(patient_id)
            starts = sorted(e.target for e in self._out.get(patient_id, {}).values() if e.type == HAS_START)
            if not starts:
                return []
            if len(starts) > 1:
                raise MalformedJourney(f"patient {patient_id!r} has {len(starts)} starts")
            chain = [(self._nodes[starts[0]], HAS_START)]
            seen = {starts[0]}
            cur = starts[0]
            while True:
                nxt = [e for e in self._out.get(cur, {}).values() if e.type in SUCCESSOR_EDGES]
                if not nxt:
                    return chain
                if len(nxt) > 1:
                    raise MalformedJourney(f"journey branches at {cur!r}")
                edge = nxt[0]
                if edge.target in seen:
                    raise MalformedJourney(f"journey cycles back to {edge.target!r}")
                incoming = [e for e in self._in.get(edge.target, {}).values()
                            if e.type in SUCCESSOR_EDGES or e.type == HAS_START]
                if len(incoming) > 1:
                    raise MalformedJourney(f"journey merges into {edge.target!r}")
                seen.add(edge.target)
                chain.append((self._nodes[edge.target], edge.type))
                cur = edge.target

    def patients(self) -> list[str]:
        return [n.id for n in self.find_nodes("Patient")]


def union_graphs(graphs: Iterable[PropertyGraph], schema: OntologySchema | None = None) -> PropertyGraph:
    """Merge several graphs (e.g. one per patient) into one corpus graph."""
    graphs = list(graphs)
    if schema is None:
        schema = graphs[0].schema if graphs else load_default_schema()
    out = PropertyGraph(schema)
    for g in graphs:
        out.merge_subgraph(Subgraph(g.nodes(), g.edges()))
    return out


__all__ = [
    "Node",
    "Edge",
    "Subgraph",
    "MergeStats",
    "PropertyGraph",
    "RWLock",
    "union_graphs",
    "UnknownClass",
    "UnknownRelationship",
]
