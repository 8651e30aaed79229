"""Structural graph-quality metrics and extraction accuracy scoring.

Structural metrics are type-level: a class counts as instantiated if any
node carries its label, a property if any node of its class holds a
non-default value for it.  Accuracy scoring aligns a predicted graph with a
ground-truth graph by entity keys and reports precision/recall/F1.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from .errors import EmptySchema
from .graph import Node, PropertyGraph
from .ontology import DEFAULT_VALUE, OntologySchema
from .pipeline import normalize_name


def _require_classes(schema: OntologySchema) -> None:
    if not schema.classes:
        raise EmptySchema("schema defines no classes")


def _is_instantiated(value: str | None) -> bool:
    return value is not None and value.strip() != "" and value != DEFAULT_VALUE


def instantiated_labels(graph: PropertyGraph, schema: OntologySchema) -> set[str]:
    return {n.label for n in graph.nodes()} & set(schema.labels)


def instantiated_properties(graph: PropertyGraph, schema: OntologySchema) -> set[tuple[str, str]]:
    pairs = set()
    for node in graph.nodes():
        if node.label not in schema.labels:
            continue
        cls = schema.lookup_class(node.label)
        for name, value in node.properties.items():
            if cls.has_property(name) and _is_instantiated(value):
                pairs.add((node.label, name))
    return pairs


def instantiated_relationship_types(graph: PropertyGraph, schema: OntologySchema) -> set[str]:
    return {e.type for e in graph.edges()} & set(schema.relationship_types)


def compute_icr(graph: PropertyGraph, schema: OntologySchema | None = None) -> float:
    schema = schema or graph.schema
    _require_classes(schema)
    return len(instantiated_labels(graph, schema)) / len(schema.classes)


def compute_ipr(graph: PropertyGraph, schema: OntologySchema | None = None) -> float:
    schema = schema or graph.schema
    _require_classes(schema)
    total = sum(len(c.properties) for c in schema.classes)
    if total == 0:
        raise EmptySchema("schema defines no properties")
    return len(instantiated_properties(graph, schema)) / total


def relationship_completeness(graph: PropertyGraph, schema: OntologySchema | None = None) -> float:
    """Percentage of relationship requirements met; an alternative group is met by any member."""
    schema = schema or graph.schema
    requirements = schema.relationship_requirements()
    if not requirements:
        return 0.0
    present = instantiated_relationship_types(graph, schema)
    return 100.0 * sum(1 for group in requirements if group & present) / len(requirements)


def relationship_type_coverage(graph: PropertyGraph, schema: OntologySchema | None = None) -> float:
    """Percentage of distinct relationship types present, with no grouping."""
    schema = schema or graph.schema
    types = schema.relationship_types
    if not types:
        return 0.0
    return 100.0 * len(instantiated_relationship_types(graph, schema)) / len(types)


def compute_completeness(graph: PropertyGraph, schema: OntologySchema | None = None) -> tuple[float, float, float]:
    """(node %, relationship %, property %)."""
    schema = schema or graph.schema
    return (
        100.0 * compute_icr(graph, schema),
        relationship_completeness(graph, schema),
        100.0 * compute_ipr(graph, schema),
    )


@dataclass
class StructuralReport:
    icr: float
    ipr: float
    node_completeness: float
    relationship_completeness: float
    property_completeness: float
    relationship_type_coverage: float
    per_label_counts: dict[str, int] = field(default_factory=dict)
    per_relationship_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def structural_report(graph: PropertyGraph, schema: OntologySchema | None = None) -> StructuralReport:
    schema = schema or graph.schema
    node_pct, rel_pct, prop_pct = compute_completeness(graph, schema)
    labels = Counter(n.label for n in graph.nodes())
    types = Counter(e.type for e in graph.edges())
    return StructuralReport(
        icr=compute_icr(graph, schema),
        ipr=compute_ipr(graph, schema),
        node_completeness=node_pct,
        relationship_completeness=rel_pct,
        property_completeness=prop_pct,
        relationship_type_coverage=relationship_type_coverage(graph, schema),
        per_label_counts={lbl: labels.get(lbl, 0) for lbl in schema.labels},
        per_relationship_counts={t: types.get(t, 0) for t in schema.relationship_types},
    )


# -- semantic accuracy --------------------------------------------------------

# Property that names an entity of each class; other classes are keyed by node id,
# which is deterministic for them (patient, encounter and singleton nodes).
PRIMARY_NAME = {
    "Diagnosis": "Name",
    "Symptoms": "Name",
    "Medications": "Name",
    "DiagnosticTests": "Test Name",
    "Assessment": "Text",
    "CarePlan": "Text",
}
TEXT_KEY_CHARS = 64


def entity_key(node: Node) -> tuple[str, str]:
    prop = PRIMARY_NAME.get(node.label)
    if prop is None:
        return (node.label, node.id)
    value = normalize_name(node.properties.get(prop, ""))
    if prop == "Text":
        value = value[:TEXT_KEY_CHARS]
    return (node.label, value)


def entity_multiset(graph: PropertyGraph) -> Counter:
    return Counter(entity_key(n) for n in graph.nodes())


def relation_multiset(graph: PropertyGraph) -> Counter:
    keys = {n.id: entity_key(n) for n in graph.nodes()}
    return Counter((keys[e.source], e.type, keys[e.target]) for e in graph.edges())


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


@dataclass
class Scores:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Scores":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        return cls(tp, fp, fn, p, r, f1_score(p, r))


def match_counts(predicted: Counter, truth: Counter) -> tuple[int, int, int]:
    tp = sum((predicted & truth).values())
    return tp, sum(predicted.values()) - tp, sum(truth.values()) - tp


@dataclass
class SemanticReport:
    entity: Scores
    relation: Scores
    combined: Scores

    def to_dict(self) -> dict:
        return asdict(self)


def align_and_score(predicted: PropertyGraph, truth: PropertyGraph) -> SemanticReport:
    """Micro-averaged entity, relation and pooled scores of ``predicted`` against ``truth``."""
    ent = match_counts(entity_multiset(predicted), entity_multiset(truth))
    rel = match_counts(relation_multiset(predicted), relation_multiset(truth))
    pooled = tuple(a + b for a, b in zip(ent, rel))
    return SemanticReport(Scores.from_counts(*ent), Scores.from_counts(*rel), Scores.from_counts(*pooled))


# -- tables -------------------------------------------------------------------

def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    fmt = lambda r: "  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    return "\n".join([fmt(header), fmt(["-" * w for w in widths])] + [fmt(r) for r in rows]) + "\n"


def structural_table(reports: dict[str, StructuralReport]) -> str:
    header = ["Graph", "ICR", "IPR", "Node %", "Rel %", "Prop %", "Rel types %"]
    rows = [
        [name, f"{r.icr:.2f}", f"{r.ipr:.2f}", f"{r.node_completeness:.2f}", f"{r.relationship_completeness:.2f}",
         f"{r.property_completeness:.2f}", f"{r.relationship_type_coverage:.2f}"]
        for name, r in reports.items()
    ]
    return _table(header, rows)


def semantic_table(reports: dict[str, SemanticReport]) -> str:
    header = ["Graph", "Axis", "Precision", "Recall", "F1", "TP", "FP", "FN"]
    rows = []
    for name, rep in reports.items():
        for axis in ("entity", "relation", "combined"):
            s: Scores = getattr(rep, axis)
            rows.append([name, axis, f"{s.precision:.2f}", f"{s.recall:.2f}", f"{s.f1:.2f}",
                         str(s.tp), str(s.fp), str(s.fn)])
    return _table(header, rows)


def to_json(report: StructuralReport | SemanticReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)
