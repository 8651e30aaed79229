import pytest
from hypothesis import given

from pjkg.errors import (
    ConstraintViolation, DanglingEndpoint, DuplicateIdConflict, MalformedJourney,
    StartUniquenessViolation, UnknownClass, UnknownNode, UnknownPatient,
)
from pjkg.graph import Edge, Node, PropertyGraph, Subgraph, union_graphs
from strategies import patient_graphs


def tiny(schema):
    g = PropertyGraph(schema)
    g.merge_subgraph(Subgraph(
        [Node("P1", "Patient", {"ID": "P1"}), Node("P1:1", "Encounter"), Node("P1:2", "Encounter"),
         Node("P1:1:Diagnosis:flu", "Diagnosis", {"Name": "flu", "ICD-10": "J11.1"})],
        [Edge("P1", "P1:1", "HAS_START"), Edge("P1:1", "P1:2", "NEXT"),
         Edge("P1:1", "P1:1:Diagnosis:flu", "HAS_DIAGNOSIS")],
    ))
    return g


def test_add_and_query(schema):
    g = tiny(schema)
    assert [n.id for n in g.find_nodes("Encounter")] == ["P1:1", "P1:2"]
    assert [n.id for n in g.find_nodes("Diagnosis", {"ICD-10": "J11.1"})] == ["P1:1:Diagnosis:flu"]
    assert g.find_nodes("Diagnosis", lambda p: p.get("Name") == "cold") == []
    out = g.neighbors("P1:1", "out")
    assert [(e.type, n.id) for e, n in out] == [("HAS_DIAGNOSIS", "P1:1:Diagnosis:flu"), ("NEXT", "P1:2")]
    assert [n.id for _, n in g.neighbors("P1:1", "in", "HAS_START")] == ["P1"]
    assert [(n.id, t) for n, t in g.journey("P1")] == [("P1:1", "HAS_START"), ("P1:2", "NEXT")]
    assert g.patients() == ["P1"]


def test_unknown_lookups(schema):
    g = tiny(schema)
    with pytest.raises(UnknownClass):
        g.find_nodes("Hospital")
    with pytest.raises(UnknownNode):
        g.neighbors("nope")
    with pytest.raises(UnknownPatient):
        g.journey("P1:1")


def test_label_and_property_checks(schema):
    g = PropertyGraph(schema)
    with pytest.raises(UnknownClass):
        g.add_node(Node("x", "Hospital"))
    with pytest.raises(ConstraintViolation):
        g.add_node(Node("x", "Diagnosis", {"Dose": "5"}))
    assert g.node_count == 0


def test_edge_domain_and_range(schema):
    g = tiny(schema)
    with pytest.raises(ConstraintViolation):
        g.add_edge(Edge("P1", "P1:1:Diagnosis:flu", "HAS_DIAGNOSIS"))
    with pytest.raises(ConstraintViolation):
        g.add_edge(Edge("P1:1", "P1:2", "TREATS"))


def test_duplicate_id_conflict(schema):
    g = tiny(schema)
    g.add_node(Node("P1:2", "Encounter"))  # identical: no-op
    with pytest.raises(DuplicateIdConflict):
        g.add_node(Node("P1:2", "Encounter", {"Date": "2024-01-01"}))


def test_dangling_edge_leaves_graph_unchanged(schema):
    g = tiny(schema)
    before, version = g.copy(), g.version
    with pytest.raises(DanglingEndpoint):
        g.merge_subgraph(Subgraph([Node("P1:3", "Encounter")], [Edge("P1:9", "P1:3", "NEXT")]))
    assert g == before and g.version == version


def test_second_start_rejected(schema):
    g = tiny(schema)
    with pytest.raises(StartUniquenessViolation):
        g.merge_subgraph(Subgraph([Node("P1:3", "Encounter")], [Edge("P1", "P1:3", "HAS_START")]))
    assert "P1:3" not in g


def test_orphan_encounter_rejected(schema):
    g = tiny(schema)
    with pytest.raises(ConstraintViolation, match="reachable"):
        g.merge_subgraph(Subgraph([Node("P1:9", "Encounter")], []))
    assert g.check_invariants() == []


def test_branch_rejected_by_cardinality(schema):
    g = tiny(schema)
    with pytest.raises(ConstraintViolation):
        g.merge_subgraph(Subgraph([Node("P1:3", "Encounter")], [Edge("P1:1", "P1:3", "NEXT")]))


def test_cycle_is_malformed(schema):
    g = tiny(schema)
    # bypass merge checks to plant a cycle and check the traversal guard
    g._add_edge(Edge("P1:2", "P1:1", "HAS_FOLLOWUP"))
    with pytest.raises(MalformedJourney):
        g.journey("P1")


def test_merge_into_journey_is_malformed(schema):
    g = tiny(schema)
    g._add_node(Node("P1:3", "Encounter"))
    g._add_edge(Edge("P1:1", "P1:3", "HAS_FOLLOWUP"))
    g._add_edge(Edge("P1:3", "P1:2", "CAUSED_BY"))
    with pytest.raises(MalformedJourney):
        g.journey("P1")


def test_no_start_means_empty_journey(schema):
    g = PropertyGraph(schema)
    g.add_node(Node("P2", "Patient", {"ID": "P2"}))
    assert g.journey("P2") == []


def _as_subgraph(g):
    return Subgraph(g.nodes(), g.edges())


@given(patient_graphs())
def test_merge_is_idempotent(g):
    again = g.copy()
    stats = again.merge_subgraph(_as_subgraph(g))
    assert again == g
    assert stats.nodes_added == stats.edges_added == 0
    assert g.check_invariants() == []


@given(patient_graphs(max_patients=1), patient_graphs(max_patients=1))
def test_union_is_commutative(a, b):
    def rename(g, tag):
        out = PropertyGraph(g.schema)
        sub = Subgraph(
            [Node(tag + n.id, n.label, dict(n.properties)) for n in g.nodes()],
            [Edge(tag + e.source, tag + e.target, e.type) for e in g.edges()],
        )
        out.merge_subgraph(sub)
        return out
    a, b = rename(a, "a"), rename(b, "b")
    assert union_graphs([a, b]) == union_graphs([b, a])


def test_concurrent_readers(schema):
    from concurrent.futures import ThreadPoolExecutor
    g = tiny(schema)
    with ThreadPoolExecutor(4) as pool:
        results = list(pool.map(lambda _: len(g.journey("P1")), range(200)))
    assert set(results) == {2}
