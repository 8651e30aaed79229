"""Hypothesis strategies for schema-valid PJKGs."""
from hypothesis import strategies as st

from pjkg.extraction import (
    DiagnosticTest, Diagnosis, EncounterInfo, EncounterInput, ExtractionResult, JourneyLink,
    Medication, Symptom, TextNote, VitalSigns,
)
from pjkg.graph import Edge, Node, PropertyGraph
from pjkg.ontology import DEFAULT_VALUE, SUCCESSOR_EDGES, load_default_schema
from pjkg.pipeline import PatientBundle, build_patient_profile, encounter_to_subgraph

SCHEMA = load_default_schema()

words = st.sampled_from(["aspirin", "cough", "fever", "ecg", "x ray", "asthma", "ibuprofen", "rash",
                         "mri", "anemia", "nausea", "statin"])
maybe = st.one_of(st.just(DEFAULT_VALUE), st.sampled_from(["mild", "5 mg", "120/80", "70", "note a", "Z95.1"]))


def _props(label):
    names = SCHEMA.lookup_class(label).property_names
    return st.fixed_dictionaries({n: maybe for n in names})


@st.composite
def extraction_results(draw, j=1):
    def items(cls):
        return st.lists(st.builds(cls, words, maybe), max_size=3)
    return ExtractionResult(
        encounter=EncounterInfo(str(j), "2024-01-01", "09:00"),
        symptoms=draw(items(Symptom)),
        diagnoses=draw(items(Diagnosis)),
        medications=draw(items(Medication)),
        diagnostic_tests=draw(items(DiagnosticTest)),
        vital_signs=VitalSigns(draw(maybe), draw(maybe), draw(maybe)),
        assessment=TextNote(draw(maybe)),
        care_plan=TextNote(draw(maybe)),
        journey_link=JourneyLink(draw(st.sampled_from(SUCCESSOR_EDGES))),
    )


@st.composite
def patient_graphs(draw, max_patients=2, max_encounters=3):
    """Graphs built through the same subgraph constructor the pipeline uses."""
    g = PropertyGraph(SCHEMA)
    n_pat = draw(st.integers(1, max_patients))
    for p in range(n_pat):
        pid = f"P{p}"
        profile = draw(_props("Patient"))
        profile["ID"] = pid
        bundle = PatientBundle(profile, draw(_props("MedicalHistory")), draw(_props("SocialHistory")))
        if draw(st.booleans()):
            bundle.medical_history, bundle.social_history = {}, {}
        g.merge_subgraph(build_patient_profile(bundle, SCHEMA))
        for j in range(1, draw(st.integers(0, max_encounters)) + 1):
            enc = EncounterInput(f"{pid}-E{j}", f"2024-0{j}-01", "09:00", "")
            g.merge_subgraph(encounter_to_subgraph(pid, j, draw(extraction_results(j)), encounter=enc))
    return g


@st.composite
def loose_graphs(draw, max_nodes=50):
    """Any labels, property subsets and schema-typed edges; journey invariants not enforced."""
    g = PropertyGraph(SCHEMA)
    n = draw(st.integers(0, max_nodes))
    for i in range(n):
        label = draw(st.sampled_from(SCHEMA.labels))
        names = SCHEMA.lookup_class(label).property_names
        chosen = draw(st.lists(st.sampled_from(names), unique=True))
        props = {k: draw(st.sampled_from([DEFAULT_VALUE, "", " ", "x", "y"])) for k in chosen}
        g._add_node(Node(f"n{i}", label, props))
    nodes = g.nodes()
    for rel in draw(st.lists(st.sampled_from(SCHEMA.relationships), max_size=2 * n)):
        src = [x.id for x in nodes if x.label == rel.source_label]
        tgt = [x.id for x in nodes if x.label == rel.target_label]
        if src and tgt:
            try:
                g._add_edge(Edge(draw(st.sampled_from(src)), draw(st.sampled_from(tgt)), rel.type_name))
            except Exception:
                pass  # cardinality clash; skip the edge
    return g
