import json

import pytest

from pjkg import golden
from pjkg.errors import DuplicatePatientId, MissingPatientId
from pjkg.export import to_json
from pjkg.extraction import EncounterInput, MockBackend
from pjkg.pipeline import (
    PatientBundle, build_corpus, build_patient_profile, build_pjkg, encounter_to_subgraph,
    load_bundle, load_corpus, normalize_name, write_bundle,
)
from pjkg.synth import generate_corpus

PID = golden.PATIENT_ID


def eid(j):
    return golden.encounter_id(j)


def journey(graph, pid=PID):
    return [(n.id, t) for n, t in graph.journey(pid)]


def test_golden_journey(golden_outcome):
    assert golden_outcome.integrated == [eid(j) for j in range(1, 6)]
    assert golden_outcome.skipped == [] and golden_outcome.warnings == []
    assert journey(golden_outcome.pjkg) == [
        (f"{PID}:1", "HAS_START"), (f"{PID}:2", "HAS_FOLLOWUP"), (f"{PID}:3", "CAUSED_BY"),
        (f"{PID}:4", "HAS_FOLLOWUP"), (f"{PID}:5", "HAS_FOLLOWUP"),
    ]
    assert golden_outcome.pjkg.check_invariants() == []


def test_encounter_subgraph_shape(golden_graph):
    enc = f"{PID}:1"
    types = sorted(e.type for e, _ in golden_graph.neighbors(enc, "out"))
    assert types.count("HAS_SYMPTOM") == 3
    assert {"HAS_DIAGNOSIS", "HAS_MEDICATION", "HAS_TEST", "HAS_VITALSIGN", "HAS_ASSESSMENT",
            "HAS_CAREPLAN", "HAS_FOLLOWUP"} <= set(types)
    node = golden_graph.node(enc)
    assert node.properties == {"Encounter Number": "1", "Date": "2024-01-08", "Time": "09:30"}
    dx = golden_graph.node(f"{enc}:Diagnosis:mitral valve regurgitation")
    assert dx.properties["ICD-10"] == "I34.0"


def test_profile_has_every_property(schema):
    sub = build_patient_profile(golden.golden_bundle(), schema)
    patient = sub.nodes[0]
    assert patient.id == PID
    assert set(patient.properties) == set(schema.lookup_class("Patient").property_names)
    assert "metoprolol" in sub.nodes[1].properties["Current Medications"].lower()


def test_profile_defaults_missing_values(schema):
    sub = build_patient_profile(PatientBundle({"ID": "X1"}), schema)
    assert sub.nodes[0].properties["Name"] == "unknown"
    assert set(sub.nodes[2].properties.values()) == {"unknown"}


def test_missing_patient_id(schema):
    with pytest.raises(MissingPatientId):
        build_patient_profile(PatientBundle({"Name": "no id"}), schema)


def test_corrupted_middle_encounter_is_skipped(schema):
    responses = golden.golden_responses()
    responses[eid(3)] = "I could not read this transcript."
    out = build_pjkg(golden.golden_bundle(), MockBackend(responses), schema)
    assert [e for e, _ in out.skipped] == [eid(3)]
    assert out.integrated == [eid(j) for j in (1, 2, 4, 5)]
    assert journey(out.pjkg) == [
        (f"{PID}:1", "HAS_START"), (f"{PID}:2", "HAS_FOLLOWUP"), (f"{PID}:4", "HAS_FOLLOWUP"),
        (f"{PID}:5", "HAS_FOLLOWUP"),
    ]
    assert any("linked from" in w for w in out.warnings)
    assert not out.per_encounter_reports[2].passed
    assert out.pjkg.check_invariants() == []


def test_strict_mode_aborts(schema):
    responses = golden.golden_responses()
    responses[eid(3)] = "nope"
    out = build_pjkg(golden.golden_bundle(), MockBackend(responses), schema, strict=True)
    assert out.aborted
    assert out.integrated == [eid(1), eid(2)]
    assert len(out.per_encounter_reports) == 5


def test_skipped_first_encounter_moves_the_start(schema):
    responses = golden.golden_responses()
    responses[eid(1)] = "{}"
    out = build_pjkg(golden.golden_bundle(), MockBackend(responses), schema)
    assert journey(out.pjkg)[0] == (f"{PID}:2", "HAS_START")


def test_first_encounter_link_forced_to_start(schema):
    results = golden.golden_results()
    doc = results[eid(1)].to_dict()
    doc["journey_link"] = {"type": "NEXT", "target_encounter": None}
    responses = golden.golden_responses()
    responses[eid(1)] = json.dumps(doc)
    out = build_pjkg(golden.golden_bundle(), MockBackend(responses), schema)
    assert journey(out.pjkg)[0] == (f"{PID}:1", "HAS_START")
    assert any("forced" in w for w in out.warnings)


def test_late_start_downgraded_to_next(schema):
    doc = golden.golden_results()[eid(2)].to_dict()
    doc["journey_link"] = {"type": "HAS_START", "target_encounter": None}
    responses = golden.golden_responses()
    responses[eid(2)] = json.dumps(doc)
    out = build_pjkg(golden.golden_bundle(), MockBackend(responses), schema)
    assert journey(out.pjkg)[1] == (f"{PID}:2", "NEXT")


def test_out_of_order_encounter_fails_temporal(schema):
    bundle = golden.golden_bundle()
    e3 = bundle.encounters[2]
    bundle.encounters[2] = EncounterInput(e3.encounter_id, "2023-12-01", e3.time, e3.transcript)
    out = build_pjkg(bundle, golden.golden_backend(), schema)
    assert [e for e, _ in out.skipped] == [eid(3)]
    assert "temporal" in out.skipped[0][1]


def test_no_encounters(schema):
    bundle = golden.golden_bundle()
    bundle.encounters = []
    out = build_pjkg(bundle, MockBackend({}), schema)
    assert out.pjkg.node_count == 3
    assert out.pjkg.journey(PID) == []


def test_duplicate_detail_items_collapse(schema):
    result = golden.golden_results()[eid(1)]
    result.symptoms.append(result.symptoms[0])
    notes = []
    sub = encounter_to_subgraph(PID, 1, result, predecessor=None, notes=notes)
    assert sum(1 for n in sub.nodes if n.label == "Symptoms") == 3
    assert notes


def test_normalize_name():
    assert normalize_name("  Chest   X-Ray ") == "chest x-ray"


def test_corpus_and_determinism(schema):
    patients = generate_corpus()
    backend = MockBackend({k: v for p in patients for k, v in p.responses.items()})
    bundles = [p.bundle for p in patients]
    a = build_corpus(bundles, backend, schema)
    b = build_corpus(bundles, backend, schema, parallelism=3)
    assert [to_json(o.pjkg) for o in a] == [to_json(o.pjkg) for o in b]
    assert sum(len(o.integrated) for o in a) == 30


def test_duplicate_patient_ids(schema):
    bundle = golden.golden_bundle()
    with pytest.raises(DuplicatePatientId):
        build_corpus([bundle, bundle], golden.golden_backend(), schema)


def test_bundle_directory_round_trip(tmp_path):
    bundle = golden.golden_bundle()
    write_bundle(bundle, tmp_path)
    assert load_bundle(tmp_path / PID) == bundle
    assert load_corpus(tmp_path) == [bundle]
