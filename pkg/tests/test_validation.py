import copy
import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pjkg import golden
from pjkg.errors import UnparseableTimestamp
from pjkg.extraction import EncounterInput, ExtractionResult
from pjkg.validation import validate_all, validate_semantic, validate_syntactic, validate_temporal


def valid_doc(j=1):
    return golden.golden_results()[golden.encounter_id(j)].to_dict()


def key_paths(doc, prefix=()):
    """Every (path) to a mapping key inside ``doc``."""
    if isinstance(doc, dict):
        for k, v in doc.items():
            yield prefix + (k,)
            yield from key_paths(v, prefix + (k,))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            yield from key_paths(v, prefix + (i,))


def delete_at(doc, path):
    doc = copy.deepcopy(doc)
    cur = doc
    for part in path[:-1]:
        cur = cur[part]
    del cur[path[-1]]
    return doc


def test_valid_fixture_has_no_false_positives(schema):
    encs = golden.golden_encounters()
    for j, enc_id in enumerate(golden.golden_results(), start=1):
        rep = validate_all(valid_doc(j), schema, encs[:j])
        assert rep.passed, rep.issues
        assert rep.warnings == []


def test_every_single_key_deletion_detected():
    paths = [p for j in range(1, 6) for p in key_paths(valid_doc(j))]
    assert len(paths) > 100
    for j in range(1, 6):
        doc = valid_doc(j)
        for path in key_paths(doc):
            assert not validate_syntactic(delete_at(doc, path)).passed, path


def test_unknown_key_strict_and_loose():
    doc = valid_doc()
    doc["vital_signs"]["temperature"] = "37.1"
    assert not validate_syntactic(doc).passed
    assert validate_syntactic(doc, strict=False).passed


def test_syntactic_issue_locations():
    doc = valid_doc()
    doc["medications"][0]["dosage"] = None
    out = validate_syntactic(doc)
    assert [i.location for i in out.issues] == ["medications[0].dosage"]


def test_start_with_target_is_syntactic_error():
    doc = valid_doc()
    doc["journey_link"]["target_encounter"] = "X"
    assert not validate_syntactic(doc).passed


def test_bad_json_text():
    out = validate_syntactic('{"a": ')
    assert not out.passed and out.issues[0].location.startswith("offset")


def test_unknown_relationship_rejected(schema):
    doc = valid_doc(2)
    doc["journey_link"]["type"] = "TREATS"
    out = validate_semantic(ExtractionResult.from_dict(doc), schema)
    assert not out.passed
    assert out.issues[0].location == "journey_link.type"


@pytest.mark.parametrize("category", ["Allergies", "hospital", "insurance_claims"])
def test_unknown_category_rejected(schema, category):
    doc = valid_doc()
    doc[category] = [{"name": "x"}]
    result = ExtractionResult.from_dict(doc)
    assert not validate_semantic(result, schema).passed


def test_known_category_in_loose_mode_accepted(schema):
    doc = valid_doc()
    doc["vital_signs_extra"] = {}
    doc2 = valid_doc()
    doc2["VitalSigns"] = {}
    assert not validate_semantic(ExtractionResult.from_dict(doc), schema).passed
    assert validate_semantic(ExtractionResult.from_dict(doc2), schema).passed


def test_icd10_shape(schema):
    for code, ok in [("I34.0", True), ("Z95.818", True), ("I10", True), ("34.0", False), ("i34.0", False),
                     ("unknown", True)]:
        doc = valid_doc()
        doc["diagnoses"][0]["icd10"] = code
        assert validate_semantic(ExtractionResult.from_dict(doc), schema).passed is ok, code


def test_start_warnings(schema):
    doc = valid_doc(1)
    later = validate_semantic(ExtractionResult.from_dict(doc), schema, is_first=False)
    assert later.passed and later.warnings
    doc = valid_doc(2)
    first = validate_semantic(ExtractionResult.from_dict(doc), schema, is_first=True)
    assert first.passed and "forced" in first.warnings[0].message


def _encs(stamps):
    return [EncounterInput(f"E{i}", d, t, "") for i, (d, t) in enumerate(stamps, start=1)]


INCREASING = [("2024-01-01", "08:00"), ("2024-01-01", "09:00"), ("2024-02-01", "07:00"),
              ("2024-03-10", "12:30"), ("2025-01-01", "00:00")]


def test_increasing_passes():
    assert validate_temporal(_encs(INCREASING)).passed
    assert validate_temporal([]).passed


def test_every_non_identity_permutation_rejected():
    for perm in itertools.permutations(range(5)):
        out = validate_temporal(_encs([INCREASING[i] for i in perm]))
        assert out.passed is (list(perm) == sorted(perm)), perm


@given(st.lists(st.datetimes(), min_size=2, max_size=6, unique=True), st.randoms())
def test_temporal_matches_sorted_check(stamps, rnd):
    stamps = sorted({s.replace(second=0, microsecond=0) for s in stamps})
    rnd.shuffle(stamps)
    encs = _encs([(s.date().isoformat(), s.strftime("%H:%M")) for s in stamps])
    expected = all(a < b for a, b in zip(stamps, stamps[1:]))
    assert validate_temporal(encs).passed is expected


def test_equal_timestamps_rejected():
    out = validate_temporal(_encs([("2024-01-01", "08:00"), ("2024-01-01", "08:00")]))
    assert not out.passed
    assert out.issues[0].location == "(1,2)"


def test_unparseable_timestamp():
    with pytest.raises(UnparseableTimestamp):
        validate_temporal([{"id": "E1", "date": "2024-13-01", "time": "08:00"}])
    with pytest.raises(UnparseableTimestamp):
        validate_temporal([{"id": "E1", "date": "2024-01-01", "time": "25:00"}])
    with pytest.raises(UnparseableTimestamp):
        EncounterInput("E1", "yesterday", "08:00")


def test_semantic_skipped_after_syntactic_failure(schema):
    rep = validate_all("not json", schema, golden.golden_encounters()[:1])
    assert rep.semantic.skipped
    assert rep.failed_stages() == ["syntactic"]


def test_report_json_round_trip(schema):
    rep = validate_all(valid_doc(), schema, golden.golden_encounters()[:1])
    doc = json.loads(rep.to_json())
    assert doc["passed"] is True
