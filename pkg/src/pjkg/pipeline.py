"""End-to-end PJKG construction for one patient or a whole corpus.

Per patient: merge the profile subgraph, then for each encounter in order
extract, validate, turn the result into a subgraph and merge it.  An
encounter that fails is skipped and the journey continues from the last
encounter that was integrated.
"""
from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ConstraintViolation,
    DanglingEndpoint,
    DuplicateIdConflict,
    DuplicatePatientId,
    IoFailure,
    MissingPatientId,
    ParseFailure,
    RetryExhausted,
)
from .extraction import CATEGORIES, Backend, EncounterInput, ExtractionResult, extract
from .graph import Edge, Node, PropertyGraph, Subgraph
from .ontology import DEFAULT_VALUE, HAS_START, NEXT, OntologySchema, load_default_schema
from .validation import SEMANTIC, SYNTACTIC, TEMPORAL, Issue, StageOutcome, ValidationReport, validate_all, \
    validate_temporal

log = logging.getLogger(__name__)


@dataclass
class PatientBundle:
    profile: dict[str, str]
    medical_history: dict[str, str] = field(default_factory=dict)
    social_history: dict[str, str] = field(default_factory=dict)
    encounters: list[EncounterInput] = field(default_factory=list)

    @property
    def patient_id(self) -> str:
        return str(self.profile.get("ID", "") or "")

    def to_dict(self) -> dict:
        return {
            "profile": dict(self.profile),
            "medical_history": dict(self.medical_history),
            "social_history": dict(self.social_history),
        }


@dataclass
class BuildOutcome:
    patient_id: str
    pjkg: PropertyGraph
    per_encounter_reports: list[ValidationReport] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    integrated: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    aborted: bool = False

    def summary(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "integrated": list(self.integrated),
            "skipped": [{"encounter_id": e, "reason": r} for e, r in self.skipped],
            "warnings": list(self.warnings),
            "aborted": self.aborted,
            "nodes": self.pjkg.node_count,
            "edges": self.pjkg.edge_count,
        }


def normalize_name(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower())


def _is_set(value: str | None) -> bool:
    return value is not None and value.strip() != "" and value != DEFAULT_VALUE


def _with_defaults(schema: OntologySchema, label: str, values: dict) -> dict[str, str]:
    props = {name: DEFAULT_VALUE for name in schema.lookup_class(label).property_names}
    for k, v in values.items():
        props[k] = DEFAULT_VALUE if v is None or str(v).strip() == "" else str(v)
    return props


def build_patient_profile(bundle: PatientBundle, schema: OntologySchema | None = None) -> Subgraph:
    schema = schema or load_default_schema()
    pid = bundle.patient_id
    if not pid.strip():
        raise MissingPatientId("patient profile has no ID")
    patient = Node(pid, "Patient", _with_defaults(schema, "Patient", bundle.profile))
    medical = Node(f"{pid}:MedicalHistory", "MedicalHistory",
                   _with_defaults(schema, "MedicalHistory", bundle.medical_history))
    social = Node(f"{pid}:SocialHistory", "SocialHistory",
                  _with_defaults(schema, "SocialHistory", bundle.social_history))
    return Subgraph(
        [patient, medical, social],
        [Edge(pid, medical.id, "HAS_MEDICAL_HISTORY"), Edge(pid, social.id, "HAS_SOCIAL_HISTORY")],
    )


def encounter_node_id(patient_id: str, j: int) -> str:
    return f"{patient_id}:{j}"


_NAME_FIELD = {"symptoms": "name", "diagnoses": "name", "medications": "name", "diagnostic_tests": "test_name"}


def encounter_to_subgraph(patient_id: str, j: int, result: ExtractionResult,
                          predecessor: str | None | bool = True,
                          encounter: EncounterInput | None = None,
                          notes: list[str] | None = None) -> Subgraph:
    """Subgraph for the ``j``-th encounter (1-based).

    ``predecessor`` is the node id the journey edge starts from.  The default
    (True) means the encounter at ``j - 1``; None means this encounter starts
    the journey and gets HAS_START from the patient.
    """
    notes = notes if notes is not None else []
    enc_id = encounter_node_id(patient_id, j)
    if predecessor is True:
        predecessor = encounter_node_id(patient_id, j - 1) if j > 1 else None

    enc_props = {
        "Encounter Number": str(j),
        "Date": encounter.date if encounter else result.encounter.date,
        "Time": encounter.time if encounter else result.encounter.time,
    }
    sub = Subgraph([Node(enc_id, "Encounter", enc_props)], [])
    seen: set[str] = set()

    def attach(node_id: str, label: str, edge_type: str, values: dict) -> None:
        if node_id in seen:
            notes.append(f"{enc_id}: duplicate {label} item {node_id!r} ignored")
            return
        seen.add(node_id)
        sub.nodes.append(Node(node_id, label, {k: DEFAULT_VALUE if not _is_set(v) else v for k, v in values.items()}))
        sub.edges.append(Edge(enc_id, node_id, edge_type))

    for key, name_field in _NAME_FIELD.items():
        label, edge_type, fields = CATEGORIES[key]
        for item in getattr(result, key):
            name = getattr(item, name_field)
            if not _is_set(name):
                continue
            values = {prop: getattr(item, f) for f, prop in fields.items()}
            attach(f"{enc_id}:{label}:{normalize_name(name)}", label, edge_type, values)

    label, edge_type, fields = CATEGORIES["vital_signs"]
    if any(_is_set(getattr(result.vital_signs, f)) for f in fields):
        attach(f"{enc_id}:{label}", label, edge_type, {p: getattr(result.vital_signs, f) for f, p in fields.items()})
    for key in ("assessment", "care_plan"):
        label, edge_type, _ = CATEGORIES[key]
        attach(f"{enc_id}:{label}", label, edge_type, {"Text": getattr(result, key).text})

    link = result.journey_link.type
    if predecessor is None:
        if link != HAS_START:
            notes.append(f"{enc_id}: model link {link} replaced by HAS_START for the first encounter")
        sub.edges.append(Edge(patient_id, enc_id, HAS_START))
    else:
        if link == HAS_START:
            notes.append(f"{enc_id}: HAS_START on a non-first encounter downgraded to NEXT")
            link = NEXT
        sub.edges.append(Edge(predecessor, enc_id, link))
    return sub


def _failure_report(history: list[EncounterInput], errors: list[str]) -> ValidationReport:
    syn = StageOutcome(SYNTACTIC, False, [Issue(SYNTACTIC, "$", e) for e in errors])
    sem = StageOutcome(SEMANTIC, False, [Issue(SEMANTIC, "$", "skipped: syntactic validation failed")], skipped=True)
    return ValidationReport(syn, sem, validate_temporal(history))


def _aborted_report() -> ValidationReport:
    def stage(name):
        return StageOutcome(name, False, [Issue(name, "$", "skipped: patient aborted")], skipped=True)
    return ValidationReport(stage(SYNTACTIC), stage(SEMANTIC), stage(TEMPORAL))


def build_pjkg(bundle: PatientBundle, backend: Backend, schema: OntologySchema | None = None,
               strict: bool = False) -> BuildOutcome:
    schema = schema or load_default_schema()
    graph = PropertyGraph(schema)
    graph.merge_subgraph(build_patient_profile(bundle, schema))
    pid = bundle.patient_id
    outcome = BuildOutcome(pid, graph)

    history: list[EncounterInput] = []
    prev_node: str | None = None
    for j, enc in enumerate(bundle.encounters, start=1):
        if outcome.aborted:
            outcome.per_encounter_reports.append(_aborted_report())
            outcome.skipped.append((enc.encounter_id, "patient aborted (strict mode)"))
            continue
        previous_id = history[-1].encounter_id if history else None
        candidate_history = history + [enc]
        reason = None
        try:
            result = extract(enc, backend, schema, previous_encounter_id=previous_id)
        except RetryExhausted as exc:
            report = _failure_report(candidate_history, exc.errors)
            reason = f"extraction failed: {exc}"
        else:
            report = validate_all(result, schema, candidate_history)
            if not report.passed:
                first = report.issues[0]
                reason = f"{'/'.join(report.failed_stages())} validation failed: {first.location}: {first.message}"
        outcome.per_encounter_reports.append(report)
        outcome.warnings += [f"{enc.encounter_id}: {w.location}: {w.message}" for w in report.warnings]

        if reason is None:
            if (previous_id and result.journey_link.target_encounter
                    and result.journey_link.target_encounter != previous_id):
                outcome.warnings.append(
                    f"{enc.encounter_id}: model named predecessor {result.journey_link.target_encounter!r}, "
                    f"linked from {previous_id!r}")
            sub = encounter_to_subgraph(pid, j, result, predecessor=prev_node, encounter=enc,
                                        notes=outcome.warnings)
            try:
                graph.merge_subgraph(sub)
            except (ConstraintViolation, DanglingEndpoint, DuplicateIdConflict) as exc:
                reason = f"integration failed: {exc}"
            else:
                history.append(enc)
                prev_node = encounter_node_id(pid, j)
                outcome.integrated.append(enc.encounter_id)

        if reason is not None:
            log.info("skipping %s: %s", enc.encounter_id, reason)
            outcome.skipped.append((enc.encounter_id, reason))
            if strict:
                outcome.aborted = True
    return outcome


def build_corpus(bundles: list[PatientBundle], backend: Backend, schema: OntologySchema | None = None,
                 parallelism: int = 1, strict: bool = False) -> list[BuildOutcome]:
    ids = [b.patient_id for b in bundles]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise DuplicatePatientId(f"duplicate patient ids: {dupes}")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    schema = schema or load_default_schema()
    if parallelism == 1:
        return [build_pjkg(b, backend, schema, strict) for b in bundles]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda b: build_pjkg(b, backend, schema, strict), bundles))


# -- bundle directories -----------------------------------------------------

def write_bundle(bundle: PatientBundle, root: str | Path) -> Path:
    """Write ``<root>/<patient_id>/patient.json`` and ``encounters/<j>_<id>.json``."""
    pdir = Path(root) / bundle.patient_id
    (pdir / "encounters").mkdir(parents=True, exist_ok=True)
    _dump(bundle.to_dict(), pdir / "patient.json")
    width = max(2, len(str(len(bundle.encounters))))
    for j, enc in enumerate(bundle.encounters, start=1):
        _dump(enc.to_dict(), pdir / "encounters" / f"{j:0{width}d}_{enc.encounter_id}.json")
    return pdir


def _dump(doc, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8", newline="")


def load_bundle(pdir: str | Path) -> PatientBundle:
    pdir = Path(pdir)
    try:
        doc = json.loads((pdir / "patient.json").read_text(encoding="utf-8"))
        encounters = [
            EncounterInput.from_dict(json.loads(p.read_text(encoding="utf-8")))
            for p in sorted((pdir / "encounters").glob("*.json"))
        ]
    except OSError as exc:
        raise IoFailure(f"cannot read bundle {pdir}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ParseFailure(f"bad bundle {pdir}: {exc}") from exc
    return PatientBundle(
        profile={k: str(v) for k, v in doc.get("profile", {}).items()},
        medical_history={k: str(v) for k, v in doc.get("medical_history", {}).items()},
        social_history={k: str(v) for k, v in doc.get("social_history", {}).items()},
        encounters=encounters,
    )


def load_corpus(root: str | Path) -> list[PatientBundle]:
    root = Path(root)
    if not root.is_dir():
        raise IoFailure(f"input directory {root} does not exist")
    return [load_bundle(p.parent) for p in sorted(root.glob("*/patient.json"))]
