"""Syntactic, semantic and temporal checks on extraction output.

None of these functions mutate anything; failures are reported as
``Issue`` records.  The one hard error is an unparseable timestamp, since
encounter order cannot be decided without it.
"""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping

from .errors import UnparseableTimestamp
from .extraction import CATEGORIES, ExtractionResult, encounter_timestamp, strip_wrapping, wire_issues
from .ontology import DEFAULT_VALUE, HAS_START, OntologySchema

SYNTACTIC, SEMANTIC, TEMPORAL = "syntactic", "semantic", "temporal"

ICD10_RE = re.compile(r"^[A-Z][0-9]{2}(\.[0-9A-Z]{1,4})?$")


@dataclass
class Issue:
    stage: str
    location: str
    message: str

    def __post_init__(self):
        if not self.location:
            raise ValueError("issue location must be non-empty")


@dataclass
class StageOutcome:
    stage: str
    passed: bool
    issues: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)
    skipped: bool = False


@dataclass
class ValidationReport:
    syntactic: StageOutcome
    semantic: StageOutcome
    temporal: StageOutcome

    @property
    def passed(self) -> bool:
        return self.syntactic.passed and self.semantic.passed and self.temporal.passed

    @property
    def issues(self) -> list[Issue]:
        return self.syntactic.issues + self.semantic.issues + self.temporal.issues

    @property
    def warnings(self) -> list[Issue]:
        return self.syntactic.warnings + self.semantic.warnings + self.temporal.warnings

    def failed_stages(self) -> list[str]:
        return [s.stage for s in (self.syntactic, self.semantic, self.temporal) if not s.passed and not s.skipped]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "syntactic": asdict(self.syntactic),
            "semantic": asdict(self.semantic),
            "temporal": asdict(self.temporal),
            "warnings": [asdict(w) for w in self.warnings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _outcome(stage: str, issues: list[Issue], warnings: list[Issue] | None = None) -> StageOutcome:
    return StageOutcome(stage, not issues, issues, warnings or [])


def validate_syntactic(doc: ExtractionResult | Mapping | str, strict: bool = True) -> StageOutcome:
    if isinstance(doc, ExtractionResult):
        doc = doc.to_dict()
    elif isinstance(doc, str):
        body = strip_wrapping(doc)
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as exc:
            return _outcome(SYNTACTIC, [Issue(SYNTACTIC, f"offset {exc.pos}", f"invalid json: {exc.msg}")])
    issues = [Issue(SYNTACTIC, path, msg) for path, msg in wire_issues(doc, strict=strict)]
    if not issues:
        link = doc["journey_link"]
        if link["type"] == HAS_START and link.get("target_encounter") is not None:
            issues.append(Issue(SYNTACTIC, "journey_link.target_encounter",
                                "must be null when the link type is HAS_START"))
    return _outcome(SYNTACTIC, issues)


def _norm_label(text: str) -> str:
    return re.sub(r"[\s_\-]", "", text).lower()


def _is_set(value: str | None) -> bool:
    return value is not None and value.strip() != "" and value != DEFAULT_VALUE


def validate_semantic(result: ExtractionResult, schema: OntologySchema,
                      is_first: bool | None = None) -> StageOutcome:
    """Every extracted category must be an ontology class and the journey link an ontology relationship."""
    issues: list[Issue] = []
    warnings: list[Issue] = []

    extracted: list[tuple[str, str, str | None, list[str]]] = [("encounter", *CATEGORIES["encounter"][:2],
                                                               list(CATEGORIES["encounter"][2].values()))]
    for key in ("symptoms", "diagnoses", "medications", "diagnostic_tests"):
        if getattr(result, key):
            label, edge, fields = CATEGORIES[key]
            extracted.append((key, label, edge, list(fields.values())))
    for key in ("vital_signs", "assessment", "care_plan"):
        obj = getattr(result, key)
        if any(_is_set(v) for v in vars(obj).values()):
            label, edge, fields = CATEGORIES[key]
            extracted.append((key, label, edge, list(fields.values())))

    for key, label, edge, props in extracted:
        if label not in schema.labels:
            issues.append(Issue(SEMANTIC, key, f"entity category {label!r} is not an ontology class"))
            continue
        cls = schema.lookup_class(label)
        for prop in props:
            if not cls.has_property(prop):
                issues.append(Issue(SEMANTIC, key, f"class {label!r} has no property {prop!r}"))
        if edge is not None and schema.relationship_for(edge, "Encounter", label) is None:
            issues.append(Issue(SEMANTIC, key, f"relationship Encounter-[{edge}]->{label} is not in the ontology"))

    known_labels = {_norm_label(lbl) for lbl in schema.labels}
    for key in sorted(result.extra):
        if _norm_label(key) not in known_labels:
            issues.append(Issue(SEMANTIC, key, f"entity category {key!r} is not an ontology class"))

    for i, dx in enumerate(result.diagnoses):
        if _is_set(dx.icd10) and not ICD10_RE.match(dx.icd10):
            issues.append(Issue(SEMANTIC, f"diagnoses[{i}].icd10", f"{dx.icd10!r} is not shaped like an ICD-10 code"))

    link = result.journey_link
    if link.type not in schema.relationship_types:
        issues.append(Issue(SEMANTIC, "journey_link.type", f"relationship {link.type!r} is not in the ontology"))
    else:
        src = "Patient" if link.type == HAS_START else "Encounter"
        if schema.relationship_for(link.type, src, "Encounter") is None:
            issues.append(Issue(SEMANTIC, "journey_link.type",
                                f"{link.type!r} does not link {src} to Encounter in the ontology"))
        if link.type == HAS_START and is_first is False:
            warnings.append(Issue(SEMANTIC, "journey_link.type",
                                  "HAS_START asserted on a non-first encounter; the pipeline links it to its predecessor"))
        if link.type != HAS_START and is_first is True:
            warnings.append(Issue(SEMANTIC, "journey_link.type",
                                  f"first encounter carries {link.type}; HAS_START is forced"))
        if link.type != HAS_START and link.target_encounter is None and is_first is False:
            warnings.append(Issue(SEMANTIC, "journey_link.target_encounter",
                                  "no predecessor named; the previous integrated encounter is used"))
    return _outcome(SEMANTIC, issues, warnings)


def _timestamp(enc: Any, index: int):
    if isinstance(enc, Mapping):
        date_text, time_text = enc.get("date"), enc.get("time")
        enc_id = enc.get("id") or enc.get("encounter_id")
    else:
        date_text, time_text = enc.date, enc.time
        enc_id = getattr(enc, "encounter_id", None)
    try:
        return encounter_timestamp(date_text, time_text)
    except (TypeError, ValueError) as exc:
        raise UnparseableTimestamp(
            f"encounter {index} ({enc_id}): cannot parse {date_text!r} {time_text!r}: {exc}"
        ) from exc


def validate_temporal(encounters: Iterable[Any]) -> StageOutcome:
    """Timestamps must strictly increase with the sequence index (1-based pairs in issues)."""
    stamps = [_timestamp(enc, j) for j, enc in enumerate(encounters, start=1)]
    issues = []
    for j in range(1, len(stamps)):
        if not stamps[j - 1] < stamps[j]:
            issues.append(Issue(TEMPORAL, f"({j},{j + 1})",
                                f"encounter {j} at {stamps[j - 1].isoformat()} is not before "
                                f"encounter {j + 1} at {stamps[j].isoformat()}"))
    return _outcome(TEMPORAL, issues)


def validate_all(result: ExtractionResult | Mapping | str, schema: OntologySchema,
                 encounter_history: list[Any], strict: bool = True) -> ValidationReport:
    """Run all three stages.  ``encounter_history`` ends with the encounter being validated."""
    syntactic = validate_syntactic(result, strict=strict)
    if syntactic.passed:
        if not isinstance(result, ExtractionResult):
            doc = json.loads(strip_wrapping(result)) if isinstance(result, str) else result
            result = ExtractionResult.from_dict(doc)
        semantic = validate_semantic(result, schema, is_first=len(encounter_history) == 1)
    else:
        semantic = StageOutcome(SEMANTIC, False, [Issue(SEMANTIC, "$", "skipped: syntactic validation failed")],
                                skipped=True)
    temporal = validate_temporal(encounter_history)
    return ValidationReport(syntactic, semantic, temporal)
