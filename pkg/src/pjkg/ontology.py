"""PJKG ontology: node classes, their properties and typed relationships.

The default schema has 11 instantiable node labels carrying 37 properties
and 13 relationship types.  ``IntakeForm`` is only a grouping parent for the
two history classes and is never used as a node label.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import SchemaError, UnknownClass, UnknownRelationship

VALUE_KINDS = ("text", "date", "time", "numeric-as-text")
CARDINALITIES = ("one", "many")

# Sentinel written for scalar fields the conversation never mentioned.
DEFAULT_VALUE = "unknown"

HAS_START = "HAS_START"
HAS_FOLLOWUP = "HAS_FOLLOWUP"
NEXT = "NEXT"
CAUSED_BY = "CAUSED_BY"

JOURNEY_EDGES = (HAS_START, HAS_FOLLOWUP, NEXT, CAUSED_BY)
# Edges that continue a journey from one encounter to the next.
SUCCESSOR_EDGES = (HAS_FOLLOWUP, NEXT, CAUSED_BY)
INTAKE_EDGES = ("HAS_MEDICAL_HISTORY", "HAS_SOCIAL_HISTORY")
DETAIL_EDGES = (
    "HAS_SYMPTOM",
    "HAS_DIAGNOSIS",
    "HAS_MEDICATION",
    "HAS_TEST",
    "HAS_VITALSIGN",
    "HAS_CAREPLAN",
    "HAS_ASSESSMENT",
)


@dataclass(frozen=True)
class PropertyDef:
    name: str
    value_kind: str = "text"
    required: bool = False

    def __post_init__(self):
        if self.value_kind not in VALUE_KINDS:
            raise SchemaError(f"property {self.name!r}: bad value kind {self.value_kind!r}")


@dataclass(frozen=True)
class ClassDef:
    label: str
    properties: tuple[PropertyDef, ...]
    parent: str | None = None

    def __post_init__(self):
        names = [p.name for p in self.properties]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"class {self.label!r}: duplicate properties {sorted(dupes)}")

    @property
    def property_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.properties)

    def has_property(self, name: str) -> bool:
        return any(p.name == name for p in self.properties)


@dataclass(frozen=True)
class RelationshipDef:
    """A typed edge between two classes.

    ``alternative_group`` names a set of mutually exclusive relationship
    types.  Completeness treats a group as one requirement, since a single
    encounter-to-encounter link can only carry one of them.
    """

    type_name: str
    source_label: str
    target_label: str
    cardinality: str = "many"
    description: str = ""
    alternative_group: str | None = None

    def __post_init__(self):
        if self.cardinality not in CARDINALITIES:
            raise SchemaError(f"relationship {self.type_name!r}: bad cardinality {self.cardinality!r}")


@dataclass(frozen=True)
class OntologySchema:
    classes: tuple[ClassDef, ...] = ()
    relationships: tuple[RelationshipDef, ...] = ()
    version: str = "custom"
    _by_label: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "relationships", tuple(self.relationships))
        by_label: dict[str, ClassDef] = {}
        for cls in self.classes:
            if cls.label in by_label:
                raise SchemaError(f"duplicate class label {cls.label!r}")
            by_label[cls.label] = cls
        object.__setattr__(self, "_by_label", by_label)

        seen = set()
        for rel in self.relationships:
            key = (rel.type_name, rel.source_label, rel.target_label)
            if key in seen:
                raise SchemaError(f"duplicate relationship definition {key}")
            seen.add(key)
            for end in (rel.source_label, rel.target_label):
                if end not in by_label:
                    raise SchemaError(f"relationship {rel.type_name!r} names unknown class {end!r}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)

    @property
    def relationship_types(self) -> tuple[str, ...]:
        out: list[str] = []
        for rel in self.relationships:
            if rel.type_name not in out:
                out.append(rel.type_name)
        return tuple(out)

    def lookup_class(self, label: str) -> ClassDef:
        try:
            return self._by_label[label]
        except KeyError:
            raise UnknownClass(label) from None

    def lookup_relationship(self, type_name: str) -> RelationshipDef:
        for rel in self.relationships:
            if rel.type_name == type_name:
                return rel
        raise UnknownRelationship(type_name)

    def relationship_for(self, type_name: str, source_label: str, target_label: str) -> RelationshipDef | None:
        for rel in self.relationships:
            if (rel.type_name, rel.source_label, rel.target_label) == (type_name, source_label, target_label):
                return rel
        return None

    def relationship_requirements(self) -> list[frozenset[str]]:
        """Relationship types grouped into completeness requirements, in schema order."""
        groups: dict[str, set[str]] = {}
        order: list[str] = []
        for rel in self.relationships:
            key = f"group:{rel.alternative_group}" if rel.alternative_group else f"type:{rel.type_name}"
            if key not in groups:
                groups[key] = set()
                order.append(key)
            groups[key].add(rel.type_name)
        return [frozenset(groups[k]) for k in order]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "classes": [
                {
                    "label": c.label,
                    "parent": c.parent,
                    "properties": [
                        {"name": p.name, "value_kind": p.value_kind, "required": p.required}
                        for p in c.properties
                    ],
                }
                for c in self.classes
            ],
            "relationships": [
                {
                    "type_name": r.type_name,
                    "source_label": r.source_label,
                    "target_label": r.target_label,
                    "cardinality": r.cardinality,
                    "description": r.description,
                    "alternative_group": r.alternative_group,
                }
                for r in self.relationships
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OntologySchema":
        try:
            classes = [
                ClassDef(
                    label=c["label"],
                    parent=c.get("parent"),
                    properties=tuple(
                        PropertyDef(p["name"], p.get("value_kind", "text"), bool(p.get("required", False)))
                        for p in c["properties"]
                    ),
                )
                for c in doc["classes"]
            ]
            rels = [
                RelationshipDef(
                    type_name=r["type_name"],
                    source_label=r["source_label"],
                    target_label=r["target_label"],
                    cardinality=r.get("cardinality", "many"),
                    description=r.get("description", ""),
                    alternative_group=r.get("alternative_group"),
                )
                for r in doc["relationships"]
            ]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema document: {exc}") from exc
        return cls(tuple(classes), tuple(rels), str(doc.get("version", "custom")))


def _props(*names: str, kinds: dict[str, str] | None = None, required: Iterable[str] = ()) -> tuple[PropertyDef, ...]:
    kinds = kinds or {}
    req = set(required)
    return tuple(PropertyDef(n, kinds.get(n, "text"), n in req) for n in names)


_DEFAULT_CLASSES = (
    ClassDef(
        "Patient",
        _props("ID", "Name", "DoB", "Gender", "Race", "Contact Info", "Insurance Name", "Insurance ID",
               kinds={"DoB": "date"}, required=("ID",)),
    ),
    ClassDef(
        "SocialHistory",
        _props("Exercise", "Diet", "Drinking", "Smoking", "Occupation", "Marital Status",
               "Education Level", "Annual Income", kinds={"Annual Income": "numeric-as-text"}),
        parent="IntakeForm",
    ),
    ClassDef(
        "MedicalHistory",
        _props("Family History", "Surgeries", "Chronic Illnesses", "Allergies", "Current Medications"),
        parent="IntakeForm",
    ),
    ClassDef(
        "Encounter",
        _props("Encounter Number", "Date", "Time",
               kinds={"Encounter Number": "numeric-as-text", "Date": "date", "Time": "time"},
               required=("Encounter Number", "Date", "Time")),
    ),
    ClassDef("Diagnosis", _props("Name", "ICD-10", required=("Name",)), parent="Encounter"),
    ClassDef("Symptoms", _props("Name", "Severity", required=("Name",)), parent="Encounter"),
    ClassDef("Medications", _props("Name", "Dosage", required=("Name",)), parent="Encounter"),
    ClassDef("DiagnosticTests", _props("Test Name", "Results", required=("Test Name",)), parent="Encounter"),
    ClassDef("CarePlan", _props("Text"), parent="Encounter"),
    ClassDef("Assessment", _props("Text"), parent="Encounter"),
    ClassDef(
        "VitalSigns",
        _props("Blood Pressure", "Heart Rate", "Weight",
               kinds={"Heart Rate": "numeric-as-text", "Weight": "numeric-as-text"}),
        parent="Encounter",
    ),
)

_DEFAULT_RELATIONSHIPS = (
    RelationshipDef(HAS_START, "Patient", "Encounter", "one",
                    "Start of the patient journey; only between the Patient and the first Encounter"),
    RelationshipDef(HAS_FOLLOWUP, "Encounter", "Encounter", "one",
                    "Sequential encounter following up on a medical condition", "successor"),
    RelationshipDef(NEXT, "Encounter", "Encounter", "one",
                    "New encounter not related to the previous encounter", "successor"),
    RelationshipDef(CAUSED_BY, "Encounter", "Encounter", "one",
                    "The new encounter is a referral caused by the previous encounter", "successor"),
    RelationshipDef("HAS_MEDICAL_HISTORY", "Patient", "MedicalHistory", "one", "Intake medical history"),
    RelationshipDef("HAS_SOCIAL_HISTORY", "Patient", "SocialHistory", "one", "Intake social history"),
    RelationshipDef("HAS_SYMPTOM", "Encounter", "Symptoms", "many", "Symptom reported during the encounter"),
    RelationshipDef("HAS_DIAGNOSIS", "Encounter", "Diagnosis", "many", "Diagnosis made during the encounter"),
    RelationshipDef("HAS_MEDICATION", "Encounter", "Medications", "many", "Medication prescribed or reviewed"),
    RelationshipDef("HAS_TEST", "Encounter", "DiagnosticTests", "many", "Diagnostic test ordered or reviewed"),
    RelationshipDef("HAS_VITALSIGN", "Encounter", "VitalSigns", "one", "Vital signs measured"),
    RelationshipDef("HAS_CAREPLAN", "Encounter", "CarePlan", "one", "Next steps based on the diagnosis"),
    RelationshipDef("HAS_ASSESSMENT", "Encounter", "Assessment", "one", "Summary of the provider's findings"),
)

DEFAULT_SCHEMA_VERSION = "pjkg-1.0"


def load_default_schema() -> OntologySchema:
    return OntologySchema(_DEFAULT_CLASSES, _DEFAULT_RELATIONSHIPS, DEFAULT_SCHEMA_VERSION)


def load_schema(path: str | Path | None = None) -> OntologySchema:
    """Load a schema json document, or the built-in schema when ``path`` is None."""
    if path is None:
        return load_default_schema()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return OntologySchema.from_dict(doc)


def lookup_class(schema: OntologySchema, label: str) -> ClassDef:
    return schema.lookup_class(label)


def lookup_relationship(schema: OntologySchema, type_name: str) -> RelationshipDef:
    return schema.lookup_relationship(type_name)


def required_counts(schema: OntologySchema) -> tuple[int, int, int]:
    """(class count, property count, relationship type count)."""
    return (
        len(schema.classes),
        sum(len(c.properties) for c in schema.classes),
        len(schema.relationship_types),
    )
