"""Prompted LLM extraction of one encounter transcript into structured json.

The flow per encounter is: render a prompt from the encounter header, the
transcript and an excerpt of the ontology; ask a backend; parse the reply
against the wire schema; on a malformed reply, re-prompt with the parser
error appended until ``max_retries`` is spent.
"""
from __future__ import annotations

import copy
import json
import os
import re
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field
from datetime import date as _date, datetime
from pathlib import Path
from typing import Any, Protocol

from jsonschema import Draft202012Validator

from .errors import BackendUnavailable, ParseFailure, RetryExhausted, UnparseableTimestamp
from .ontology import (
    CAUSED_BY,
    DEFAULT_VALUE,
    HAS_FOLLOWUP,
    HAS_START,
    JOURNEY_EDGES,
    NEXT,
    OntologySchema,
)

ENV_API_KEY = "PJKG_LLM_API_KEY"
ENV_ENDPOINT = "PJKG_LLM_ENDPOINT"
ENV_MODEL = "PJKG_LLM_MODEL"

_TIME_RE = re.compile(r"^([01]\d|2[0-3]):[0-5]\d$")


def parse_date(text: str) -> _date:
    return _date.fromisoformat(text)


def parse_time(text: str) -> tuple[int, int]:
    if not isinstance(text, str) or not _TIME_RE.match(text):
        raise ValueError(f"time must be HH:MM (24h), got {text!r}")
    hh, mm = text.split(":")
    return int(hh), int(mm)


def encounter_timestamp(date_text: str, time_text: str) -> datetime:
    """Combine date and time text into a naive datetime (no timezone math)."""
    d = parse_date(date_text)
    hh, mm = parse_time(time_text)
    return datetime(d.year, d.month, d.day, hh, mm)


@dataclass(frozen=True)
class EncounterInput:
    encounter_id: str
    date: str
    time: str
    transcript: str = ""

    def __post_init__(self):
        if not self.encounter_id:
            raise ValueError("encounter_id must be non-empty")
        try:
            encounter_timestamp(self.date, self.time)
        except (TypeError, ValueError) as exc:
            raise UnparseableTimestamp(
                f"encounter {self.encounter_id}: cannot parse {self.date!r} {self.time!r}: {exc}") from exc

    @property
    def timestamp(self) -> datetime:
        return encounter_timestamp(self.date, self.time)

    def to_dict(self) -> dict:
        return {"id": self.encounter_id, "date": self.date, "time": self.time, "transcript": self.transcript}

    @classmethod
    def from_dict(cls, doc: dict) -> "EncounterInput":
        return cls(doc.get("id") or doc.get("encounter_id", ""), doc["date"], doc["time"], doc.get("transcript", ""))


# -- wire format ------------------------------------------------------------

@dataclass
class EncounterInfo:
    encounter_number: str = DEFAULT_VALUE
    date: str = DEFAULT_VALUE
    time: str = DEFAULT_VALUE


@dataclass
class Symptom:
    name: str
    severity: str = DEFAULT_VALUE


@dataclass
class Diagnosis:
    name: str
    icd10: str = DEFAULT_VALUE


@dataclass
class Medication:
    name: str
    dosage: str = DEFAULT_VALUE


@dataclass
class DiagnosticTest:
    test_name: str
    results: str = DEFAULT_VALUE


@dataclass
class VitalSigns:
    blood_pressure: str = DEFAULT_VALUE
    heart_rate: str = DEFAULT_VALUE
    weight: str = DEFAULT_VALUE


@dataclass
class TextNote:
    text: str = DEFAULT_VALUE


@dataclass
class JourneyLink:
    type: str = HAS_START
    target_encounter: str | None = None


@dataclass
class ExtractionResult:
    encounter: EncounterInfo = field(default_factory=EncounterInfo)
    symptoms: list[Symptom] = field(default_factory=list)
    diagnoses: list[Diagnosis] = field(default_factory=list)
    medications: list[Medication] = field(default_factory=list)
    diagnostic_tests: list[DiagnosticTest] = field(default_factory=list)
    vital_signs: VitalSigns = field(default_factory=VitalSigns)
    assessment: TextNote = field(default_factory=TextNote)
    care_plan: TextNote = field(default_factory=TextNote)
    journey_link: JourneyLink = field(default_factory=JourneyLink)
    # Unknown top-level categories, only populated when parsing in loose mode.
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {k: v for k, v in asdict(self).items() if k != "extra"}
        doc.update(copy.deepcopy(self.extra))
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExtractionResult":
        """Build from an already schema-checked document."""
        known = set(WIRE_FIELDS)
        link = doc["journey_link"]
        return cls(
            encounter=_pick(EncounterInfo, doc["encounter"]),
            symptoms=[_pick(Symptom, s) for s in doc["symptoms"]],
            diagnoses=[_pick(Diagnosis, d) for d in doc["diagnoses"]],
            medications=[_pick(Medication, m) for m in doc["medications"]],
            diagnostic_tests=[_pick(DiagnosticTest, t) for t in doc["diagnostic_tests"]],
            vital_signs=_pick(VitalSigns, doc["vital_signs"]),
            assessment=_pick(TextNote, doc["assessment"]),
            care_plan=_pick(TextNote, doc["care_plan"]),
            journey_link=JourneyLink(link["type"], link.get("target_encounter")),
            extra={k: copy.deepcopy(v) for k, v in doc.items() if k not in known},
        )


def _pick(cls, doc: dict):
    # loose mode lets unknown nested keys through; they are dropped here
    return cls(**{k: v for k, v in doc.items() if k in cls.__dataclass_fields__})


def _obj(*keys: str, nullable: tuple[str, ...] = ()) -> dict:
    return {
        "type": "object",
        "required": list(keys),
        "additionalProperties": False,
        "properties": {k: {"type": ["string", "null"] if k in nullable else "string"} for k in keys},
    }


def _arr(*keys: str) -> dict:
    return {"type": "array", "items": _obj(*keys)}


WIRE_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExtractionResult",
    "type": "object",
    "additionalProperties": False,
    "required": [
        "encounter", "symptoms", "diagnoses", "medications", "diagnostic_tests",
        "vital_signs", "assessment", "care_plan", "journey_link",
    ],
    "properties": {
        "encounter": _obj("encounter_number", "date", "time"),
        "symptoms": _arr("name", "severity"),
        "diagnoses": _arr("name", "icd10"),
        "medications": _arr("name", "dosage"),
        "diagnostic_tests": _arr("test_name", "results"),
        "vital_signs": _obj("blood_pressure", "heart_rate", "weight"),
        "assessment": _obj("text"),
        "care_plan": _obj("text"),
        "journey_link": _obj("type", "target_encounter", nullable=("target_encounter",)),
    },
}
WIRE_FIELDS = tuple(WIRE_SCHEMA["required"])


def _loosen(schema: Any) -> Any:
    if isinstance(schema, dict):
        return {k: _loosen(v) for k, v in schema.items() if k != "additionalProperties"}
    if isinstance(schema, list):
        return [_loosen(v) for v in schema]
    return schema


_STRICT_VALIDATOR = Draft202012Validator(WIRE_SCHEMA)
_LOOSE_VALIDATOR = Draft202012Validator(_loosen(WIRE_SCHEMA))


def format_path(parts) -> str:
    out = ""
    for p in parts:
        if isinstance(p, int):
            out += f"[{p}]"
        else:
            out += f".{p}" if out else str(p)
    return out or "$"


def wire_issues(doc: Any, strict: bool = True) -> list[tuple[str, str]]:
    """(path, message) for every way ``doc`` departs from the wire schema."""
    validator = _STRICT_VALIDATOR if strict else _LOOSE_VALIDATOR
    issues: list[tuple[str, str]] = []
    for err in validator.iter_errors(doc):
        base = list(err.absolute_path)
        if err.validator == "required":
            for key in err.validator_value:
                if isinstance(err.instance, dict) and key not in err.instance:
                    issues.append((format_path(base + [key]), f"missing required key {key!r}"))
        elif err.validator == "additionalProperties":
            allowed = set(err.schema.get("properties", {}))
            for key in sorted(set(err.instance) - allowed):
                issues.append((format_path(base + [key]), f"unknown key {key!r}"))
        else:
            issues.append((format_path(base), err.message))
    return sorted(set(issues))


_FENCE_RE = re.compile(r"```(?:json|JSON)?\s*\n?(.*?)```", re.DOTALL)


def strip_wrapping(raw: str) -> str:
    """Drop markdown fences and any prose around the outermost json object."""
    m = _FENCE_RE.search(raw)
    text = m.group(1) if m else raw
    start, end = text.find("{"), text.rfind("}")
    if start == -1 or end < start:
        return text.strip()
    return text[start:end + 1]


def parse_extraction(raw: str, strict: bool = True) -> ExtractionResult:
    body = strip_wrapping(raw)
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        offset = raw.find(body) + exc.pos if body in raw else exc.pos
        raise ParseFailure(f"invalid json at offset {offset}: {exc.msg}", offset=offset) from exc
    issues = wire_issues(doc, strict=strict)
    if issues:
        path, msg = issues[0]
        more = f" (+{len(issues) - 1} more)" if len(issues) > 1 else ""
        raise ParseFailure(f"{path}: {msg}{more}", path=path)
    return ExtractionResult.from_dict(doc)


# -- prompt -----------------------------------------------------------------

# category key -> (node label, detail edge, field -> node property)
CATEGORIES: dict[str, tuple[str, str | None, dict[str, str]]] = {
    "encounter": ("Encounter", None,
                  {"encounter_number": "Encounter Number", "date": "Date", "time": "Time"}),
    "symptoms": ("Symptoms", "HAS_SYMPTOM", {"name": "Name", "severity": "Severity"}),
    "diagnoses": ("Diagnosis", "HAS_DIAGNOSIS", {"name": "Name", "icd10": "ICD-10"}),
    "medications": ("Medications", "HAS_MEDICATION", {"name": "Name", "dosage": "Dosage"}),
    "diagnostic_tests": ("DiagnosticTests", "HAS_TEST", {"test_name": "Test Name", "results": "Results"}),
    "vital_signs": ("VitalSigns", "HAS_VITALSIGN",
                    {"blood_pressure": "Blood Pressure", "heart_rate": "Heart Rate", "weight": "Weight"}),
    "assessment": ("Assessment", "HAS_ASSESSMENT", {"text": "Text"}),
    "care_plan": ("CarePlan", "HAS_CAREPLAN", {"text": "Text"}),
}

# Spellings a model may have seen for each journey relationship.
_LINK_ALIASES = {
    HAS_START: "has_start",
    HAS_FOLLOWUP: "has_followup",
    CAUSED_BY: "causedby",
    NEXT: "NEXT",
}

_EXAMPLE_OUTPUT = {
    "encounter": {"encounter_number": "2", "date": "2024-03-14", "time": "09:30"},
    "symptoms": [{"name": "shortness of breath", "severity": "moderate"}],
    "diagnoses": [{"name": "hypertension", "icd10": "I10"}],
    "medications": [{"name": "metoprolol", "dosage": "50 mg twice daily"}],
    "diagnostic_tests": [{"test_name": "ECG", "results": "normal sinus rhythm"}],
    "vital_signs": {"blood_pressure": "132/84", "heart_rate": "72", "weight": "81 kg"},
    "assessment": {"text": "Summary of the provider's findings."},
    "care_plan": {"text": "Next steps agreed with the patient."},
    "journey_link": {"type": "HAS_FOLLOWUP", "target_encounter": "PREVIOUS-ENCOUNTER-ID"},
}


@dataclass(frozen=True)
class Prompt:
    text: str
    schema_excerpt: str
    metadata: EncounterInput
    previous_encounter_id: str | None = None


def render_prompt(enc: EncounterInput, schema: OntologySchema,
                  previous_encounter_id: str | None = None) -> Prompt:
    schema_excerpt = json.dumps(WIRE_SCHEMA, indent=2, sort_keys=True)

    categories = []
    for key, (label, _, fields) in CATEGORIES.items():
        if label not in schema.labels:
            continue
        cls = schema.lookup_class(label)
        categories.append(f"- {key}: {label} ({', '.join(cls.property_names)}); json fields: {', '.join(fields)}")

    links = []
    for type_name in JOURNEY_EDGES:
        if type_name not in schema.relationship_types:
            continue
        rel = schema.lookup_relationship(type_name)
        links.append(f"- {type_name} (also written {_LINK_ALIASES[type_name]}): {rel.description}")

    if previous_encounter_id:
        previous = (f"The previous encounter of this patient is {previous_encounter_id}. "
                    f"Set journey_link.target_encounter to {previous_encounter_id!r} and choose the "
                    f"link type that best describes how this encounter relates to it.")
    else:
        previous = ("This is the first encounter of this patient's journey. "
                    f"Use journey_link.type {HAS_START!r} with target_encounter null.")

    text = "\n".join([
        "You extract clinical entities and relationships from one patient-provider conversation.",
        "",
        "## Output requirements",
        "- Reply with exactly one JSON object and nothing else: no prose, no markdown fences.",
        "- Use double-quoted keys and string values only; every key listed below must be present.",
        "- Do not add keys that are not in the output schema.",
        "",
        "## Entity categories",
        *categories,
        "",
        "## Relationship type constraints",
        "journey_link.type must be one of the following (use the upper-case form):",
        *links,
        previous,
        "",
        "## Missing information",
        f'- Any text field not mentioned in the conversation is "{DEFAULT_VALUE}".',
        "- Any list with no mentions is the empty list [].",
        "- Never invent values that are not supported by the transcript.",
        "",
        "## Output schema",
        schema_excerpt,
        "",
        "## Example output",
        json.dumps(_EXAMPLE_OUTPUT, indent=2),
        "",
        "## Encounter",
        f"encounter_id: {enc.encounter_id}",
        f"date: {enc.date}",
        f"time: {enc.time}",
        "",
        "## Transcript",
        "<<<TRANSCRIPT",
        enc.transcript,
        "TRANSCRIPT>>>",
    ])
    return Prompt(text, schema_excerpt, enc, previous_encounter_id)


def repair_message(error: str) -> str:
    return (f"Your previous reply could not be used: {error}\n"
            "Reply again with only the corrected JSON object that follows the output schema.")


# -- backends ---------------------------------------------------------------

@dataclass
class BackendConfig:
    kind: str = "mock"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ENV_API_KEY
    max_retries: int = 2
    timeout: float = 60.0
    fixture_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ValueError(f"backend kind must be mock or http, got {self.kind!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_env(cls, kind: str = "http", **overrides) -> "BackendConfig":
        cfg = dict(
            kind=kind,
            endpoint=os.environ.get(ENV_ENDPOINT, ""),
            model=os.environ.get(ENV_MODEL, ""),
        )
        cfg.update(overrides)
        return cls(**cfg)


class Backend(Protocol):
    config: BackendConfig

    def complete(self, prompt: Prompt, messages: list[dict], attempt: int) -> str: ...


class MockBackend:
    """Canned responses keyed by encounter id.

    A fixture value may be a list, in which case retry ``attempt`` gets the
    corresponding entry (the last entry repeats).
    """

    def __init__(self, responses: dict[str, str | list[str]], config: BackendConfig | None = None):
        self.responses = dict(responses)
        self.config = config or BackendConfig(kind="mock")
        self.calls: list[tuple[str, int]] = []

    @classmethod
    def from_file(cls, path: str | Path, config: BackendConfig | None = None) -> "MockBackend":
        try:
            responses = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise BackendUnavailable(f"mock fixture not readable: {exc}") from exc
        return cls(responses, config)

    def complete(self, prompt: Prompt, messages: list[dict], attempt: int) -> str:
        enc_id = prompt.metadata.encounter_id
        self.calls.append((enc_id, attempt))
        try:
            canned = self.responses[enc_id]
        except KeyError:
            raise BackendUnavailable(f"mock fixture has no response for {enc_id!r}") from None
        if isinstance(canned, list):
            return canned[min(attempt, len(canned) - 1)]
        return canned


class HttpBackend:
    """Chat-completion style adapter: POST {model, messages, temperature}."""

    def __init__(self, config: BackendConfig):
        self.config = config
        if not config.endpoint:
            raise BackendUnavailable(f"no endpoint configured (set {ENV_ENDPOINT})")
        self.api_key = os.environ.get(config.api_key_env)
        if not self.api_key:
            raise BackendUnavailable(f"environment variable {config.api_key_env} is not set")

    def complete(self, prompt: Prompt, messages: list[dict], attempt: int) -> str:
        body = json.dumps({"model": self.config.model, "messages": messages, "temperature": 0}).encode()
        req = urllib.request.Request(
            self.config.endpoint,
            data=body,
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {self.api_key}"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError, json.JSONDecodeError) as exc:
            raise BackendUnavailable(f"backend request failed: {exc}") from exc
        return response_text(payload)


def response_text(payload: dict) -> str:
    """Pull the reply text out of the common chat-completion response shapes."""
    try:
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        pass
    try:
        return payload["content"][0]["text"]
    except (KeyError, IndexError, TypeError):
        pass
    for key in ("text", "output_text", "response"):
        if isinstance(payload.get(key), str):
            return payload[key]
    raise BackendUnavailable("backend response carries no text field")


def make_backend(config: BackendConfig) -> Backend:
    if config.kind == "mock":
        if not config.fixture_path:
            raise BackendUnavailable("mock backend needs a fixture file")
        return MockBackend.from_file(config.fixture_path, config)
    return HttpBackend(config)


def extract(enc: EncounterInput, backend: Backend | BackendConfig, schema: OntologySchema,
            previous_encounter_id: str | None = None, strict: bool = True) -> ExtractionResult:
    if isinstance(backend, BackendConfig):
        backend = make_backend(backend)
    prompt = render_prompt(enc, schema, previous_encounter_id)
    messages = [{"role": "user", "content": prompt.text}]
    attempts: list[str] = []
    errors: list[str] = []
    for attempt in range(backend.config.max_retries + 1):
        raw = backend.complete(prompt, messages, attempt)
        attempts.append(raw)
        try:
            return parse_extraction(raw, strict=strict)
        except ParseFailure as exc:
            errors.append(str(exc))
            messages = messages + [
                {"role": "assistant", "content": raw},
                {"role": "user", "content": repair_message(str(exc))},
            ]
    raise RetryExhausted(
        f"{enc.encounter_id}: no valid output after {len(attempts)} attempts; last error: {errors[-1]}",
        attempts, errors,
    )
