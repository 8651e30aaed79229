"""Seeded generator of synthetic patient bundles, mock replies and ground truth.

The default roster mirrors the study cohort's shape: six patients, three
cardiology and three oncology, three men and three women aged 45 to 69,
five with hypertension and two with diabetes, three former smokers.  The
first patient is the hand-authored mitral valve journey from
:mod:`pjkg.golden`.  All content is synthetic.

Mock replies can carry seeded extraction noise (dropped items, a spurious
symptom, a wrong journey link) so that accuracy scoring against the clean
ground truth is not trivially perfect.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path

from . import golden
from .export import to_json
from .extraction import (
    DiagnosticTest,
    Diagnosis,
    EncounterInfo,
    EncounterInput,
    ExtractionResult,
    JourneyLink,
    Medication,
    Symptom,
    TextNote,
    VitalSigns,
)
from .graph import PropertyGraph
from .ontology import CAUSED_BY, HAS_FOLLOWUP, HAS_START, NEXT, OntologySchema, load_default_schema
from .pipeline import PatientBundle, build_patient_profile, encounter_to_subgraph, write_bundle

GROUND_TRUTH_PATIENTS = ("PA56789", "PM82487")


@dataclass(frozen=True)
class Condition:
    name: str
    icd10: str
    symptoms: tuple[tuple[str, str], ...]
    medications: tuple[tuple[str, str], ...]
    tests: tuple[tuple[str, str], ...]
    plan: str


CARDIOLOGY = {
    "afib": Condition(
        "atrial fibrillation", "I48.91",
        (("palpitations", "moderate"), ("fatigue", "mild"), ("lightheadedness", "mild"),
         ("shortness of breath", "mild")),
        (("apixaban", "5 mg twice daily"), ("diltiazem", "120 mg daily"), ("lisinopril", "10 mg daily")),
        (("ECG", "irregularly irregular rhythm, ventricular rate 112"),
         ("Holter monitor", "paroxysmal atrial fibrillation, 18% burden"),
         ("transthoracic echocardiogram", "mild left atrial enlargement, ejection fraction 57%"),
         ("TSH", "within normal limits")),
        "rate control, anticoagulation and rhythm review",
    ),
    "copd": Condition(
        "chronic obstructive pulmonary disease", "J44.9",
        (("shortness of breath", "moderate"), ("chronic cough", "moderate"), ("wheezing", "mild"),
         ("fatigue", "mild")),
        (("tiotropium", "18 mcg inhaled daily"), ("albuterol", "2 puffs as needed"),
         ("lisinopril", "20 mg daily")),
        (("spirometry", "FEV1/FVC 0.62, moderate obstruction"), ("chest X-ray", "hyperinflation, no infiltrate"),
         ("pulse oximetry", "94% on room air")),
        "inhaler optimisation, pulmonary rehabilitation and blood pressure control",
    ),
    "hypertension": Condition(
        "essential hypertension", "I10",
        (("headache", "mild"), ("fatigue", "mild")),
        (("lisinopril", "20 mg daily"), ("amlodipine", "5 mg daily")),
        (("basic metabolic panel", "potassium 4.2, creatinine 0.9"), ("ECG", "normal sinus rhythm")),
        "home blood pressure log and salt restriction",
    ),
}

ONCOLOGY = {
    "breast": Condition(
        "malignant neoplasm of breast", "C50.911",
        (("breast lump", "mild"), ("fatigue", "moderate"), ("nausea", "mild"), ("hot flashes", "moderate")),
        (("tamoxifen", "20 mg daily"), ("trastuzumab", "6 mg/kg every 3 weeks"), ("ondansetron", "8 mg as needed")),
        (("mammogram", "2.1 cm spiculated mass, BI-RADS 5"), ("core needle biopsy", "invasive ductal carcinoma, HER2 positive"),
         ("echocardiogram", "ejection fraction 62%"), ("complete blood count", "WBC 4.1, hemoglobin 11.8")),
        "systemic therapy with cardiac monitoring and surgical planning",
    ),
    "colon": Condition(
        "malignant neoplasm of colon", "C18.9",
        (("abdominal pain", "moderate"), ("fatigue", "moderate"), ("change in bowel habits", "mild"),
         ("weight loss", "mild")),
        (("capecitabine", "1000 mg/m2 twice daily"), ("oxaliplatin", "130 mg/m2 every 3 weeks"),
         ("ondansetron", "8 mg as needed")),
        (("colonoscopy", "ulcerated mass in sigmoid colon"), ("CT abdomen", "no distant metastases"),
         ("CEA", "8.4 ng/mL"), ("complete blood count", "hemoglobin 10.9")),
        "adjuvant chemotherapy and surveillance imaging",
    ),
}

# Unrelated problems used for NEXT encounters.
INTERCURRENT = (
    Condition("acute bronchitis", "J20.9", (("cough", "moderate"), ("sore throat", "mild")),
              (("benzonatate", "100 mg three times daily"),), (("chest X-ray", "no consolidation"),),
              "supportive care and fluids"),
    Condition("low back pain", "M54.5", (("low back pain", "moderate"),),
              (("ibuprofen", "400 mg as needed"),), (("lumbar spine X-ray", "mild degenerative changes"),),
              "physical therapy and activity as tolerated"),
    Condition("seasonal allergic rhinitis", "J30.2", (("nasal congestion", "mild"), ("sneezing", "mild")),
              (("fluticasone nasal spray", "2 sprays daily"),), (("allergy skin test", "positive to grass pollen"),),
              "intranasal steroid and allergen avoidance"),
)


@dataclass(frozen=True)
class RosterEntry:
    patient_id: str
    specialty: str
    condition: str
    gender: str
    age: int
    hypertension: bool
    diabetes: bool
    former_smoker: bool


ROSTER = (
    RosterEntry("PA56789", "cardiology", "mitral", "Male", 64, True, False, True),
    RosterEntry("PM82487", "cardiology", "afib", "Male", 58, True, True, True),
    RosterEntry("PC31415", "cardiology", "copd", "Female", 63, True, False, True),
    RosterEntry("PO27182", "oncology", "breast", "Female", 45, False, False, False),
    RosterEntry("PO16180", "oncology", "colon", "Male", 47, True, False, False),
    RosterEntry("PO14142", "oncology", "breast", "Female", 69, True, True, False),
)

_FIRST = {"Male": ("James", "Daniel", "Thomas", "Robert", "Luis"),
          "Female": ("Maria", "Linda", "Grace", "Aisha", "Helen")}
_LAST = ("Carter", "Nguyen", "Okafor", "Schmidt", "Rivera", "Patel", "Moreau", "Kowalski")
_RACE = ("White", "Black or African American", "Asian", "Hispanic or Latino")
_INSURERS = ("Medicare Part B", "BlueCross PPO", "Aetna Choice", "United HMO")
_CLINIC_TIMES = ("08:00", "08:45", "09:30", "10:15", "11:00", "13:30", "14:15", "15:00", "16:30")


def _profile(rng: random.Random, entry: RosterEntry, ref_year: int) -> tuple[dict, dict, dict]:
    first = rng.choice(_FIRST[entry.gender])
    birth = date(ref_year - entry.age, rng.randint(1, 12), rng.randint(1, 28))
    profile = {
        "ID": entry.patient_id,
        "Name": f"{first} {rng.choice(_LAST)}",
        "DoB": birth.isoformat(),
        "Gender": entry.gender,
        "Race": rng.choice(_RACE),
        "Contact Info": f"555-{rng.randint(1000, 9999)}",
        "Insurance Name": "Medicare Part B" if entry.age >= 65 else rng.choice(_INSURERS[1:]),
        "Insurance ID": f"{entry.patient_id[:2]}-{rng.randint(1000000, 9999999)}",
    }
    chronic = [c for c, on in (("hypertension", entry.hypertension), ("type 2 diabetes", entry.diabetes)) if on]
    meds = []
    if entry.hypertension:
        meds.append(rng.choice(("lisinopril 10 mg daily", "metoprolol 50 mg daily", "amlodipine 5 mg daily")))
    if entry.diabetes:
        meds.append("metformin 500 mg twice daily")
    medical = {
        "Family History": rng.choice(("mother had breast cancer", "father had a stroke",
                                      "sibling with type 2 diabetes", "no significant family history")),
        "Surgeries": rng.choice(("cholecystectomy (2012)", "knee arthroscopy (2016)", "none")),
        "Chronic Illnesses": ", ".join(chronic) if chronic else "none",
        "Allergies": rng.choice(("sulfa drugs", "no known drug allergies", "latex")),
        "Current Medications": ", ".join(meds) if meds else "none",
    }
    social = {
        "Exercise": rng.choice(("walks daily", "swims twice a week", "runs 3 miles weekly",
                                "limited since surgery")),
        "Diet": rng.choice(("Mediterranean", "low-carbohydrate", "regular", "low-sodium")),
        "Drinking": rng.choice(("none", "socially", "one glass of wine nightly")),
        "Smoking": "former smoker" if entry.former_smoker else "never smoked",
        "Occupation": rng.choice(("teacher", "accountant", "nurse", "retired mechanic", "store manager")),
        "Marital Status": rng.choice(("married", "single", "widowed", "divorced")),
        "Education Level": rng.choice(("high school diploma", "bachelor's degree", "master's degree")),
        "Annual Income": str(rng.choice((32000, 45000, 61000, 78000, 95000))),
    }
    return profile, medical, social


def _pick(rng: random.Random, pool, lo: int, hi: int) -> list:
    k = min(len(pool), rng.randint(lo, hi))
    return rng.sample(list(pool), k)


def _encounter_result(rng: random.Random, j: int, when: tuple[str, str], cond: Condition,
                      link: str, prev_id: str | None, stage: str) -> ExtractionResult:
    symptoms = [Symptom(n, s) for n, s in _pick(rng, cond.symptoms, 1, 3)]
    meds = [Medication(n, d) for n, d in _pick(rng, cond.medications, 1, 2)]
    tests = [DiagnosticTest(n, r) for n, r in _pick(rng, cond.tests, 1, 2)]
    vitals = VitalSigns(f"{rng.randint(112, 152)}/{rng.randint(68, 94)}", str(rng.randint(58, 98)),
                        f"{rng.randint(52, 104)} kg")
    return ExtractionResult(
        encounter=EncounterInfo(str(j), *when),
        symptoms=symptoms,
        diagnoses=[Diagnosis(cond.name, cond.icd10)],
        medications=meds,
        diagnostic_tests=tests,
        vital_signs=vitals,
        assessment=TextNote(f"{stage.capitalize()} visit for {cond.name}; findings reviewed with the patient."),
        care_plan=TextNote(f"Plan: {cond.plan}; next review in {rng.choice((2, 4, 6, 8))} weeks."),
        journey_link=JourneyLink(link, prev_id),
    )


def _transcript(result: ExtractionResult, role: str) -> str:
    lines = [f"{role}: Hello, what brings you in today?"]
    for s in result.symptoms:
        lines.append(f"Patient: I've been having {s.name}, I'd call it {s.severity}.")
    v = result.vital_signs
    lines.append(f"{role}: Your blood pressure is {v.blood_pressure}, heart rate {v.heart_rate}, "
                 f"and you weigh {v.weight}.")
    for t in result.diagnostic_tests:
        lines.append(f"{role}: The {t.test_name} shows {t.results}.")
    for d in result.diagnoses:
        lines.append(f"{role}: This is consistent with {d.name}.")
    for m in result.medications:
        lines.append(f"{role}: Please take {m.name}, {m.dosage}.")
    lines.append(f"{role}: {result.care_plan.text}")
    lines.append("Patient: Thank you, that makes sense.")
    return "\n".join(lines)


def _add_noise(rng: random.Random, result: ExtractionResult, j: int) -> ExtractionResult:
    """Perturb a clean result the way a model typically errs; stays schema-valid."""
    kind = rng.choice(("drop_symptom", "extra_symptom", "drop_test", "relink", "misname_med"))
    if kind == "drop_symptom" and len(result.symptoms) > 1:
        return replace(result, symptoms=result.symptoms[:-1])
    if kind == "extra_symptom":
        return replace(result, symptoms=result.symptoms + [Symptom("anxiety", "mild")])
    if kind == "drop_test" and len(result.diagnostic_tests) > 1:
        return replace(result, diagnostic_tests=result.diagnostic_tests[1:])
    if kind == "relink" and j > 1:
        others = [t for t in (HAS_FOLLOWUP, NEXT, CAUSED_BY) if t != result.journey_link.type]
        return replace(result, journey_link=JourneyLink(rng.choice(others), result.journey_link.target_encounter))
    if kind == "misname_med" and result.medications:
        first = result.medications[0]
        return replace(result, medications=[Medication(first.name + " tablets", first.dosage)] + result.medications[1:])
    return replace(result, symptoms=result.symptoms + [Symptom("insomnia", "mild")])


@dataclass
class SyntheticPatient:
    bundle: PatientBundle
    truth: dict[str, ExtractionResult]
    responses: dict[str, str]


def _generated_patient(rng: random.Random, entry: RosterEntry, n_enc: int, noise: float,
                       ref_year: int) -> SyntheticPatient:
    profile, medical, social = _profile(rng, entry, ref_year)
    conditions = CARDIOLOGY if entry.specialty == "cardiology" else ONCOLOGY
    main = conditions[entry.condition]
    role = "Oncologist" if entry.specialty == "oncology" else "Cardiologist"

    day = date(ref_year, 1, 1) + timedelta(days=rng.randint(0, 120))
    encounters, truth, responses = [], {}, {}
    prev_id = None
    for j in range(1, n_enc + 1):
        if j == 1:
            link, cond, stage = HAS_START, main, "initial"
        else:
            link = rng.choices((HAS_FOLLOWUP, CAUSED_BY, NEXT), weights=(6, 2, 2))[0]
            cond = rng.choice(INTERCURRENT) if link == NEXT else main
            stage = {HAS_FOLLOWUP: "follow-up", CAUSED_BY: "referral", NEXT: "new-problem"}[link]
            day += timedelta(days=rng.randint(14, 56))
        when = (day.isoformat(), rng.choice(_CLINIC_TIMES))
        enc_id = f"{entry.patient_id}-E{j}"
        clean = _encounter_result(rng, j, when, cond, link, prev_id, stage)
        encounters.append(EncounterInput(enc_id, *when, _transcript(clean, role)))
        truth[enc_id] = clean
        emitted = _add_noise(rng, clean, j) if rng.random() < noise else clean
        responses[enc_id] = json.dumps(emitted.to_dict(), indent=2)
        prev_id = enc_id
    return SyntheticPatient(PatientBundle(profile, medical, social, encounters), truth, responses)


def _golden_patient() -> SyntheticPatient:
    return SyntheticPatient(golden.golden_bundle(), golden.golden_results(), golden.golden_responses())


def generate_corpus(patients: int = 6, seed: int = 0, encounters: int | tuple[int, int] = 5,
                    noise: float = 0.2, ref_year: int = 2024) -> list[SyntheticPatient]:
    """``encounters`` is a fixed count or an inclusive (low, high) range per patient."""
    if patients < 0:
        raise ValueError("patients must be >= 0")
    rng = random.Random(seed)
    out = []
    used = set()
    for i in range(patients):
        entry = ROSTER[i % len(ROSTER)]
        if i >= len(ROSTER):
            while True:
                pid = f"P{entry.specialty[0].upper()}{rng.randint(10000, 99999)}"
                if pid not in used:
                    break
            entry = replace(entry, patient_id=pid)
        used.add(entry.patient_id)
        if isinstance(encounters, tuple):
            n_enc = rng.randint(*encounters)
        else:
            n_enc = encounters
        if entry.condition == "mitral" and n_enc == 5 and entry.patient_id == golden.PATIENT_ID:
            out.append(_golden_patient())
            continue
        if entry.condition == "mitral":
            entry = replace(entry, condition="hypertension")
        out.append(_generated_patient(rng, entry, n_enc, noise, ref_year))
    return out


def truth_graph(patient: SyntheticPatient, schema: OntologySchema | None = None) -> PropertyGraph:
    """Reference PJKG built straight from the clean results, bypassing extraction."""
    schema = schema or load_default_schema()
    g = PropertyGraph(schema)
    g.merge_subgraph(build_patient_profile(patient.bundle, schema))
    pid = patient.bundle.patient_id
    for j, enc in enumerate(patient.bundle.encounters, start=1):
        result = patient.truth[enc.encounter_id]
        g.merge_subgraph(encounter_to_subgraph(pid, j, result, predecessor=True, encounter=enc))
    return g


def write_fixtures(out_dir: str | Path, patients: int = 6, seed: int = 0,
                   encounters: int | tuple[int, int] = 5, noise: float = 0.2) -> dict:
    """Write bundles, ``mock_responses.json`` and ``ground_truth/<id>.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = generate_corpus(patients, seed, encounters, noise)
    responses: dict[str, str] = {}
    for p in corpus:
        write_bundle(p.bundle, out)
        responses.update(p.responses)
    (out / "mock_responses.json").write_text(
        json.dumps(responses, indent=2, ensure_ascii=False) + "\n", encoding="utf-8", newline="")
    truth_ids = [p.bundle.patient_id for p in corpus if p.bundle.patient_id in GROUND_TRUTH_PATIENTS]
    if truth_ids:
        (out / "ground_truth").mkdir(exist_ok=True)
    for p in corpus:
        if p.bundle.patient_id in GROUND_TRUTH_PATIENTS:
            (out / "ground_truth" / f"{p.bundle.patient_id}.json").write_text(
                to_json(truth_graph(p)), encoding="utf-8", newline="")
    manifest = {
        "seed": seed,
        "noise": noise,
        "patients": [p.bundle.patient_id for p in corpus],
        "encounters": sum(len(p.bundle.encounters) for p in corpus),
        "ground_truth": truth_ids,
    }
    (out / "fixtures.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8", newline="")
    return manifest
