"""Hand-authored five-encounter cardiology journey (mitral valve regurgitation).

A 64-year-old man with controlled hypertension on metoprolol presents with
breathlessness and dizziness; the regurgitation is confirmed, graded severe,
repaired surgically and followed through recovery.  All clinical content is
synthetic.  Every property of every ontology class is populated with a
non-default value somewhere in the graph this fixture builds.
"""
from __future__ import annotations

import json

from .extraction import (
    DiagnosticTest,
    Diagnosis,
    EncounterInfo,
    EncounterInput,
    ExtractionResult,
    JourneyLink,
    Medication,
    MockBackend,
    Symptom,
    TextNote,
    VitalSigns,
)
from .pipeline import PatientBundle

PATIENT_ID = "PA56789"

PROFILE = {
    "ID": PATIENT_ID,
    "Name": "Walter Brennan",
    "DoB": "1960-02-14",
    "Gender": "Male",
    "Race": "White",
    "Contact Info": "555-0142",
    "Insurance Name": "Medicare Part B",
    "Insurance ID": "MCR-4471902",
}

MEDICAL_HISTORY = {
    "Family History": "father had coronary artery disease",
    "Surgeries": "appendectomy (1985)",
    "Chronic Illnesses": "hypertension, controlled",
    "Allergies": "penicillin",
    "Current Medications": "metoprolol 25 mg twice daily",
}

SOCIAL_HISTORY = {
    "Exercise": "walks 20 minutes three times a week",
    "Diet": "low-sodium",
    "Drinking": "two beers per week",
    "Smoking": "former smoker, quit 2005",
    "Occupation": "retired electrician",
    "Marital Status": "married",
    "Education Level": "high school diploma",
    "Annual Income": "48000",
}

_TRANSCRIPTS = {
    1: """Doctor: Good morning. Your intake form mentions shortness of breath and some dizziness. Tell me more.
Patient: For about two months I get winded on the stairs, moderate I'd say, and I get a bit dizzy when I stand up, mild.
Patient: I also can't walk as far as I used to. My exercise tolerance has really dropped.
Doctor: You're still taking metoprolol 25 mg twice daily for the blood pressure?
Patient: Yes, every day.
Doctor: Blood pressure today is 138/86, heart rate 64, weight 84 kg. I hear a holosystolic murmur at the apex.
Doctor: The transthoracic echocardiogram we did shows moderate-to-severe mitral regurgitation with an ejection fraction of 60 percent.
Doctor: Your chest X-ray shows mild left atrial enlargement and no pulmonary edema.
Doctor: So this confirms mitral valve regurgitation. I want a transesophageal echo to look at the valve more closely.
Patient: Okay. Should I keep the metoprolol?
Doctor: Yes, continue it. Limit salt, avoid heavy exertion, and we'll see you in two weeks with the results.""",
    2: """Doctor: Welcome back. How have you been since the last visit?
Patient: About the same. Still short of breath when I climb stairs, moderate.
Doctor: Blood pressure is 134/84, heart rate 66, weight 84 kg.
Doctor: The transesophageal echocardiogram shows a flail posterior leaflet with severe regurgitation, and your ejection fraction is preserved at 58 percent.
Doctor: So the diagnosis is severe mitral valve regurgitation with preserved ejection fraction.
Doctor: I'm adding furosemide 20 mg once daily to help with fluid, and you'll stay on metoprolol 25 mg twice daily.
Doctor: I'm referring you for coronary angiography and to cardiac surgery for a surgical evaluation of the valve.
Patient: So I need an operation?
Doctor: Very likely a repair. The surgeons will confirm.""",
    3: """Surgeon: I'm the cardiac surgeon. Dr. Patel referred you after your transesophageal echo.
Patient: Yes. I still get breathless climbing stairs, moderate, and I tire easily, mild.
Surgeon: Blood pressure 130/82, heart rate 68, weight 83 kg.
Surgeon: Your coronary angiography shows no significant coronary artery disease, so no bypass is needed.
Surgeon: The pulmonary function test is normal for your age, so you're fit for surgery.
Surgeon: This confirms severe mitral valve regurgitation from a flail posterior leaflet. The valve is suitable for repair.
Surgeon: We'll schedule a mitral valve repair with an annuloplasty ring on February 20. Hold aspirin-containing products a week before.
Surgeon: Keep taking metoprolol 25 mg twice daily and furosemide 20 mg daily until surgery.""",
    4: """Doctor: This is your first visit since the operation. How are you feeling?
Patient: Sore around the incision, mild chest wall pain, and still some fatigue, mild.
Doctor: That's expected. The intraoperative echocardiogram showed a successful repair with a 32 mm annuloplasty ring and no residual regurgitation.
Doctor: Today's transthoracic echocardiogram confirms a well-seated ring, no residual regurgitation, and ejection fraction 55 percent.
Doctor: Blood pressure 124/78, heart rate 72, weight 81 kg.
Doctor: You're status post mitral valve repair. Start aspirin 81 mg daily, continue metoprolol 25 mg twice daily, and take acetaminophen 500 mg as needed for pain.
Doctor: We stopped the furosemide. Cardiac rehabilitation starts next week, and no lifting over 10 pounds for six weeks.""",
    5: """Doctor: It's been about ten weeks since the repair. How's your breathing?
Patient: Much better. The shortness of breath is gone, resolved, and I walk thirty minutes a day now.
Doctor: Blood pressure 122/76, heart rate 62, weight 80 kg.
Doctor: Your sternum is stable on exam, the sternal examination shows a well-healed incision with no clicking.
Doctor: The follow-up transthoracic echocardiogram shows a stable repair with only trace regurgitation.
Doctor: You're recovering well after the mitral valve repair.
Doctor: Continue aspirin 81 mg daily and metoprolol 25 mg twice daily. Finish cardiac rehabilitation, keep the low-sodium diet, and get a yearly echocardiogram.
Doctor: Dental cleanings need antibiotic prophylaxis because of the ring. I'll see you in six months.""",
}

_DATES = {
    1: ("2024-01-08", "09:30"),
    2: ("2024-01-22", "10:15"),
    3: ("2024-02-12", "08:00"),
    4: ("2024-03-04", "14:30"),
    5: ("2024-05-06", "11:00"),
}


def encounter_id(j: int) -> str:
    return f"{PATIENT_ID}-E{j}"


def golden_encounters() -> list[EncounterInput]:
    return [EncounterInput(encounter_id(j), *_DATES[j], _TRANSCRIPTS[j]) for j in range(1, 6)]


def golden_bundle() -> PatientBundle:
    return PatientBundle(dict(PROFILE), dict(MEDICAL_HISTORY), dict(SOCIAL_HISTORY), golden_encounters())


def golden_results() -> dict[str, ExtractionResult]:
    """Correct extraction output for each encounter, keyed by encounter id."""
    metoprolol = Medication("metoprolol", "25 mg twice daily")
    return {
        encounter_id(1): ExtractionResult(
            encounter=EncounterInfo("1", *_DATES[1]),
            symptoms=[Symptom("shortness of breath", "moderate"), Symptom("dizziness", "mild"),
                      Symptom("reduced exercise tolerance", "moderate")],
            diagnoses=[Diagnosis("mitral valve regurgitation", "I34.0")],
            medications=[metoprolol],
            diagnostic_tests=[
                DiagnosticTest("transthoracic echocardiogram",
                               "moderate-to-severe mitral regurgitation, ejection fraction 60%"),
                DiagnosticTest("chest X-ray", "mild left atrial enlargement, no pulmonary edema"),
            ],
            vital_signs=VitalSigns("138/86", "64", "84 kg"),
            assessment=TextNote("Mitral valve regurgitation confirmed by transthoracic echocardiography, "
                                "supported by chest X-ray; symptomatic with exertional dyspnea and dizziness."),
            care_plan=TextNote("Continue metoprolol, limit salt, avoid heavy exertion; transesophageal "
                               "echocardiogram and review in two weeks."),
            journey_link=JourneyLink("HAS_START", None),
        ),
        encounter_id(2): ExtractionResult(
            encounter=EncounterInfo("2", *_DATES[2]),
            symptoms=[Symptom("shortness of breath", "moderate")],
            diagnoses=[Diagnosis("severe mitral valve regurgitation", "I34.0")],
            medications=[Medication("furosemide", "20 mg once daily"), metoprolol],
            diagnostic_tests=[DiagnosticTest(
                "transesophageal echocardiogram",
                "flail posterior leaflet, severe regurgitation, preserved ejection fraction 58%")],
            vital_signs=VitalSigns("134/84", "66", "84 kg"),
            assessment=TextNote("Severe mitral valve regurgitation with preserved ejection fraction "
                                "on transesophageal echocardiography."),
            care_plan=TextNote("Add furosemide; refer for coronary angiography and cardiac surgery "
                               "evaluation of the mitral valve."),
            journey_link=JourneyLink("HAS_FOLLOWUP", encounter_id(1)),
        ),
        encounter_id(3): ExtractionResult(
            encounter=EncounterInfo("3", *_DATES[3]),
            symptoms=[Symptom("shortness of breath", "moderate"), Symptom("fatigue", "mild")],
            diagnoses=[Diagnosis("severe mitral valve regurgitation", "I34.0")],
            medications=[metoprolol, Medication("furosemide", "20 mg daily")],
            diagnostic_tests=[
                DiagnosticTest("coronary angiography", "no significant coronary artery disease"),
                DiagnosticTest("pulmonary function test", "normal for age"),
            ],
            vital_signs=VitalSigns("130/82", "68", "83 kg"),
            assessment=TextNote("Severe mitral regurgitation from a flail posterior leaflet confirmed; "
                                "valve suitable for repair, no coronary disease."),
            care_plan=TextNote("Mitral valve repair with annuloplasty ring scheduled for February 20; "
                               "hold aspirin-containing products one week before surgery."),
            journey_link=JourneyLink("CAUSED_BY", encounter_id(2)),
        ),
        encounter_id(4): ExtractionResult(
            encounter=EncounterInfo("4", *_DATES[4]),
            symptoms=[Symptom("chest wall pain", "mild"), Symptom("fatigue", "mild")],
            diagnoses=[Diagnosis("status post mitral valve repair", "Z95.818")],
            medications=[Medication("aspirin", "81 mg daily"), metoprolol,
                         Medication("acetaminophen", "500 mg as needed")],
            diagnostic_tests=[
                DiagnosticTest("intraoperative echocardiogram",
                               "successful repair with 32 mm annuloplasty ring, no residual regurgitation"),
                DiagnosticTest("transthoracic echocardiogram",
                               "well-seated ring, no residual regurgitation, ejection fraction 55%"),
            ],
            vital_signs=VitalSigns("124/78", "72", "81 kg"),
            assessment=TextNote("Successful mitral valve repair with annuloplasty ring and no residual "
                                "regurgitation; expected postoperative soreness."),
            care_plan=TextNote("Start aspirin, stop furosemide, begin cardiac rehabilitation, no lifting "
                               "over 10 pounds for six weeks."),
            journey_link=JourneyLink("HAS_FOLLOWUP", encounter_id(3)),
        ),
        encounter_id(5): ExtractionResult(
            encounter=EncounterInfo("5", *_DATES[5]),
            symptoms=[Symptom("shortness of breath", "resolved")],
            diagnoses=[Diagnosis("status post mitral valve repair", "Z95.818")],
            medications=[Medication("aspirin", "81 mg daily"), metoprolol],
            diagnostic_tests=[
                DiagnosticTest("sternal examination", "stable sternum, well-healed incision"),
                DiagnosticTest("transthoracic echocardiogram", "stable repair, trace regurgitation"),
            ],
            vital_signs=VitalSigns("122/76", "62", "80 kg"),
            assessment=TextNote("Recovering well after mitral valve repair; symptoms resolved and "
                                "sternum stable."),
            care_plan=TextNote("Continue aspirin and metoprolol, complete cardiac rehabilitation, yearly "
                               "echocardiogram, antibiotic prophylaxis for dental work, review in six months."),
            journey_link=JourneyLink("HAS_FOLLOWUP", encounter_id(4)),
        ),
    }


def golden_responses() -> dict[str, str]:
    """Canned model replies.  Encounter 2 arrives fenced with prose, as models often reply."""
    out = {}
    for enc_id, result in golden_results().items():
        body = json.dumps(result.to_dict(), indent=2)
        if enc_id == encounter_id(2):
            body = f"Here is the extraction:\n```json\n{body}\n```\nLet me know if you need more."
        out[enc_id] = body
    return out


def golden_backend() -> MockBackend:
    return MockBackend(golden_responses())
