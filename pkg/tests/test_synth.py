from pjkg.extraction import parse_extraction
from pjkg.synth import GROUND_TRUTH_PATIENTS, generate_corpus, truth_graph
from pjkg.validation import validate_temporal


def test_default_corpus_shape():
    corpus = generate_corpus()
    assert [len(p.bundle.encounters) for p in corpus] == [5] * 6
    ids = [p.bundle.patient_id for p in corpus]
    assert len(set(ids)) == 6
    assert set(GROUND_TRUTH_PATIENTS) <= set(ids)


def test_corpus_is_seeded():
    a = generate_corpus(seed=3, encounters=(4, 6))
    b = generate_corpus(seed=3, encounters=(4, 6))
    assert [p.responses for p in a] == [p.responses for p in b]
    assert all(4 <= len(p.bundle.encounters) <= 6 for p in a)


def test_replies_parse_and_timestamps_increase():
    for p in generate_corpus(patients=8, seed=1, noise=1.0):
        assert validate_temporal(p.bundle.encounters).passed
        for reply in p.responses.values():
            parse_extraction(reply)


def test_truth_graphs_are_sound():
    for p in generate_corpus():
        g = truth_graph(p)
        assert g.check_invariants() == []
        assert len(g.journey(p.bundle.patient_id)) == 5
