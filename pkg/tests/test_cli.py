import json
import os

import pytest

from pjkg.cli import main


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    assert main(["gen-fixtures", "--out", str(root / "in")]) == 0
    assert main(["build", "--input", str(root / "in"), "--out", str(root / "out")]) == 0
    return root


def test_build_outputs(corpus):
    manifest = json.loads((corpus / "out" / "manifest.json").read_text())
    assert len(manifest["patients"]) == 6
    assert sum(len(p["integrated"]) for p in manifest["patients"]) == 30


def test_gen_fixtures_deterministic(tmp_path, corpus):
    assert main(["gen-fixtures", "--out", str(tmp_path)]) == 0
    for name in ("mock_responses.json", "fixtures.json", "ground_truth/PM82487.json"):
        assert (tmp_path / name).read_bytes() == (corpus / "in" / name).read_bytes()


def test_metrics_commands(corpus, capsys):
    graph = str(corpus / "out" / "PA56789.json")
    assert main(["metrics", "structural", "--graph", graph, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["icr"] == 1.0 and doc["relationship_completeness"] == 100.0
    truth = str(corpus / "in" / "ground_truth" / "PA56789.json")
    assert main(["metrics", "semantic", "--graph", graph, "--truth", truth]) == 0
    assert "combined" in capsys.readouterr().out
    assert main(["metrics", "semantic", "--graph", graph]) == 2


def test_bench_command(corpus, capsys):
    graph = str(corpus / "out" / "PA56789.json")
    assert main(["bench", "--graph", graph, "--queries", "50", "--scale", "1,2", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["throughput_qps"] > 0 and doc["query_count"] == 50
    assert main(["bench", "--graph", graph, "--scale", "1"]) == 2
    assert main(["bench", "--graph", graph, "--concurrency", "0"]) == 2


def test_export_command(corpus, tmp_path):
    graph = str(corpus / "out" / "PA56789.json")
    out = tmp_path / "g.cypher"
    assert main(["export", "--graph", graph, "--format", "cypher-script", "--out", str(out)]) == 0
    assert out.read_text().startswith("MERGE")
    assert main(["export", "--graph", graph, "--format", "csv", "--out", str(out)]) == 2


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root ignores permissions")
def test_export_read_only_target(corpus, tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    graph = str(corpus / "out" / "PA56789.json")
    assert main(["export", "--graph", graph, "--format", "json", "--out", str(ro / "g.json")]) == 1


def test_export_unwritable_target(corpus, tmp_path):
    graph = str(corpus / "out" / "PA56789.json")
    target = tmp_path / "file"
    target.write_text("")
    assert main(["export", "--graph", graph, "--format", "json", "--out", str(target / "g.json")]) == 1


def test_validate_command(corpus, tmp_path, capsys):
    responses = json.loads((corpus / "in" / "mock_responses.json").read_text())
    result = tmp_path / "r.json"
    result.write_text(responses["PA56789-E1"])
    enc = sorted((corpus / "in" / "PA56789" / "encounters").glob("*.json"))[0]
    report = tmp_path / "report.json"
    assert main(["validate", "--result", str(result), "--encounters", str(enc), "--report", str(report)]) == 0
    assert json.loads(report.read_text())["passed"] is True
    result.write_text("{}")
    assert main(["validate", "--result", str(result), "--encounters", str(enc)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_usage_errors(tmp_path, monkeypatch):
    assert main([]) == 2
    assert main(["build", "--input", str(tmp_path / "missing"), "--out", str(tmp_path)]) == 2
    monkeypatch.delenv("PJKG_LLM_API_KEY", raising=False)
    (tmp_path / "in").mkdir()
    assert main(["build", "--input", str(tmp_path / "in"), "--out", str(tmp_path / "o"), "--backend", "http"]) == 2
    assert main(["metrics", "structural", "--graph", str(tmp_path / "none.json")]) == 2


def test_corrupt_graph_is_runtime_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes": [')
    assert main(["metrics", "structural", "--graph", str(bad)]) == 1
