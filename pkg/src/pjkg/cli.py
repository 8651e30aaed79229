"""Command-line driver: ``pjkg build|validate|metrics|bench|export|gen-fixtures``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bench, metrics
from .errors import BackendUnavailable, IoFailure, ParseFailure, PJKGError, SchemaError, UnparseableTimestamp
from .export import FORMATS, export, import_graph
from .extraction import BackendConfig, EncounterInput, HttpBackend, MockBackend
from .ontology import load_schema
from .pipeline import build_corpus, load_corpus
from .synth import write_fixtures
from .validation import validate_all

log = logging.getLogger("pjkg")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class Config:
    backend: BackendConfig = field(default_factory=BackendConfig)
    schema_path: str | None = None
    strict: bool = False
    parallelism: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.parallelism < 1:
            raise UsageError("--parallelism must be >= 1")


def _schema(args):
    try:
        return load_schema(args.schema)
    except (OSError, SchemaError) as exc:
        raise UsageError(f"cannot load schema: {exc}") from exc


def _load_graph(path: str, schema):
    if not Path(path).is_file():
        raise UsageError(f"graph file {path} does not exist")
    return import_graph(path, schema=schema)


def _emit(args, text: str, doc) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text, end="")


# -- commands ---------------------------------------------------------------

def cmd_build(args) -> int:
    input_dir = Path(args.input)
    if not input_dir.is_dir():
        raise UsageError(f"input directory {input_dir} does not exist")
    schema = _schema(args)
    cfg = Config(
        backend=BackendConfig.from_env(args.backend, max_retries=args.max_retries),
        schema_path=args.schema, strict=args.strict, parallelism=args.parallelism, output=args.out,
    )
    if cfg.backend.kind == "mock":
        fixture = Path(args.fixture) if args.fixture else input_dir / "mock_responses.json"
        if not fixture.is_file():
            raise UsageError(f"mock fixture {fixture} does not exist")
        backend = MockBackend.from_file(fixture, cfg.backend)
    else:
        if not os.environ.get(cfg.backend.api_key_env):
            raise UsageError(f"{cfg.backend.api_key_env} is not set")
        if not cfg.backend.endpoint:
            raise UsageError("PJKG_LLM_ENDPOINT is not set")
        backend = HttpBackend(cfg.backend)

    bundles = load_corpus(input_dir)
    if not bundles:
        raise UsageError(f"no patient bundles under {input_dir}")
    try:
        outcomes = build_corpus(bundles, backend, schema, cfg.parallelism, cfg.strict)
    except BackendUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for o in outcomes:
            export(o.pjkg, "json", out / f"{o.patient_id}.json")
        manifest = {
            "patients": [o.summary() for o in outcomes],
            "reports": {o.patient_id: [r.to_dict() for r in o.per_encounter_reports] for o in outcomes},
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    integrated = sum(len(o.integrated) for o in outcomes)
    skipped = sum(len(o.skipped) for o in outcomes)
    print(f"built {len(outcomes)} PJKGs: {integrated} encounters integrated, {skipped} skipped -> {out}")
    for o in outcomes:
        for enc_id, reason in o.skipped:
            print(f"  skipped {enc_id}: {reason}", file=sys.stderr)
    return EXIT_FAIL if any(o.aborted for o in outcomes) else EXIT_OK


def cmd_validate(args) -> int:
    schema = _schema(args)
    try:
        raw = Path(args.result).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.result}: {exc}") from exc
    history = []
    for path in args.encounters or []:
        try:
            history.append(EncounterInput.from_dict(json.loads(Path(path).read_text(encoding="utf-8"))))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"bad encounter file {path}: {exc}") from exc
    try:
        report = validate_all(raw, schema, history, strict=not args.loose)
    except UnparseableTimestamp as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    if args.json:
        print(report.to_json())
    else:
        for stage in (report.syntactic, report.semantic, report.temporal):
            print(f"{stage.stage:<10} {'skipped' if stage.skipped else ('pass' if stage.passed else 'FAIL')}")
            for issue in stage.issues:
                print(f"    {issue.location}: {issue.message}")
        for w in report.warnings:
            print(f"warning    {w.location}: {w.message}")
        print("overall    " + ("pass" if report.passed else "FAIL"))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_metrics(args) -> int:
    schema = _schema(args)
    graph = _load_graph(args.graph, schema)
    name = Path(args.graph).stem
    if args.kind == "structural":
        rep = metrics.structural_report(graph, schema)
        _emit(args, metrics.structural_table({name: rep}), rep.to_dict())
        return EXIT_OK
    if not args.truth:
        raise UsageError("semantic metrics need --truth")
    truth = _load_graph(args.truth, schema)
    rep = metrics.align_and_score(graph, truth)
    _emit(args, metrics.semantic_table({name: rep}), rep.to_dict())
    return EXIT_OK


def _parse_scale(text: str) -> list[int]:
    try:
        factors = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--scale must be comma-separated integers, got {text!r}") from None
    if len(set(factors)) < 2:
        raise UsageError("--scale needs at least two factors (a baseline and a larger volume)")
    if min(factors) < 1:
        raise UsageError("--scale factors must be >= 1")
    return factors


def cmd_bench(args) -> int:
    if args.concurrency < 1:
        raise UsageError("--concurrency must be >= 1")
    factors = _parse_scale(args.scale)
    schema = _schema(args)
    graph = _load_graph(args.graph, schema)
    workload = bench.default_workload(graph, n=args.queries, seed=args.seed)
    rep = bench.run_bench(graph, workload, args.concurrency, factors)
    _emit(args, bench.bench_table({Path(args.graph).stem: rep}), rep.to_dict())
    return EXIT_OK


def cmd_export(args) -> int:
    schema = _schema(args)
    graph = _load_graph(args.graph, schema)
    export(graph, args.format, args.out)
    print(f"wrote {args.format} to {args.out}")
    return EXIT_OK


def cmd_gen_fixtures(args) -> int:
    if args.patients < 0:
        raise UsageError("--patients must be >= 0")
    enc = args.encounters
    if "-" in enc:
        lo, hi = (int(x) for x in enc.split("-", 1))
        encounters = (lo, hi)
    else:
        encounters = int(enc)
    try:
        manifest = write_fixtures(args.out, args.patients, args.seed, encounters, args.noise)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    print(f"wrote {len(manifest['patients'])} bundles, {manifest['encounters']} encounters -> {args.out}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pjkg", description="Patient journey knowledge graph toolkit.",
                                     epilog="Exit codes: 0 success, 1 runtime failure, 2 usage/config error.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, json_flag=True):
        p.add_argument("--schema", help="ontology schema json (default: built-in schema)")
        if json_flag:
            p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("build", help="build one PJKG per patient bundle")
    p.add_argument("--input", required=True, help="directory of <patient_id>/ bundles")
    p.add_argument("--backend", choices=("mock", "http"), default="mock")
    p.add_argument("--fixture", help="mock responses json (default: <input>/mock_responses.json)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--strict", action="store_true", help="abort a patient at its first failing encounter")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--max-retries", type=int, default=2)
    common(p, json_flag=False)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="validate one extraction result")
    p.add_argument("--result", required=True, help="raw extraction output (json)")
    p.add_argument("--encounters", nargs="*", help="encounter files of the patient so far, in order")
    p.add_argument("--report", help="write the validation report json here")
    p.add_argument("--loose", action="store_true", help="tolerate unknown keys")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("metrics", help="structural or semantic graph metrics")
    p.add_argument("kind", choices=("structural", "semantic"))
    p.add_argument("--graph", required=True)
    p.add_argument("--truth", help="ground-truth graph (semantic only)")
    common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="latency, throughput and scalability")
    p.add_argument("--graph", required=True)
    p.add_argument("--scale", default="1,2,4")
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument("--queries", type=int, default=bench.DEFAULT_QUERIES)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="export a graph as json, graphml or a MERGE script")
    p.add_argument("--graph", required=True)
    p.add_argument("--format", required=True, choices=FORMATS)
    p.add_argument("--out", required=True)
    common(p, json_flag=False)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("gen-fixtures", help="write the synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--patients", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--encounters", default="5", help="count per patient, or a range like 4-6")
    p.add_argument("--noise", type=float, default=0.2, help="share of mock replies with an injected error")
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseFailure, IoFailure, PJKGError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
