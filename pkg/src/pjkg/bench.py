"""Latency, throughput and scalability of the graph store under a read workload.

Latency is the mean per-query wall time, throughput is completed queries
over total wall time, and scalability compares mean latency at the smallest
and largest data-volume factor:

    scalability % = (L(min factor) - L(max factor)) / L(min factor) * 100

so a positive value means latency held or improved as the data grew.
Every measurement takes a ``clock`` returning seconds, so the formulas can
be checked exactly with a scripted clock.
"""
from __future__ import annotations

import os
import platform
import random
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence

from .errors import EmptyWorkload
from .graph import Edge, Node, PropertyGraph, Subgraph

Clock = Callable[[], float]

FIND_BY_LABEL = "find-by-label"
PROPERTY_FILTER = "property-filter"
NEIGHBORS = "neighbors"
JOURNEY = "journey-traversal"
QUERY_KINDS = (FIND_BY_LABEL, PROPERTY_FILTER, NEIGHBORS, JOURNEY)

DEFAULT_MIX = {FIND_BY_LABEL: 0.4, NEIGHBORS: 0.3, PROPERTY_FILTER: 0.2, JOURNEY: 0.1}
DEFAULT_QUERIES = 1000


@dataclass(frozen=True)
class Query:
    kind: str
    params: tuple = ()


@dataclass
class QueryWorkload:
    queries: list[Query]
    repetitions: int = 1

    def __iter__(self) -> Iterator[Query]:
        for _ in range(self.repetitions):
            yield from self.queries

    def __len__(self) -> int:
        return len(self.queries) * self.repetitions


def run_query(graph: PropertyGraph, query: Query):
    if query.kind == FIND_BY_LABEL:
        return graph.find_nodes(query.params[0])
    if query.kind == PROPERTY_FILTER:
        label, prop, value = query.params
        return graph.find_nodes(label, {prop: value})
    if query.kind == NEIGHBORS:
        node_id, direction, type_filter = query.params
        return graph.neighbors(node_id, direction, type_filter)
    if query.kind == JOURNEY:
        return graph.journey(query.params[0])
    raise ValueError(f"unknown query kind {query.kind!r}")


def default_workload(graph: PropertyGraph, n: int = DEFAULT_QUERIES, seed: int = 0,
                     mix: dict[str, float] | None = None) -> QueryWorkload:
    """Seeded mix of the four query kinds with parameters drawn from ``graph``."""
    mix = mix or DEFAULT_MIX
    nodes = graph.nodes()
    if not nodes or n <= 0:
        raise EmptyWorkload("cannot build a workload for an empty graph")
    rng = random.Random(seed)
    patients = [nd.id for nd in nodes if nd.label == "Patient"]
    labels = sorted({nd.label for nd in nodes})
    types = sorted({e.type for e in graph.edges()})

    counts = {k: int(round(n * share)) for k, share in mix.items()}
    counts[max(mix, key=mix.get)] += n - sum(counts.values())
    kinds = [k for k in QUERY_KINDS if k in counts for _ in range(counts[k])]
    rng.shuffle(kinds)

    queries = []
    for kind in kinds:
        if kind == JOURNEY and not patients:
            kind = FIND_BY_LABEL
        if kind == FIND_BY_LABEL:
            queries.append(Query(kind, (rng.choice(labels),)))
        elif kind == PROPERTY_FILTER:
            node = rng.choice(nodes)
            if node.properties:
                prop = rng.choice(sorted(node.properties))
                queries.append(Query(kind, (node.label, prop, node.properties[prop])))
            else:
                queries.append(Query(FIND_BY_LABEL, (node.label,)))
        elif kind == NEIGHBORS:
            node = rng.choice(nodes)
            type_filter = rng.choice(types) if types and rng.random() < 0.5 else None
            queries.append(Query(kind, (node.id, rng.choice(("in", "out", "both")), type_filter)))
        else:
            queries.append(Query(kind, (rng.choice(patients),)))
    return QueryWorkload(queries)


def _check_unchanged(graph: PropertyGraph, version: int) -> None:
    if graph.version != version:
        raise RuntimeError("benchmark workload mutated the graph")


def time_queries(graph: PropertyGraph, workload: QueryWorkload,
                 clock: Clock = time.perf_counter) -> list[tuple[str, float]]:
    """Run the workload single-threaded; (kind, duration ms) per query."""
    if len(workload) == 0:
        raise EmptyWorkload("workload has no queries")
    version = graph.version
    out = []
    for q in workload:
        t0 = clock()
        run_query(graph, q)
        out.append((q.kind, (clock() - t0) * 1000.0))
    _check_unchanged(graph, version)
    return out


def measure_latency(graph: PropertyGraph, workload: QueryWorkload, clock: Clock = time.perf_counter) -> float:
    """Mean per-query latency in milliseconds."""
    durations = [ms for _, ms in time_queries(graph, workload, clock)]
    return sum(durations) / len(durations)


def measure_throughput(graph: PropertyGraph, workload: QueryWorkload, concurrency: int = 1,
                       clock: Clock = time.perf_counter) -> float:
    """Completed queries per second with ``concurrency`` reader threads."""
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")
    queries = list(workload)
    if not queries:
        raise EmptyWorkload("workload has no queries")
    version = graph.version

    def worker(chunk: Sequence[Query]) -> int:
        for q in chunk:
            run_query(graph, q)
        return len(chunk)

    chunks = [queries[i::concurrency] for i in range(concurrency)]
    start = clock()
    if concurrency == 1:
        done = worker(queries)
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            done = sum(pool.map(worker, chunks))
    elapsed = clock() - start
    _check_unchanged(graph, version)
    if elapsed <= 0:
        raise ValueError("clock reported no elapsed time")
    return done / elapsed


def scalability_pct(latency_by_factor: dict[int, float]) -> float:
    if len(latency_by_factor) < 2:
        raise ValueError("scalability needs at least two data-volume factors")
    base = latency_by_factor[min(latency_by_factor)]
    top = latency_by_factor[max(latency_by_factor)]
    if base <= 0:
        raise ValueError("baseline latency must be positive")
    return (base - top) / base * 100.0


def latency_by_factor(graph_factory: Callable[[int], PropertyGraph], factors: Sequence[int],
                      workload: QueryWorkload | Callable[[PropertyGraph], QueryWorkload],
                      clock: Clock = time.perf_counter) -> dict[int, float]:
    if len(set(factors)) < 2:
        raise ValueError("scalability needs at least two data-volume factors")
    out = {}
    for f in sorted(set(factors)):
        g = graph_factory(f)
        wl = workload(g) if callable(workload) else workload
        out[f] = measure_latency(g, wl, clock)
    return out


def measure_scalability(graph_factory: Callable[[int], PropertyGraph], factors: Sequence[int],
                        workload: QueryWorkload | Callable[[PropertyGraph], QueryWorkload],
                        clock: Clock = time.perf_counter) -> float:
    return scalability_pct(latency_by_factor(graph_factory, factors, workload, clock))


def replicate_graph(graph: PropertyGraph, factor: int) -> PropertyGraph:
    """``factor`` disjoint copies of ``graph``; copy 0 keeps the original ids."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    out = PropertyGraph(graph.schema)
    nodes, edges = graph.nodes(), graph.edges()
    for r in range(factor):
        sfx = "" if r == 0 else f"~{r}"
        sub = Subgraph(
            [Node(n.id + sfx, n.label, _resuffix(n, sfx)) for n in nodes],
            [Edge(e.source + sfx, e.target + sfx, e.type, dict(e.properties)) for e in edges],
        )
        out.merge_subgraph(sub)
    return out


def _resuffix(node: Node, sfx: str) -> dict[str, str]:
    props = dict(node.properties)
    if node.label == "Patient" and "ID" in props:
        props["ID"] = props["ID"] + sfx
    return props


def environment() -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
    }


@dataclass
class BenchReport:
    mean_latency_ms: float
    throughput_qps: float
    scalability_pct: float | None
    per_kind_breakdown: dict[str, dict[str, float]] = field(default_factory=dict)
    latency_by_factor: dict[int, float] = field(default_factory=dict)
    query_count: int = 0
    concurrency: int = 1
    environment: dict = field(default_factory=environment)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["latency_by_factor"] = {str(k): v for k, v in self.latency_by_factor.items()}
        return doc


def run_bench(graph: PropertyGraph, workload: QueryWorkload | None = None, concurrency: int = 1,
              factors: Sequence[int] | None = (1, 2, 4), clock: Clock = time.perf_counter,
              seed: int = 0) -> BenchReport:
    workload = workload or default_workload(graph, seed=seed)
    timed = time_queries(graph, workload, clock)
    per_kind: dict[str, list[float]] = defaultdict(list)
    for kind, ms in timed:
        per_kind[kind].append(ms)
    mean = sum(ms for _, ms in timed) / len(timed)
    qps = measure_throughput(graph, workload, concurrency, clock)

    by_factor: dict[int, float] = {}
    scal = None
    if factors:
        by_factor = latency_by_factor(lambda f: replicate_graph(graph, f), factors, workload, clock)
        scal = scalability_pct(by_factor)
    return BenchReport(
        mean_latency_ms=mean,
        throughput_qps=qps,
        scalability_pct=scal,
        per_kind_breakdown={k: {"count": len(v), "mean_ms": sum(v) / len(v)} for k, v in sorted(per_kind.items())},
        latency_by_factor=by_factor,
        query_count=len(timed),
        concurrency=concurrency,
    )


def bench_table(reports: dict[str, BenchReport]) -> str:
    header = ["Graph", "Latency (ms)", "Throughput (queries/sec)", "Scalability Increase (%)"]
    rows = [
        [name, f"{r.mean_latency_ms:.4f}", f"{r.throughput_qps:,.2f}",
         "n/a" if r.scalability_pct is None else f"{r.scalability_pct:.2f}"]
        for name, r in reports.items()
    ]
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(4)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
