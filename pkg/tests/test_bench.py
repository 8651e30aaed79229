import itertools

import pytest

from pjkg import bench
from pjkg.bench import Query, QueryWorkload
from pjkg.errors import EmptyWorkload


class ScriptedClock:
    """Returns the given instants in order."""

    def __init__(self, instants):
        self._it = iter(instants)

    def __call__(self):
        return next(self._it)


def stepping(durations):
    """Clock where consecutive (start, stop) pairs are ``durations`` seconds apart."""
    out, t = [], 0.0
    for d in durations:
        out += [t, t + d]
        t += d + 1.0
    return ScriptedClock(out)


def workload(graph, n):
    return QueryWorkload([Query(bench.FIND_BY_LABEL, ("Encounter",))] * n)


def test_latency_mean_ms(golden_graph):
    clock = stepping([0.0020, 0.0024, 0.0028])
    assert bench.measure_latency(golden_graph, workload(golden_graph, 3), clock) == pytest.approx(2.4)


def test_throughput_quotient(golden_graph):
    clock = ScriptedClock([10.0, 11.0])
    assert bench.measure_throughput(golden_graph, workload(golden_graph, 3000), 1, clock) == pytest.approx(3000.0)
    clock = ScriptedClock([0.0, 2.0])
    assert bench.measure_throughput(golden_graph, workload(golden_graph, 100), 4, clock) == pytest.approx(50.0)


def test_scalability_hand_value():
    assert round(bench.scalability_pct({1: 2.0, 4: 1.8548}), 2) == 7.26
    assert bench.scalability_pct({1: 2.0, 2: 5.0, 4: 3.0}) == pytest.approx(-50.0)


def test_scalability_needs_two_factors():
    with pytest.raises(ValueError):
        bench.scalability_pct({1: 2.0})
    with pytest.raises(ValueError):
        bench.measure_scalability(lambda f: None, [2, 2], QueryWorkload([]))


def test_scalability_with_clock(golden_graph):
    # each factor runs 2 queries; factor 1 takes 2.0 ms each, factor 4 takes 1.8548 ms each
    clock = stepping([0.002, 0.002, 0.0018548, 0.0018548])
    pct = bench.measure_scalability(lambda f: bench.replicate_graph(golden_graph, f), [1, 4],
                                    workload(golden_graph, 2), clock)
    assert round(pct, 2) == 7.26


def test_replicate_graph(golden_graph):
    g3 = bench.replicate_graph(golden_graph, 3)
    assert g3.node_count == 3 * golden_graph.node_count
    assert g3.edge_count == 3 * golden_graph.edge_count
    assert g3.check_invariants() == []
    assert len(g3.patients()) == 3


def test_default_workload_is_seeded(golden_graph):
    a = bench.default_workload(golden_graph, n=200, seed=7)
    b = bench.default_workload(golden_graph, n=200, seed=7)
    assert a == b
    kinds = [q.kind for q in a.queries]
    assert len(kinds) == 200
    assert kinds.count(bench.FIND_BY_LABEL) >= 80
    for q in a.queries:
        bench.run_query(golden_graph, q)


def test_empty_workload(golden_graph, schema):
    from pjkg.graph import PropertyGraph
    with pytest.raises(EmptyWorkload):
        bench.default_workload(PropertyGraph(schema))
    with pytest.raises(EmptyWorkload):
        bench.measure_latency(golden_graph, QueryWorkload([]))


def test_real_clock_run(golden_graph):
    version = golden_graph.version
    rep = bench.run_bench(golden_graph, bench.default_workload(golden_graph, n=200), concurrency=2, factors=(1, 2))
    assert rep.mean_latency_ms > 0 and rep.throughput_qps > 0
    assert rep.scalability_pct is not None
    assert rep.query_count == 200
    assert set(rep.latency_by_factor) == {1, 2}
    assert set(rep.per_kind_breakdown) <= set(bench.QUERY_KINDS)
    assert {"platform", "cpu_count", "python"} <= set(rep.environment)
    assert golden_graph.version == version
    table = bench.bench_table({"golden": rep})
    assert "Throughput (queries/sec)" in table


def test_mutation_is_detected(golden_graph):
    from pjkg.graph import Node

    class Mutating(QueryWorkload):
        def __iter__(self):
            golden_graph.add_node(Node("extra", "Patient", {"ID": "extra"}))
            yield from itertools.islice(super().__iter__(), 1)

    with pytest.raises(RuntimeError):
        bench.time_queries(golden_graph, Mutating([Query(bench.FIND_BY_LABEL, ("Patient",))]))
