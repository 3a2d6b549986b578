"""Shared fixtures: a tiny hand-checked dataset, the bundled five-pattern
university fixture, and helpers for running every strategy against the
single-node reference evaluator."""

from pathlib import Path

import pytest

from sparqlsim import (
    BasePartition, Cluster, Dataset, Query, STRATEGIES, as_multiset, iri, lit,
    load_partitioned, oracle_eval, run_strategy, generate, WorkloadSpec,
)
from sparqlsim.terms import Triple

REPO_ROOT = Path(__file__).resolve().parents[1]
QUERY_DIR = REPO_ROOT / "queries"
WORKLOAD_DIR = REPO_ROOT / "workloads"

EX = "http://example.org/"

A = iri(EX + "a")
B = iri(EX + "b")
C = iri(EX + "c")
KNOWS = iri(EX + "knows")
NAME = iri(EX + "name")
AGE = iri(EX + "age")

# Six triples small enough to evaluate by hand; used for exact expected-row
# assertions throughout the unit tests.
D0 = [
    Triple(A, KNOWS, B),
    Triple(A, KNOWS, C),
    Triple(B, KNOWS, C),
    Triple(A, NAME, lit("A")),
    Triple(B, NAME, lit("B")),
    Triple(C, AGE, lit("7")),
]


@pytest.fixture
def d0_triples() -> list[Triple]:
    return list(D0)


def make_dataset(triples, m: int = 4,
                 base: BasePartition = BasePartition.SUBJECT) -> tuple[Dataset, Cluster]:
    cluster = Cluster(m)
    return load_partitioned(triples, cluster, base), cluster


@pytest.fixture(scope="session")
def q8_workload():
    """The five-pattern university fixture at its default test size."""
    return generate(WorkloadSpec(name="q8", shape="snowflake", pattern_count=5,
                                 subject_count=600))


def run_all_strategies(query: Query, triples, m: int = 4,
                       base: BasePartition = BasePartition.SUBJECT, **kwargs):
    dataset, cluster = make_dataset(triples, m, base)
    return {name: run_strategy(name, query, dataset, cluster, **kwargs)
            for name in STRATEGIES}


def assert_matches_oracle(query: Query, triples, m: int = 4,
                          base: BasePartition = BasePartition.SUBJECT, **kwargs):
    """Run all four strategies and compare each row multiset to the
    single-node reference evaluation."""
    expected = as_multiset(oracle_eval(query.patterns, triples,
                                       select=query.select))
    results = run_all_strategies(query, triples, m, base, **kwargs)
    for name, result in results.items():
        got = as_multiset(result.relation.rows())
        assert got == expected, (
            f"{name} disagrees with the reference evaluation on m={m}: "
            f"{sum(got.values())} rows vs {sum(expected.values())}")
    return results


# One verdict line per acceptance criterion, collected by the acceptance
# tests and printed after the run summary (plain prints would be swallowed
# by pytest's output capture on passing tests).
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
