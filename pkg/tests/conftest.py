from pathlib import Path

import pytest

from lineage_mdi import build_graph, read_dump
from lineage_mdi.synth import generate_snapshot

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def qwen_snapshot():
    return read_dump(FIXTURES / "qwen_family.jsonl")


@pytest.fixture(scope="session")
def qwen_graph(qwen_snapshot):
    graph, _ = build_graph(qwen_snapshot)
    return graph


@pytest.fixture(scope="session")
def worked_snapshot():
    return read_dump(FIXTURES / "worked_example.jsonl")


@pytest.fixture(scope="session")
def worked_graph(worked_snapshot):
    graph, _ = build_graph(worked_snapshot)
    return graph


@pytest.fixture()
def random_graph_factory():
    def make(n_nodes=200, seed=0, attachment="preferential"):
        snapshot = generate_snapshot(n_nodes, seed=seed, attachment=attachment)
        graph, _ = build_graph(snapshot)
        return graph

    return make


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome, status in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" in nodeid and getattr(report, "when", "call") == "call":
                lines.append(f"{status}  {nodeid.split('::')[-1]}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
