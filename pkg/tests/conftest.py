import pytest

from artin_dehn.presentation import LabeledGraph, presentation_from_graph


def graph(gens: str, *edges) -> LabeledGraph:
    return LabeledGraph.build(gens, edges)


@pytest.fixture
def k3():
    return graph("abc", ("a", "b", 2), ("b", "c", 2), ("a", "c", 2))


@pytest.fixture
def edge4():
    return graph("ab", ("a", "b", 4))


@pytest.fixture
def k3p(k3):
    return presentation_from_graph(k3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.REPORT):
        terminalreporter.write_line(mod.REPORT[n])
