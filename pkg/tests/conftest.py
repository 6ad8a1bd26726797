from __future__ import annotations

import pytest

from jtree.model import BeliefNetwork, build_initial_cluster_graph


def make_network(cards: dict[str, int], arcs: list[tuple[str, str]]) -> BeliefNetwork:
    net = BeliefNetwork()
    for v, c in sorted(cards.items()):
        net.add_variable(v, c)
    for p, c in arcs:
        net.add_arc(p, c)
    return net


@pytest.fixture
def diamond() -> BeliefNetwork:
    """Four binary variables arranged A -> {B, C} -> D."""
    return make_network(
        {v: 2 for v in "ABCD"},
        [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")],
    )


@pytest.fixture
def diamond_graph(diamond):
    return build_initial_cluster_graph(diamond)


@pytest.fixture
def chain3() -> BeliefNetwork:
    return make_network({v: 2 for v in "ABC"}, [("A", "B"), ("B", "C")])


@pytest.fixture
def poly4() -> BeliefNetwork:
    """Polytree: two parents into C, one child out."""
    return make_network(
        {v: 2 for v in "ABCD"},
        [("A", "C"), ("B", "C"), ("C", "D")],
    )
