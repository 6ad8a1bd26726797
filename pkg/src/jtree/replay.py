"""Re-apply recorded trace events to a graph.

Every public operation records one event with JSON-safe arguments; applying
the same events to the same starting graph reproduces the same result,
cluster ids included, because id allocation is part of the deterministic
behavior.  This is what makes traces portable: a file of events, or a
protocol stream of them, fully determines the graph.
"""

from __future__ import annotations

from typing import Iterable

from . import incremental, transforms
from .model import ClusterGraph, OperationError, TraceEvent


def apply_event(graph: ClusterGraph, event: TraceEvent) -> None:
    kind, a = event.kind, event.args
    if kind == "merge":
        transforms.merge(graph, a["p"], a["q"], sweep=a.get("sweep", True))
    elif kind == "steal_an_edge":
        transforms.steal_an_edge(graph, a["p"], a["q"], a["d"])
    elif kind == "slide":
        transforms.slide(graph, a["p"], a["q"], a["d"])
    elif kind == "drop":
        transforms.drop(graph, a["p"], a["q"], a["d"])
    elif kind == "collapse":
        transforms.collapse(graph, list(a["cycle"]), tuple(a["victim"]))
    elif kind == "eliminate":
        transforms.eliminate(graph, a["x"], a["scope"])
    elif kind == "drop_spurious":
        transforms.drop_spurious(graph, a["seeds"])
    elif kind == "add_fill_arc":
        transforms.add_fill_arc(graph, a["x"], a["y"])
    elif kind == "add_variable":
        incremental.add_variable_cluster(graph, a["v"], a["cardinality"])
    elif kind == "add_arc":
        incremental.add_arc_clusters(graph, a["x"], a["y"])
    elif kind == "delete_arc":
        incremental.delete_arc_clusters(
            graph, a["x"], a["y"], shape=a["shape"], retract=a["retract"]
        )
    elif kind == "retract":
        incremental.retract_clusters(graph, a["x"], a["p"], shape=a["shape"])
    elif kind == "delete_variable":
        incremental.delete_variable_clusters(
            graph, a["v"], shape=a["shape"], retract=a["retract"]
        )
    else:
        raise OperationError("replay", "unknown event kind", kind=kind)


def replay_trace(graph: ClusterGraph, events: Iterable[TraceEvent]) -> ClusterGraph:
    """Apply events in order; the graph is mutated in place and returned."""
    for ev in events:
        apply_event(graph, ev)
    return graph
