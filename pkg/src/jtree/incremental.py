"""Dynamic edits to a maintained cluster graph.

The network and its cluster graph change together: adding an arc grows the
child's family cluster, deleting one shrinks it, with spurious-variable
drops or retraction cleaning up carriers that lost their purpose.  Edits
keep the family and path properties at every step but may leave cycles;
``EditSession`` tracks the clusters each edit touched and ``restore`` runs a
solver over just the regions containing them.

The module-level functions operate on a bare graph and record one trace
event each; ``EditSession`` wraps them with dirty tracking and a persistent
random stream.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import transforms, verify
from .algorithms import PRESETS, RunReport, run_preset
from .model import BeliefNetwork, ClusterGraph, OperationError, build_initial_cluster_graph
from .transforms import _finish


def _refresh_family_vars(graph: ClusterGraph, cluster_id: int) -> None:
    housed = [v for v, home in graph.family_home.items() if home == cluster_id]
    fresh: set[str] = set()
    for v in housed:
        fresh |= graph.network.family(v)
    graph.clusters[cluster_id].family_vars = fresh


def add_variable_cluster(graph: ClusterGraph, var_id: str, cardinality: int) -> int:
    """Add a variable to the network and house it in a fresh singleton
    cluster.  Returns the cluster id."""
    cost_before = graph.cost()
    graph.network.add_variable(var_id, cardinality)
    c = graph.add_cluster({var_id}, {var_id})
    graph.family_home[var_id] = c.id
    _finish(graph, "add_variable",
            {"v": var_id, "cardinality": cardinality, "cluster": c.id}, cost_before)
    return c.id


def add_arc_clusters(graph: ClusterGraph, x: str, y: str) -> tuple[int, int]:
    """Add arc x -> y: x joins y's family cluster and its family marking;
    unless x was already present there, a new x-carrying connection to x's
    own family cluster restores the path property.  Returns (P, Q), the
    family clusters of y and x."""
    cost_before = graph.cost()
    graph.network.add_arc(x, y)
    p = graph.family_home[y]
    cp = graph.clusters[p]
    carried = x in cp.members
    cp.members.add(x)
    cp.family_vars.add(x)
    q = graph.family_home[x]
    if q != p and not carried:
        graph.union_edge(p, q, {x})
    _finish(graph, "add_arc", {"x": x, "y": y}, cost_before)
    return p, q


def _retract(graph: ClusterGraph, x: str, p: int, shape: str) -> set[int]:
    """Strip x from cluster p and every pure carrier reachable from it.

    Each strip reconnects the cluster's x-carrying neighbors directly (chain
    in id order, or star on the lowest id) so the path property never
    lapses.  Clusters where x belongs to a housed family are left alone.
    Returns the ids of all clusters stripped or rewired.
    """
    touched: set[int] = set()
    work = {p}
    while work:
        cid = min(work)
        work.discard(cid)
        if cid not in graph.clusters:
            continue
        cl = graph.clusters[cid]
        if x not in cl.members or x in cl.family_vars:
            continue
        carriers = sorted(e.other(cid) for e in graph.carrying_edges(cid, x))
        cl.members.discard(x)
        for n in carriers:
            e = graph.edge(cid, n)
            e.separator.discard(x)
            if not e.separator:
                graph.remove_edge(cid, n)
        touched.add(cid)
        if not cl.members:
            graph.remove_cluster(cid)
        if len(carriers) >= 2:
            if shape == "chain":
                pairs = list(zip(carriers, carriers[1:]))
            else:
                pairs = [(carriers[0], n) for n in carriers[1:]]
            for a, b in pairs:
                graph.union_edge(a, b, {x})
                touched.add(a)
                touched.add(b)
        work |= set(carriers)
    return touched


def retract_clusters(
    graph: ClusterGraph, x: str, p: int, shape: str = "chain", _record: bool = True
) -> set[int]:
    """Retraction entry point; x must be a pure carried variable at p."""
    if shape not in ("chain", "star"):
        raise OperationError("retract", "unknown shape", shape=shape)
    c = graph.cluster(p)
    if x not in c.members:
        raise OperationError("retract", "variable not in cluster", x=x, p=p)
    if x in c.family_vars:
        raise OperationError("retract", "variable belongs to a family here", x=x, p=p)
    cost_before = graph.cost()
    touched = _retract(graph, x, p, shape)
    if _record:
        _finish(graph, "retract", {"x": x, "p": p, "shape": shape}, cost_before)
    return touched


def delete_arc_clusters(
    graph: ClusterGraph,
    x: str,
    y: str,
    shape: str = "chain",
    retract: bool = True,
    _record: bool = True,
) -> set[int]:
    """Delete arc x -> y and clean up x's presence in y's family cluster.

    The family marking is recomputed from the housed families.  If x is no
    longer marked there it is dropped when spurious, retracted when it is a
    through-carrier (unless ``retract`` is off, which leaves it carried).
    Returns the touched cluster ids.
    """
    cost_before = graph.cost()
    graph.network.remove_arc(x, y)
    p = graph.family_home[y]
    _refresh_family_vars(graph, p)
    touched = {p}
    cp = graph.clusters[p]
    if x not in cp.family_vars and x in cp.members:
        if transforms.is_spurious(graph, x, p):
            transforms._sweep_spurious(graph, {p})
        elif retract:
            touched |= _retract(graph, x, p, shape)
    if _record:
        _finish(graph, "delete_arc",
                {"x": x, "y": y, "shape": shape, "retract": retract}, cost_before)
    return touched


def delete_variable_clusters(
    graph: ClusterGraph,
    v: str,
    shape: str = "chain",
    retract: bool = True,
) -> set[int]:
    """Delete a variable: all its arcs first, then its family housing, then
    every remaining trace of it in members and separators."""
    graph.network.variable(v)
    cost_before = graph.cost()
    touched: set[int] = set()
    for y in sorted(graph.network.children(v)):
        touched |= delete_arc_clusters(graph, v, y, shape, retract, _record=False)
    for u in sorted(graph.network.parents(v)):
        touched |= delete_arc_clusters(graph, u, v, shape, retract, _record=False)
    home = graph.family_home.pop(v)
    if home in graph.clusters:
        _refresh_family_vars(graph, home)
        touched.add(home)
    for cid in sorted(graph.clusters):
        cl = graph.clusters[cid]
        if v not in cl.members:
            continue
        for e in graph.carrying_edges(cid, v):
            e.separator.discard(v)
            if not e.separator:
                graph.remove_edge(e.a, e.b)
        cl.members.discard(v)
        touched.add(cid)
        if not cl.members:
            graph.remove_cluster(cid)
    graph.network.remove_variable(v)
    _finish(graph, "delete_variable",
            {"v": v, "shape": shape, "retract": retract}, cost_before)
    return touched


@dataclass
class SessionConfig:
    """Editing policy: which solver restores dirtied regions, how retraction
    reconnects stranded carriers, and whether deleting an arc retracts
    through-carriers automatically or leaves them in place."""

    preset: str = "IE"
    seed: int | None = None
    retraction_shape: str = "chain"
    auto_retract: bool = True


@dataclass
class RestoreReport:
    triggered: bool
    cost: int
    run: RunReport | None = None


class EditSession:
    """A mutable network with its cluster graph kept alongside.

    Edits mark the clusters they touch; ``restore`` resolves only the
    multiply-connected regions containing marked clusters, drawing from one
    session-lifetime random stream so a seeded session is reproducible.
    """

    def __init__(
        self,
        network: BeliefNetwork | None = None,
        config: SessionConfig | None = None,
    ):
        self.config = config or SessionConfig()
        if self.config.retraction_shape not in ("chain", "star"):
            raise OperationError(
                "session", "unknown retraction shape", shape=self.config.retraction_shape
            )
        if self.config.preset not in PRESETS:
            raise OperationError("session", "unknown preset", preset=self.config.preset)
        if network is None:
            self.graph = ClusterGraph(BeliefNetwork())
        else:
            self.graph = build_initial_cluster_graph(network)
        self.rng = random.Random(self.config.seed)
        self.dirty: set[int] = set()
        if self.graph.is_multiply_connected():
            self.dirty = set(self.graph.clusters)

    @property
    def network(self) -> BeliefNetwork:
        return self.graph.network

    def add_variable(self, var_id: str, cardinality: int) -> int:
        return add_variable_cluster(self.graph, var_id, cardinality)

    def add_arc(self, x: str, y: str) -> None:
        p, q = add_arc_clusters(self.graph, x, y)
        self.dirty |= {p, q}

    def delete_arc(self, x: str, y: str) -> None:
        self.dirty |= delete_arc_clusters(
            self.graph, x, y,
            shape=self.config.retraction_shape,
            retract=self.config.auto_retract,
        )

    def retract_variable(self, p: int, x: str) -> None:
        self.dirty |= retract_clusters(
            self.graph, x, p, shape=self.config.retraction_shape
        )

    def delete_variable(self, v: str) -> None:
        self.dirty |= delete_variable_clusters(
            self.graph, v,
            shape=self.config.retraction_shape,
            retract=self.config.auto_retract,
        )

    def restore(self) -> RestoreReport:
        """Re-establish single-connectedness wherever edits broke it."""
        if self.graph.is_multiply_connected():
            run = run_preset(
                self.graph,
                self.config.preset,
                component_filter=self.dirty or set(self.graph.clusters),
                rng=self.rng,
            )
            self.dirty.clear()
            return RestoreReport(True, self.graph.cost(), run)
        result = verify.check_junction_tree(self.graph.clone())
        if not result:
            raise OperationError(
                "restore", "graph invalid without being multiply-connected",
                witnesses=result.witnesses[:3],
            )
        self.dirty.clear()
        return RestoreReport(False, self.graph.cost(), None)
