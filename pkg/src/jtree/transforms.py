"""Cluster-graph transformations.

Every public operation validates its preconditions, mutates the graph in
place, appends exactly one trace event, and preserves the family and path
properties.  Slide, drop, collapse, and merge finish with an automatic
spurious-variable sweep seeded at the clusters they touched; that sweep is
part of the operation (replaying the event reproduces it) and records no
event of its own.  Merge alone can opt out (``sweep=False``), which the
event records so replays stay faithful.

With config.DEBUG_CHECKS enabled the properties are re-verified after every
public call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import config
from .model import ClusterGraph, OperationError, edge_key


def _finish(graph: ClusterGraph, kind: str, args: dict, cost_before: int):
    ev = graph.record(kind, args, graph.cost() - cost_before)
    if config.checks_enabled():
        from . import verify

        verify.assert_valid(graph, context=kind)
    return ev


def is_spurious(graph: ClusterGraph, var: str, cluster_id: int) -> bool:
    """True when the variable serves no purpose in the cluster: not part of a
    family housed there, and carried on at most one incident edge."""
    c = graph.cluster(cluster_id)
    if var not in c.members:
        raise OperationError("is_spurious", "variable not in cluster", var=var, cluster=cluster_id)
    if var in c.family_vars:
        return False
    return len(graph.carrying_edges(cluster_id, var)) <= 1


def _sweep_spurious(graph: ClusterGraph, seeds: Iterable[int] | None) -> int:
    """Remove spurious variables until none is reachable from the frontier.
    Clusters and edges emptied by the removals are deleted."""
    if seeds is None:
        work = set(graph.clusters)
    else:
        work = {c for c in seeds if c in graph.clusters}
    removed = 0
    while work:
        cid = min(work)
        work.discard(cid)
        if cid not in graph.clusters:
            continue
        c = graph.clusters[cid]
        while True:
            target = None
            for var in sorted(c.members):
                if var not in c.family_vars and len(graph.carrying_edges(cid, var)) <= 1:
                    target = var
                    break
            if target is None:
                break
            carrying = graph.carrying_edges(cid, target)
            c.members.discard(target)
            removed += 1
            if carrying:
                e = carrying[0]
                other = e.other(cid)
                e.separator.discard(target)
                if not e.separator:
                    graph.remove_edge(e.a, e.b)
                    work.add(cid)
                work.add(other)
        if not c.members:
            # separators are subsets of members, so no edge can remain
            graph.remove_cluster(cid)
    return removed


def drop_spurious(graph: ClusterGraph, seeds: Iterable[int] | None = None) -> int:
    """Sweep spurious variables; ``seeds`` limits the starting frontier (the
    sweep still follows removals wherever they lead).  Returns the number of
    variable-from-cluster removals."""
    cost_before = graph.cost()
    seed_list = sorted({c for c in seeds if c in graph.clusters}) if seeds is not None else None
    removed = _sweep_spurious(graph, seed_list)
    _finish(graph, "drop_spurious", {"seeds": seed_list}, cost_before)
    return removed


def merge(graph: ClusterGraph, p: int, q: int, sweep: bool = True) -> int:
    """Merge two clusters into a new one; union of members, family markings,
    and edges (parallel edges to a common neighbor unite their separators).
    Returns the new cluster's id.  The automatic spurious sweep may remove
    the result again; callers re-check liveness when that matters.

    ``sweep=False`` performs the structural union only.  Redundant-cluster
    merging uses it because absorbing a subset cluster must leave the
    surviving cluster's members untouched, mirroring plain clique
    subsumption; the sweep could shrink them further."""
    if p == q:
        raise OperationError("merge", "clusters must differ", p=p, q=q)
    cp = graph.cluster(p)
    cq = graph.cluster(q)
    cost_before = graph.cost()

    moved: list[tuple[int, set[str]]] = []
    for side in (p, q):
        for e in graph.incident_edges(side):
            other = e.other(side)
            if other in (p, q):
                continue
            moved.append((other, set(e.separator)))
    for side in (p, q):
        for other in list(graph.neighbors(side)):
            graph.remove_edge(side, other)

    m = graph.add_cluster(cp.members | cq.members, cp.family_vars | cq.family_vars)
    for other, sep in moved:
        graph.union_edge(m.id, other, sep)
    for var, home in list(graph.family_home.items()):
        if home in (p, q):
            graph.family_home[var] = m.id
    graph.remove_cluster(p)
    graph.remove_cluster(q)

    args = {"p": p, "q": q, "result": m.id}
    if sweep:
        _sweep_spurious(graph, {m.id} | set(graph.neighbors(m.id)))
    else:
        args["sweep"] = False
    _finish(graph, "merge", args, cost_before)
    return m.id


def steal_an_edge(graph: ClusterGraph, p: int, q: int, d: int) -> None:
    """Replace edge (p, q) by edges (p, d) and (q, d), both carrying exactly
    the old separator, which is added to d's members.  d must be adjacent to
    neither endpoint.  The only transformation that cannot create spurious
    variables, so no sweep runs."""
    e = graph.edge(p, q)
    if d in (p, q):
        raise OperationError("steal_an_edge", "target is an endpoint", p=p, q=q, d=d)
    graph.cluster(d)
    if graph.has_edge(p, d) or graph.has_edge(q, d):
        raise OperationError("steal_an_edge", "target already adjacent to an endpoint",
                             p=p, q=q, d=d)
    cost_before = graph.cost()
    sep = set(e.separator)
    graph.remove_edge(p, q)
    graph.clusters[d].members |= sep
    graph.add_edge(p, d, set(sep))
    graph.add_edge(q, d, set(sep))
    _finish(graph, "steal_an_edge", {"p": p, "q": q, "d": d}, cost_before)


def slide(graph: ClusterGraph, p: int, q: int, d: int) -> None:
    """Move edge (p, q) across a cluster d adjacent to exactly one endpoint:
    the separator joins d's members, a new edge to the far endpoint carries
    it, and the existing near edge's separator is widened by it."""
    e = graph.edge(p, q)
    if d in (p, q):
        raise OperationError("slide", "target is an endpoint", p=p, q=q, d=d)
    graph.cluster(d)
    adj_p = graph.has_edge(p, d)
    adj_q = graph.has_edge(q, d)
    if adj_p == adj_q:
        raise OperationError("slide", "target must be adjacent to exactly one endpoint",
                             p=p, q=q, d=d)
    near = p if adj_p else q
    far = q if adj_p else p
    cost_before = graph.cost()
    sep = set(e.separator)
    graph.remove_edge(p, q)
    graph.clusters[d].members |= sep
    graph.add_edge(far, d, set(sep))
    graph.edge(near, d).separator |= sep
    _sweep_spurious(graph, {p, q, d})
    _finish(graph, "slide", {"p": p, "q": q, "d": d}, cost_before)


def drop(graph: ClusterGraph, p: int, q: int, d: int) -> None:
    """Delete edge (p, q) of the triangle p-q-d; its separator joins d's
    members and both remaining triangle edges."""
    e = graph.edge(p, q)
    if d in (p, q):
        raise OperationError("drop", "target is an endpoint", p=p, q=q, d=d)
    graph.cluster(d)
    if not (graph.has_edge(p, d) and graph.has_edge(q, d)):
        raise OperationError("drop", "clusters do not form a triangle", p=p, q=q, d=d)
    cost_before = graph.cost()
    sep = set(e.separator)
    graph.remove_edge(p, q)
    graph.clusters[d].members |= sep
    graph.edge(p, d).separator |= sep
    graph.edge(q, d).separator |= sep
    _sweep_spurious(graph, {p, q, d})
    _finish(graph, "drop", {"p": p, "q": q, "d": d}, cost_before)


def _validate_cycle(graph: ClusterGraph, cycle: list[int]) -> None:
    if len(cycle) < 3:
        raise OperationError("collapse", "cycle needs at least 3 clusters", cycle=cycle)
    if len(set(cycle)) != len(cycle):
        raise OperationError("collapse", "cycle repeats a cluster", cycle=cycle)
    for i, cid in enumerate(cycle):
        graph.cluster(cid)
        nxt = cycle[(i + 1) % len(cycle)]
        if not graph.has_edge(cid, nxt):
            raise OperationError("collapse", "consecutive clusters not adjacent",
                                 a=cid, b=nxt)


def collapse(graph: ClusterGraph, cycle: list[int], victim: tuple[int, int]) -> None:
    """Resolve a simple cycle in one step: delete the victim edge and union
    its separator into every other cycle cluster and cycle edge."""
    _validate_cycle(graph, cycle)
    vk = edge_key(*victim)
    cycle_edges = {edge_key(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))}
    if vk not in cycle_edges:
        raise OperationError("collapse", "victim is not a cycle edge", victim=victim)
    cost_before = graph.cost()
    sep = set(graph.edges[vk].separator)
    graph.remove_edge(*vk)
    for cid in cycle:
        graph.clusters[cid].members |= sep
    for ek in cycle_edges:
        if ek != vk:
            graph.edges[ek].separator |= sep
    _sweep_spurious(graph, set(cycle))
    _finish(graph, "collapse", {"cycle": list(cycle), "victim": list(vk)}, cost_before)


@dataclass(frozen=True)
class EliminateResult:
    elim: int
    buffer: int | None
    merged: tuple[int, ...]


def eliminate(graph: ClusterGraph, var: str, scope: Iterable[int]) -> EliminateResult:
    """Eliminate a variable within a scope.

    All scope clusters containing the variable merge into an elimination
    cluster.  A buffer cluster (the elimination cluster's members minus the
    variable) takes over the merged clusters' edges to the rest of the scope
    plus a new edge to the elimination cluster carrying all buffer members;
    edges leaving the scope migrate to the elimination cluster, which is
    thereby adjacent to nothing in the scope except its buffer.  No buffer is
    created when the elimination cluster is the bare variable.
    """
    scope_list = sorted({c for c in scope})
    for cid in scope_list:
        graph.cluster(cid)
    holders = [cid for cid in scope_list if var in graph.clusters[cid].members]
    if not holders:
        raise OperationError("eliminate", "variable not in any scope cluster",
                             var=var, scope=scope_list)
    cost_before = graph.cost()
    scope_set = set(scope_list)
    holder_set = set(holders)

    members: set[str] = set()
    fam: set[str] = set()
    for cid in holders:
        members |= graph.clusters[cid].members
        fam |= graph.clusters[cid].family_vars

    inherited: list[tuple[int, set[str]]] = []
    migrated: list[tuple[int, set[str]]] = []
    for cid in holders:
        for e in graph.incident_edges(cid):
            other = e.other(cid)
            if other in holder_set:
                continue
            if other in scope_set:
                inherited.append((other, set(e.separator)))
            else:
                migrated.append((other, set(e.separator)))
    for cid in holders:
        for other in list(graph.neighbors(cid)):
            graph.remove_edge(cid, other)

    elim = graph.add_cluster(members, fam)
    buffer_members = members - {var}
    buffer_id: int | None = None
    if buffer_members:
        buf = graph.add_cluster(buffer_members, ())
        buffer_id = buf.id
        graph.add_edge(elim.id, buf.id, set(buffer_members))
        for other, sep in inherited:
            graph.union_edge(buf.id, other, sep)
    for other, sep in migrated:
        graph.union_edge(elim.id, other, sep)
    for v, home in list(graph.family_home.items()):
        if home in holder_set:
            graph.family_home[v] = elim.id
    for cid in holders:
        graph.remove_cluster(cid)

    _finish(graph, "eliminate",
            {"x": var, "scope": scope_list, "elim": elim.id, "buffer": buffer_id,
             "merged": list(holders)},
            cost_before)
    return EliminateResult(elim.id, buffer_id, tuple(holders))


def add_fill_arc(graph: ClusterGraph, x: str, y: str) -> tuple[int, int] | None:
    """Make two variables co-resident: no-op if some cluster already contains
    both, otherwise y joins the lowest-id cluster P containing x and a new
    edge carrying y connects P to the lowest-id other cluster containing y.
    Returns the connected pair, or None for the no-op."""
    graph.network.variable(x)
    graph.network.variable(y)
    if x == y:
        raise OperationError("add_fill_arc", "variables must differ", x=x, y=y)
    cost_before = graph.cost()
    p = None
    partner = None
    for cid in graph.cluster_ids():
        mem = graph.clusters[cid].members
        if x in mem and y in mem:
            _finish(graph, "add_fill_arc", {"x": x, "y": y}, cost_before)
            return None
        if p is None and x in mem:
            p = cid
        if partner is None and y in mem and cid != p:
            partner = cid
    if p is None or partner is None:
        raise OperationError("add_fill_arc", "variable in no cluster",
                             x=x, y=y)
    graph.clusters[p].members.add(y)
    graph.union_edge(p, partner, {y})
    _finish(graph, "add_fill_arc", {"x": x, "y": y}, cost_before)
    return (p, partner)
