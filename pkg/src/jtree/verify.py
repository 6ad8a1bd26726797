"""Independent validity checks and cost oracles.

Everything here is ground truth for the rest of the package: the checkers
inspect a cluster graph from first principles, and the cost oracles compute
elimination costs by the classical moralize-and-fill route, sharing no code
with the transformation engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernels
from .model import BeliefNetwork, ClusterGraph, OperationError, edge_key


@dataclass
class CheckReport:
    name: str
    passed: bool
    witnesses: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _report(name: str, witnesses: list[str]) -> CheckReport:
    return CheckReport(name, not witnesses, witnesses)


def check_structure(graph: ClusterGraph) -> CheckReport:
    """Representation invariants: canonical edges, separators inside the
    endpoint intersection and non-empty, family_vars consistent with the
    family-home assignment, no empty clusters."""
    w: list[str] = []
    net = graph.network
    known = set(net.variable_ids())
    for cid in graph.cluster_ids():
        c = graph.clusters[cid]
        if not c.members:
            w.append(f"cluster {cid} is empty")
        bad = sorted(c.members - known)
        if bad:
            w.append(f"cluster {cid} has unknown variables {bad}")
        if not c.family_vars <= c.members:
            w.append(
                f"cluster {cid}: family_vars {sorted(c.family_vars - c.members)}"
                " not among members"
            )
        if cid >= graph._next_id:
            w.append(f"cluster {cid} at or above the id counter {graph._next_id}")
    for k, e in sorted(graph.edges.items()):
        if k != (e.a, e.b) or e.a >= e.b:
            w.append(f"edge {k} stored non-canonically")
        if e.a not in graph.clusters or e.b not in graph.clusters:
            w.append(f"edge {k} has a missing endpoint")
            continue
        if not e.separator:
            w.append(f"edge {k} has an empty separator")
        extra = e.separator - (graph.clusters[e.a].members & graph.clusters[e.b].members)
        if extra:
            w.append(f"edge {k} separator exceeds the member intersection by {sorted(extra)}")
    for cid in graph.cluster_ids():
        for n in graph.neighbors(cid):
            if edge_key(cid, n) not in graph.edges:
                w.append(f"adjacency lists an absent edge {edge_key(cid, n)}")
    housed: dict[int, set[str]] = {cid: set() for cid in graph.clusters}
    for var, home in sorted(graph.family_home.items()):
        if home not in graph.clusters:
            w.append(f"family of {var} assigned to missing cluster {home}")
            continue
        housed[home] |= net.family(var)
    for cid, expect in sorted(housed.items()):
        got = graph.clusters[cid].family_vars
        if got != expect:
            w.append(
                f"cluster {cid} family_vars {sorted(got)} != union of housed"
                f" families {sorted(expect)}"
            )
    return _report("structure", w)


def check_family_property(graph: ClusterGraph) -> CheckReport:
    """Every family is contained, and marked, in exactly one assigned cluster."""
    w: list[str] = []
    for var in graph.network.variable_ids():
        home = graph.family_home.get(var)
        if home is None:
            w.append(f"family of {var} has no assigned cluster")
            continue
        if home not in graph.clusters:
            w.append(f"family of {var} assigned to missing cluster {home}")
            continue
        fam = graph.network.family(var)
        c = graph.clusters[home]
        if not fam <= c.members:
            w.append(
                f"family of {var} not contained in cluster {home}:"
                f" missing {sorted(fam - c.members)}"
            )
        if not fam <= c.family_vars:
            w.append(
                f"family of {var} not marked in cluster {home}:"
                f" unmarked {sorted(fam - c.family_vars)}"
            )
    return _report("family_property", w)


def check_path_property(graph: ClusterGraph) -> CheckReport:
    """For each variable, the clusters containing it are connected using only
    edges whose separator carries it.

    This connectivity formulation is equivalent to the pairwise one: a path
    between every pair exists iff the restricted subgraph is connected.
    """
    w: list[str] = []
    for var in graph.network.variable_ids():
        holders = [cid for cid in graph.cluster_ids() if var in graph.clusters[cid].members]
        if len(holders) <= 1:
            continue
        parent = {cid: cid for cid in holders}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for k in sorted(graph.edges):
            e = graph.edges[k]
            if var in e.separator and k[0] in parent and k[1] in parent:
                parent[find(k[0])] = find(k[1])
        roots = sorted({find(c) for c in holders})
        if len(roots) > 1:
            w.append(f"variable {var} split across components rooted at {roots}")
    return _report("path_property", w)


def check_junction_tree(graph: ClusterGraph, normalize: bool = True) -> CheckReport:
    """Family + path properties, singly-connected, separators equal to the
    endpoint intersections.

    Components may form a forest; each must be a tree.  With ``normalize``
    (the default) separators narrower than the intersection are first widened
    in place, then the remaining checks run.  On a singly-connected graph the
    one path between two clusters must carry everything they share, so stored
    subset separators never pin down a different tree and widening is sound;
    it is skipped on multiply-connected or structurally broken graphs.
    """
    w: list[str] = []
    structure = check_structure(graph)
    w.extend(f"{structure.name}: {x}" for x in structure.witnesses)
    forest = graph.is_forest()
    if not forest:
        w.append(
            "not singly-connected:"
            f" {len(graph.edges)} edges, {len(graph.clusters)} clusters,"
            f" {len(graph.components())} components"
        )
    if normalize and structure.passed and forest:
        for k in sorted(graph.edges):
            e = graph.edges[k]
            inter = graph.clusters[e.a].members & graph.clusters[e.b].members
            if e.separator < inter:
                e.separator = set(inter)
    for rep in (check_family_property(graph), check_path_property(graph)):
        w.extend(f"{rep.name}: {x}" for x in rep.witnesses)
    if not w:
        for k in sorted(graph.edges):
            e = graph.edges[k]
            inter = graph.clusters[e.a].members & graph.clusters[e.b].members
            if e.separator != inter:
                w.append(
                    f"edge {k} separator {sorted(e.separator)} !="
                    f" intersection {sorted(inter)}"
                )
    return _report("junction_tree", w)


def _co_occurrence(graph: ClusterGraph) -> tuple[list[str], dict[str, set[str]]]:
    ids = graph.network.variable_ids()
    adj: dict[str, set[str]] = {v: set() for v in ids}
    for cid in graph.cluster_ids():
        mem = sorted(graph.clusters[cid].members)
        for i, u in enumerate(mem):
            for v in mem[i + 1 :]:
                adj[u].add(v)
                adj[v].add(u)
    return ids, adj


def check_chordal_embedding(graph: ClusterGraph) -> CheckReport:
    """The variable co-occurrence graph is chordal, contains the moral graph,
    and the clusters are exactly its maximal cliques.

    Meaningful for a finished junction tree after redundant-cluster merging;
    before merging, subset clusters legitimately fail maximality.
    """
    w: list[str] = []
    ids, adj = _co_occurrence(graph)
    net = graph.network

    placed = {v for cid in graph.clusters for v in graph.clusters[cid].members}
    for var in ids:
        if var not in placed:
            w.append(f"variable {var} appears in no cluster")

    for var in ids:
        fam = sorted(net.family(var))
        for i, u in enumerate(fam):
            for v in fam[i + 1 :]:
                if v not in adj[u]:
                    w.append(f"moral edge {u}-{v} (family of {var}) not covered")

    # maximum-cardinality search; chordal iff every vertex's already-visited
    # neighborhood is a clique (the reverse visit order is then a perfect
    # elimination order)
    visited: list[str] = []
    weight = {v: 0 for v in ids}
    chordal = True
    pending = set(ids)
    while pending:
        pick = max(sorted(pending), key=lambda v: weight[v])
        earlier = adj[pick] & set(visited)
        e = sorted(earlier)
        for i, u in enumerate(e):
            for v in e[i + 1 :]:
                if v not in adj[u]:
                    w.append(
                        f"co-occurrence graph not chordal at {pick}:"
                        f" earlier neighbors {u},{v} not adjacent"
                    )
                    chordal = False
        visited.append(pick)
        pending.discard(pick)
        for n in adj[pick]:
            if n in pending:
                weight[n] += 1

    member_sets = [frozenset(graph.clusters[cid].members) for cid in graph.cluster_ids()]
    if len(set(member_sets)) != len(member_sets):
        seen: set[frozenset] = set()
        for cid in graph.cluster_ids():
            m = frozenset(graph.clusters[cid].members)
            if m in seen:
                w.append(f"cluster {cid} duplicates another cluster {sorted(m)}")
            seen.add(m)

    for cid in graph.cluster_ids():
        mem = graph.clusters[cid].members
        for v in ids:
            if v not in mem and mem <= adj[v]:
                w.append(f"cluster {cid} not maximal: {v} is adjacent to all of {sorted(mem)}")

    if chordal and placed == set(ids):
        # cliques of a chordal graph via its perfect elimination order
        order = list(reversed(visited))
        index = {v: i for i, v in enumerate(order)}
        cliques: list[frozenset] = []
        for v in order:
            cl = frozenset({v} | {u for u in adj[v] if index[u] > index[v]})
            cliques.append(cl)
        maximal = [c for c in cliques if not any(c < d for d in cliques)]
        missing = set(maximal) - set(member_sets)
        for m in sorted(missing, key=sorted):
            w.append(f"maximal clique {sorted(m)} is not a cluster")
    return _report("chordal_embedding", w)


def assert_valid(graph: ClusterGraph, context: str = "") -> None:
    """Raise if the structure, family, or path checks fail (debug hook)."""
    for rep in (check_structure(graph), check_family_property(graph), check_path_property(graph)):
        if not rep.passed:
            where = f" after {context}" if context else ""
            raise OperationError(
                "assert_valid",
                f"{rep.name} violated{where}: " + "; ".join(rep.witnesses[:5]),
            )


def moral_adjacency(network: BeliefNetwork) -> tuple[list[str], list[int]]:
    """Moral graph as bitmask adjacency over the sorted variable ids."""
    ids = network.variable_ids()
    index = {v: i for i, v in enumerate(ids)}
    adj = [0] * len(ids)
    for var in ids:
        fam = sorted(network.family(var))
        for i, u in enumerate(fam):
            for v in fam[i + 1 :]:
                adj[index[u]] |= 1 << index[v]
                adj[index[v]] |= 1 << index[u]
    return ids, adj


def reference_elimination_cost(network: BeliefNetwork, order: list[str]) -> int:
    """Classical elimination cost: moralize, eliminate in the given order,
    record each clique {x} union N(x), drop subsumed cliques, sum the
    potential sizes.  Independent of the transformation engine."""
    ids, adj = moral_adjacency(network)
    if sorted(order) != ids:
        raise OperationError(
            "reference_elimination_cost",
            "order must be a permutation of the network's variables",
            order=order,
        )
    index = {v: i for i, v in enumerate(ids)}
    cards = [network.cardinality(v) for v in ids]
    return kernels.elimination_cost(adj, cards, [index[v] for v in order])


def brute_force_optimal_cost(network: BeliefNetwork) -> int:
    """Minimum elimination cost over all orders.  Exponential; networks of
    more than 9 variables are refused."""
    if len(network) > 9:
        raise OperationError(
            "brute_force_optimal_cost", "network too large", variables=len(network)
        )
    ids, adj = moral_adjacency(network)
    cards = [network.cardinality(v) for v in ids]
    return kernels.optimal_cost(adj, cards)
