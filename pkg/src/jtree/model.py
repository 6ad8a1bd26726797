"""Core data model: belief networks, cluster graphs, traces.

A cluster graph is an undirected graph whose vertices (clusters) are sets of
network variables and whose edges carry separators, non-empty subsets of the
intersection of their endpoints' members.  Two structural properties matter:

* family property: every variable's family ({X} union parents(X)) is contained
  in exactly one designated cluster and marked there in ``family_vars``;
* path property: for each variable X, the clusters containing X, restricted to
  edges whose separator carries X, form a connected subgraph.

A singly-connected cluster graph with these properties is a junction tree (or
forest; each component is a tree).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class NetworkError(ValueError):
    """Invalid belief-network construction or mutation."""


class OperationError(ValueError):
    """Precondition violation; names the operation and the offending ids."""

    def __init__(self, op: str, message: str, **ids: object):
        self.op = op
        self.ids = ids
        detail = ", ".join(f"{k}={v!r}" for k, v in sorted(ids.items()))
        super().__init__(f"{op}: {message}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class Variable:
    id: str
    cardinality: int

    def __post_init__(self) -> None:
        if not self.id:
            raise NetworkError("variable id must be a non-empty string")
        if self.cardinality < 1:
            raise NetworkError(
                f"variable {self.id!r}: cardinality must be >= 1, got {self.cardinality}"
            )


class BeliefNetwork:
    """Directed acyclic graph of discrete variables."""

    def __init__(self) -> None:
        self._vars: dict[str, Variable] = {}
        self._parents: dict[str, set[str]] = {}
        self._children: dict[str, set[str]] = {}

    def __len__(self) -> int:
        return len(self._vars)

    def __contains__(self, var_id: str) -> bool:
        return var_id in self._vars

    def variable(self, var_id: str) -> Variable:
        try:
            return self._vars[var_id]
        except KeyError:
            raise NetworkError(f"unknown variable {var_id!r}") from None

    def variables(self) -> list[Variable]:
        return [self._vars[v] for v in sorted(self._vars)]

    def variable_ids(self) -> list[str]:
        return sorted(self._vars)

    def cardinality(self, var_id: str) -> int:
        return self.variable(var_id).cardinality

    def parents(self, var_id: str) -> set[str]:
        self.variable(var_id)
        return set(self._parents[var_id])

    def children(self, var_id: str) -> set[str]:
        self.variable(var_id)
        return set(self._children[var_id])

    def family(self, var_id: str) -> set[str]:
        """The variable together with its parents."""
        self.variable(var_id)
        return {var_id} | self._parents[var_id]

    def arcs(self) -> list[tuple[str, str]]:
        out = []
        for child in sorted(self._parents):
            out.extend((p, child) for p in sorted(self._parents[child]))
        return sorted(out)

    def arc_count(self) -> int:
        return sum(len(ps) for ps in self._parents.values())

    def has_arc(self, parent: str, child: str) -> bool:
        return child in self._parents and parent in self._parents[child]

    def add_variable(self, var_id: str, cardinality: int) -> Variable:
        if var_id in self._vars:
            raise NetworkError(f"duplicate variable {var_id!r}")
        v = Variable(var_id, cardinality)
        self._vars[var_id] = v
        self._parents[var_id] = set()
        self._children[var_id] = set()
        return v

    def remove_variable(self, var_id: str) -> None:
        self.variable(var_id)
        if self._parents[var_id] or self._children[var_id]:
            raise NetworkError(f"variable {var_id!r} still has incident arcs")
        del self._vars[var_id]
        del self._parents[var_id]
        del self._children[var_id]

    def add_arc(self, parent: str, child: str) -> None:
        self.variable(parent)
        self.variable(child)
        if parent == child:
            raise NetworkError(f"self-arc on {parent!r}")
        if self.has_arc(parent, child):
            raise NetworkError(f"duplicate arc {parent!r} -> {child!r}")
        if self._reaches(child, parent):
            raise NetworkError(f"arc {parent!r} -> {child!r} would create a cycle")
        self._parents[child].add(parent)
        self._children[parent].add(child)

    def remove_arc(self, parent: str, child: str) -> None:
        if not self.has_arc(parent, child):
            raise NetworkError(f"no arc {parent!r} -> {child!r}")
        self._parents[child].discard(parent)
        self._children[parent].discard(child)

    def _reaches(self, start: str, goal: str) -> bool:
        seen = {start}
        stack = [start]
        while stack:
            for nxt in self._children[stack.pop()]:
                if nxt == goal:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    def copy(self) -> "BeliefNetwork":
        out = BeliefNetwork()
        out._vars = dict(self._vars)
        out._parents = {k: set(v) for k, v in self._parents.items()}
        out._children = {k: set(v) for k, v in self._children.items()}
        return out

    def signature(self) -> tuple:
        return (
            tuple((v.id, v.cardinality) for v in self.variables()),
            tuple(self.arcs()),
        )


def potential_size(members: Iterable[str], network: BeliefNetwork) -> int:
    """Product of the cardinalities of ``members`` (1 for the empty set)."""
    size = 1
    for v in members:
        size *= network.cardinality(v)
    return size


@dataclass
class Cluster:
    id: int
    members: set[str]
    family_vars: set[str]


@dataclass
class ClusterEdge:
    """Undirected edge; endpoints stored with a < b."""

    a: int
    b: int
    separator: set[str]

    def key(self) -> tuple[int, int]:
        return (self.a, self.b)

    def other(self, cluster_id: int) -> int:
        return self.b if cluster_id == self.a else self.a


@dataclass(frozen=True)
class TraceEvent:
    """One recorded operation; replaying a trace reproduces the graph."""

    kind: str
    args: dict
    cost_delta: int


def edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


class ClusterGraph:
    """Mutable cluster graph over a belief network.

    The low-level mutators here do not maintain the family/path properties on
    their own; the transformation layer is responsible for that.  Iteration
    helpers return sorted ids so that every traversal is deterministic.
    """

    def __init__(self, network: BeliefNetwork):
        self.network = network
        self.clusters: dict[int, Cluster] = {}
        self.edges: dict[tuple[int, int], ClusterEdge] = {}
        self.family_home: dict[str, int] = {}
        self.trace: list[TraceEvent] = []
        self._adj: dict[int, set[int]] = {}
        self._next_id = 0

    # -- clusters ---------------------------------------------------------

    def cluster(self, cluster_id: int) -> Cluster:
        try:
            return self.clusters[cluster_id]
        except KeyError:
            raise OperationError("cluster", "no such cluster", cluster=cluster_id) from None

    def cluster_ids(self) -> list[int]:
        return sorted(self.clusters)

    def add_cluster(self, members: Iterable[str], family_vars: Iterable[str] = ()) -> Cluster:
        cid = self._next_id
        self._next_id += 1
        c = Cluster(cid, set(members), set(family_vars))
        self.clusters[cid] = c
        self._adj[cid] = set()
        return c

    def remove_cluster(self, cluster_id: int) -> None:
        if self._adj.get(cluster_id):
            raise OperationError(
                "remove_cluster", "cluster still has edges", cluster=cluster_id
            )
        self.cluster(cluster_id)
        del self.clusters[cluster_id]
        del self._adj[cluster_id]

    # -- edges ------------------------------------------------------------

    def edge(self, a: int, b: int) -> ClusterEdge:
        try:
            return self.edges[edge_key(a, b)]
        except KeyError:
            raise OperationError("edge", "no such edge", a=a, b=b) from None

    def has_edge(self, a: int, b: int) -> bool:
        return edge_key(a, b) in self.edges

    def add_edge(self, a: int, b: int, separator: Iterable[str]) -> ClusterEdge:
        sep = set(separator)
        if a == b:
            raise OperationError("add_edge", "self edge", a=a)
        if not sep:
            raise OperationError("add_edge", "empty separator", a=a, b=b)
        self.cluster(a)
        self.cluster(b)
        if self.has_edge(a, b):
            raise OperationError("add_edge", "edge exists", a=a, b=b)
        k = edge_key(a, b)
        e = ClusterEdge(k[0], k[1], sep)
        self.edges[k] = e
        self._adj[a].add(b)
        self._adj[b].add(a)
        return e

    def union_edge(self, a: int, b: int, separator: Iterable[str]) -> ClusterEdge:
        """Add an edge, or widen the existing one's separator."""
        if self.has_edge(a, b):
            e = self.edge(a, b)
            e.separator |= set(separator)
            return e
        return self.add_edge(a, b, separator)

    def remove_edge(self, a: int, b: int) -> None:
        k = edge_key(a, b)
        if k not in self.edges:
            raise OperationError("remove_edge", "no such edge", a=a, b=b)
        del self.edges[k]
        self._adj[a].discard(b)
        self._adj[b].discard(a)

    def neighbors(self, cluster_id: int) -> list[int]:
        self.cluster(cluster_id)
        return sorted(self._adj[cluster_id])

    def degree(self, cluster_id: int) -> int:
        return len(self._adj[cluster_id])

    def incident_edges(self, cluster_id: int) -> list[ClusterEdge]:
        return [self.edge(cluster_id, n) for n in self.neighbors(cluster_id)]

    def carrying_edges(self, cluster_id: int, var_id: str) -> list[ClusterEdge]:
        """Edges at a cluster whose separator carries the variable."""
        return [e for e in self.incident_edges(cluster_id) if var_id in e.separator]

    def edge_list(self) -> list[ClusterEdge]:
        return [self.edges[k] for k in sorted(self.edges)]

    # -- measures ---------------------------------------------------------

    def cluster_cost(self, cluster_id: int) -> int:
        return potential_size(self.cluster(cluster_id).members, self.network)

    def cost(self) -> int:
        """Total state-space size: the sum of cluster potential sizes."""
        return sum(self.cluster_cost(c) for c in self.clusters)

    def edges_minus_clusters(self) -> int:
        return len(self.edges) - len(self.clusters)

    def components(self) -> list[set[int]]:
        """Connected components (cluster-id sets), sorted by smallest member."""
        seen: set[int] = set()
        out: list[set[int]] = []
        for start in self.cluster_ids():
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                for n in self._adj[stack.pop()]:
                    if n not in comp:
                        comp.add(n)
                        stack.append(n)
            seen |= comp
            out.append(comp)
        return out

    def is_forest(self) -> bool:
        # no parallel edges or self loops, so e == v - components <=> acyclic
        return len(self.edges) == len(self.clusters) - len(self.components())

    def is_multiply_connected(self) -> bool:
        return not self.is_forest()

    def scope_edge_keys(self, scope: Iterable[int]) -> list[tuple[int, int]]:
        s = set(scope)
        return sorted(k for k in self.edges if k[0] in s and k[1] in s)

    def scope_is_forest(self, scope: Iterable[int]) -> bool:
        s = {c for c in scope if c in self.clusters}
        edges = self.scope_edge_keys(s)
        comp_count = 0
        seen: set[int] = set()
        adj: dict[int, list[int]] = {c: [] for c in s}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        for start in sorted(s):
            if start in seen:
                continue
            comp_count += 1
            stack = [start]
            seen.add(start)
            while stack:
                for n in adj[stack.pop()]:
                    if n not in seen:
                        seen.add(n)
                        stack.append(n)
        return len(edges) == len(s) - comp_count

    # -- bookkeeping ------------------------------------------------------

    def record(self, kind: str, args: dict, cost_delta: int) -> TraceEvent:
        ev = TraceEvent(kind, args, cost_delta)
        self.trace.append(ev)
        return ev

    def clone(self, with_trace: bool = False) -> "ClusterGraph":
        out = ClusterGraph(self.network.copy())
        out.clusters = {
            cid: Cluster(cid, set(c.members), set(c.family_vars))
            for cid, c in self.clusters.items()
        }
        out.edges = {
            k: ClusterEdge(e.a, e.b, set(e.separator)) for k, e in self.edges.items()
        }
        out.family_home = dict(self.family_home)
        out._adj = {cid: set(ns) for cid, ns in self._adj.items()}
        out._next_id = self._next_id
        if with_trace:
            out.trace = list(self.trace)
        return out

    def signature(self) -> tuple:
        """Canonical value equal iff two graphs are identical (ids included)."""
        return (
            self.network.signature(),
            tuple(
                (c.id, tuple(sorted(c.members)), tuple(sorted(c.family_vars)))
                for c in (self.clusters[i] for i in self.cluster_ids())
            ),
            tuple(
                (k[0], k[1], tuple(sorted(self.edges[k].separator)))
                for k in sorted(self.edges)
            ),
            tuple(sorted(self.family_home.items())),
            self._next_id,
        )


def build_initial_cluster_graph(network: BeliefNetwork) -> ClusterGraph:
    """One cluster per variable holding its family; one edge per arc.

    The cluster for X has members family(X) and houses family(X).  Each arc
    X -> Y yields an edge between X's and Y's clusters with separator {X}.
    The result always satisfies the family and path properties, and for a
    polytree network it is already a junction tree.
    """
    graph = ClusterGraph(network)
    home: dict[str, int] = {}
    for var_id in network.variable_ids():
        c = graph.add_cluster(network.family(var_id), network.family(var_id))
        home[var_id] = c.id
    graph.family_home = home
    for parent, child in network.arcs():
        graph.add_edge(home[parent], home[child], {parent})
    return graph


@dataclass
class ComponentView:
    """A biconnected component: its clusters, its edges, and whether it is a
    single edge (trivially singly-connected)."""

    clusters: list[int]
    edges: list[tuple[int, int]]

    @property
    def trivial(self) -> bool:
        return len(self.edges) <= 1

    @property
    def multiply_connected(self) -> bool:
        return not self.trivial


def biconnected_components(graph: ClusterGraph) -> list[ComponentView]:
    """Biconnected components of the cluster graph (Hopcroft-Tarjan).

    Components partition the edge set; isolated clusters appear in no
    component.  Returned in a deterministic order (sorted edge lists).
    """
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    comps: list[list[tuple[int, int]]] = []
    counter = itertools.count()

    for root in graph.cluster_ids():
        if root in disc:
            continue
        estack: list[tuple[int, int]] = []
        # (node, parent, neighbor iterator)
        stack: list[tuple[int, int | None, Iterator[int]]] = [
            (root, None, iter(graph.neighbors(root)))
        ]
        disc[root] = low[root] = next(counter)
        while stack:
            node, parent, it = stack[-1]
            advanced = False
            for nb in it:
                if nb == parent:
                    continue
                if nb not in disc:
                    estack.append(edge_key(node, nb))
                    disc[nb] = low[nb] = next(counter)
                    stack.append((nb, node, iter(graph.neighbors(nb))))
                    advanced = True
                    break
                if disc[nb] < disc[node]:
                    estack.append(edge_key(node, nb))
                    low[node] = min(low[node], disc[nb])
            if advanced:
                continue
            stack.pop()
            if stack:
                pnode = stack[-1][0]
                low[pnode] = min(low[pnode], low[node])
                if low[node] >= disc[pnode]:
                    comp: list[tuple[int, int]] = []
                    mark = edge_key(pnode, node)
                    while estack:
                        e = estack.pop()
                        comp.append(e)
                        if e == mark:
                            break
                    if comp:
                        comps.append(comp)

    views = []
    for comp in comps:
        clusters = sorted({c for e in comp for c in e})
        views.append(ComponentView(clusters, sorted(comp)))
    views.sort(key=lambda v: (v.edges[0] if v.edges else (-1, -1)))
    return views
