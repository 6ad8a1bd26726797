"""Drivers that turn a cluster graph into a junction tree.

Two families of solvers operate on one multiply-connected region at a time:
variable elimination (merge everything touching a variable, leave a buffer
behind) and loop division (subdivide cycles with edge rewirings until only
triangles remain, then collapse those).  ``transform_to_tree`` runs either
solver region by region and audits the bookkeeping identity that guarantees
termination: each invocation lowers the graph's edges-minus-clusters count
by at least one, so the count must eventually reach its singly-connected
floor.  Pre- and postprocessing passes (free-variable elimination, subset
merging, beneficial slides) improve cost without affecting correctness.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import transforms, verify
from .model import ClusterGraph, OperationError, biconnected_components, potential_size


@dataclass(frozen=True)
class SubInvocationAudit:
    """Edge and cluster accounting for one solver invocation on a region.

    Counts taken before the invocation: clusters and edges outside the
    region (n_t, e_t), edges crossing the boundary (e_r), edges given as
    part of the region (e_s over n_s clusters), and edges between region
    clusters that were not part of the given region (e_x).  k_s = e_s - n_s
    is the region's cycle surplus.  delta_s, delta_r, delta_x are the signed
    changes; metric_drop = 1 + k_s - delta_r - delta_x is the guaranteed
    decrease in edges-minus-clusters, and measured_drop is the decrease
    actually observed on the whole graph.
    """

    scope: tuple[int, ...]
    n_t: int
    n_s: int
    e_t: int
    e_r: int
    e_s: int
    e_x: int
    k_s: int
    delta_s: int
    delta_r: int
    delta_x: int
    metric_drop: int
    measured_drop: int


@dataclass(frozen=True)
class AlgorithmPreset:
    """A named solver configuration.

    method is "eliminate" or "divide".  For divide: cycle_policy picks the
    next cycle (shortest | cheapest | weighted), division_policy scores the
    candidate rewirings, pre_free_elim runs free-variable elimination on
    each cycle first, and per_cycle_slide runs beneficial slides over the
    cycle's region after each division pass.  post_slide and post_merge are
    whole-graph postprocessing steps; incremental use skips them.
    """

    name: str
    method: str
    cycle_policy: str = "weighted"
    division_policy: str = "min-cluster-cost-increase"
    pre_free_elim: bool = False
    per_cycle_slide: bool = False
    post_slide: bool = False
    post_merge: bool = False


PRESETS: dict[str, AlgorithmPreset] = {
    "E": AlgorithmPreset("E", "eliminate", post_merge=True),
    "D": AlgorithmPreset("D", "divide", cycle_policy="weighted",
                         pre_free_elim=True, post_slide=True, post_merge=True),
    "D2": AlgorithmPreset("D2", "divide", cycle_policy="shortest",
                          pre_free_elim=True, post_slide=True, post_merge=True),
    "ID": AlgorithmPreset("ID", "divide", cycle_policy="weighted",
                          pre_free_elim=True, per_cycle_slide=True),
    "IE": AlgorithmPreset("IE", "eliminate"),
}


# -- region driver ----------------------------------------------------------


def transform_to_tree(
    graph: ClusterGraph,
    sub: Callable[[ClusterGraph, list[int]], None],
    component_filter: set[int] | None = None,
) -> list[SubInvocationAudit]:
    """Resolve every multiply-connected region of the graph.

    Regions are biconnected components, taken smallest first; ``sub`` must
    leave its region singly-connected and may not touch anything outside it
    except edges into the region.  With ``component_filter`` only regions
    containing at least one listed cluster are resolved (the others are
    someone else's problem).  Returns one audit per invocation.
    """
    audits: list[SubInvocationAudit] = []
    while True:
        views = [v for v in biconnected_components(graph) if v.multiply_connected]
        if component_filter is not None:
            views = [v for v in views if component_filter & set(v.clusters)]
        if not views:
            return audits
        views.sort(key=lambda v: (len(v.clusters), v.clusters[0]))
        view = views[0]
        scope = list(view.clusters)
        scope_set = set(scope)

        n_s = len(scope)
        e_s = len(view.edges)
        e_x = len(graph.scope_edge_keys(scope)) - e_s
        n_t = len(graph.clusters) - n_s
        e_r = sum(1 for k in graph.edges if (k[0] in scope_set) != (k[1] in scope_set))
        e_t = len(graph.edges) - e_r - e_s - e_x
        k_s = e_s - n_s
        balance_before = graph.edges_minus_clusters()
        watermark = graph._next_id

        sub(graph, scope)

        region = {c for c in graph.clusters if c in scope_set or c >= watermark}
        if not graph.scope_is_forest(region):
            raise OperationError(
                "transform_to_tree",
                "subroutine left its region multiply-connected",
                scope=sorted(region),
            )
        n_after = len(region)
        e_r_after = sum(1 for k in graph.edges if (k[0] in region) != (k[1] in region))
        delta_s = n_after - n_s
        delta_r = e_r_after - e_r
        delta_x = -e_x
        audits.append(
            SubInvocationAudit(
                scope=tuple(scope),
                n_t=n_t, n_s=n_s, e_t=e_t, e_r=e_r, e_s=e_s, e_x=e_x, k_s=k_s,
                delta_s=delta_s, delta_r=delta_r, delta_x=delta_x,
                metric_drop=1 + k_s - delta_r - delta_x,
                measured_drop=balance_before - graph.edges_minus_clusters(),
            )
        )


# -- variable elimination ---------------------------------------------------


def min_weight_select(
    graph: ClusterGraph,
    scope: Iterable[int],
    candidates: Iterable[str],
    rng: random.Random,
) -> str:
    """The candidate whose holding clusters union into the smallest
    potential; ties drawn at random."""
    scope_list = sorted(set(scope))
    pool = sorted(set(candidates))
    if not pool:
        raise OperationError("min_weight_select", "no candidates")
    best: list[str] = []
    best_score: int | None = None
    for x in pool:
        union: set[str] = set()
        for cid in scope_list:
            if x in graph.clusters[cid].members:
                union |= graph.clusters[cid].members
        if not union:
            continue
        score = potential_size(union, graph.network)
        if best_score is None or score < best_score:
            best_score = score
            best = [x]
        elif score == best_score:
            best.append(x)
    if not best:
        raise OperationError("min_weight_select", "no candidate occurs in the scope")
    return best[0] if len(best) == 1 else rng.choice(best)


def node_elimination(
    graph: ClusterGraph,
    scope: Iterable[int],
    select: Callable[..., str] | None = None,
    rng: random.Random | None = None,
    stop_early: bool = True,
    order: Sequence[str] | None = None,
) -> int:
    """Repeatedly eliminate a variable within the scope.

    Each step merges the scope clusters holding the chosen variable and
    replaces them in the residual scope by the buffer cluster.  With
    stop_early the loop ends as soon as the residual scope is
    singly-connected; otherwise it runs through every variable, which with a
    fixed ``order`` reproduces classical elimination over the scope.
    Returns the number of eliminations performed.
    """
    if rng is None:
        rng = random.Random()
    if select is None:
        select = min_weight_select
    scope_set = {c for c in set(scope) if c in graph.clusters}
    queue = list(order) if order is not None else None
    steps = 0
    while True:
        if stop_early and graph.scope_is_forest(scope_set):
            return steps
        candidates: set[str] = set()
        for cid in scope_set:
            candidates |= graph.clusters[cid].members
        if not candidates:
            if not stop_early and not graph.scope_is_forest(scope_set):
                raise OperationError(
                    "node_elimination", "ran out of variables before the scope was resolved",
                    scope=sorted(scope_set),
                )
            return steps
        if queue is not None:
            x = None
            while queue:
                head = queue.pop(0)
                if head in candidates:
                    x = head
                    break
            if x is None:
                raise OperationError(
                    "node_elimination", "elimination order exhausted",
                    remaining=sorted(candidates),
                )
        else:
            x = select(graph, scope_set, candidates, rng)
        res = transforms.eliminate(graph, x, scope_set)
        scope_set -= set(res.merged)
        if res.buffer is not None:
            scope_set.add(res.buffer)
        steps += 1


# -- loop division ----------------------------------------------------------


WEIGHTED_CYCLE_BLEND = 0.5


def find_cycle(
    graph: ClusterGraph,
    scope: Iterable[int],
    policy: str,
    rng: random.Random,
) -> list[int]:
    """A simple cycle inside the scope, through a randomly picked cluster.

    Breadth-first search from the picked cluster yields candidate cycles
    (one per cross edge whose endpoints descend from different neighbors of
    the start).  The policy keeps the shortest, the cheapest by summed
    cluster potential, or a blend of length and log-cost; ties are drawn at
    random.  Starts are retried until one lies on a cycle.
    """
    scope_set = {c for c in set(scope) if c in graph.clusters}
    starts = sorted(scope_set)
    rng.shuffle(starts)
    for start in starts:
        parent: dict[int, int | None] = {start: None}
        depth = {start: 0}
        branch: dict[int, int] = {}
        queue = [start]
        while queue:
            node = queue.pop(0)
            for nb in graph.neighbors(node):
                if nb not in scope_set or nb in parent:
                    continue
                parent[nb] = node
                depth[nb] = depth[node] + 1
                branch[nb] = nb if node == start else branch[node]
                queue.append(nb)
        candidates: list[list[int]] = []
        for a, b in graph.scope_edge_keys(parent.keys() & scope_set):
            if parent.get(b) == a or parent.get(a) == b or start in (a, b):
                continue
            if branch[a] == branch[b]:
                continue
            left = []
            node = a
            while node is not None:
                left.append(node)
                node = parent[node]
            right = []
            node = b
            while node is not None:
                right.append(node)
                node = parent[node]
            cycle = left[::-1] + right[:-1]
            candidates.append(cycle)
        if not candidates:
            continue
        scored: list[tuple[float, tuple[int, ...], list[int]]] = []
        for cycle in candidates:
            rev = [cycle[0]] + cycle[1:][::-1]
            canon = min(tuple(cycle), tuple(rev))
            cost = sum(graph.cluster_cost(c) for c in cycle)
            if policy == "shortest":
                score = float(len(cycle))
            elif policy == "cheapest":
                score = float(cost)
            elif policy == "weighted":
                score = len(cycle) + WEIGHTED_CYCLE_BLEND * math.log2(max(cost, 1))
            else:
                raise OperationError("find_cycle", "unknown policy", policy=policy)
            scored.append((score, canon, cycle))
        scored.sort(key=lambda t: (t[0], t[1]))
        best_score = scored[0][0]
        tied = [t for t in scored if t[0] == best_score]
        return (tied[0] if len(tied) == 1 else rng.choice(tied))[2]
    raise OperationError("find_cycle", "scope contains no cycle", scope=sorted(scope_set))


@dataclass(frozen=True)
class Division:
    """One cycle-subdivision choice: delete the cycle edge, reroute through
    the via cluster with the named transformation."""

    edge: tuple[int, int]
    via: int
    kind: str


def _division_candidates(graph: ClusterGraph, cycle: list[int]) -> list[Division]:
    n = len(cycle)
    rewirings: list[Division] = []
    drops: list[Division] = []
    for i in range(n):
        p, q = cycle[i], cycle[(i + 1) % n]
        for j in range(n):
            d = cycle[j]
            if d in (p, q):
                continue
            adj = int(graph.has_edge(p, d)) + int(graph.has_edge(q, d))
            if adj == 0:
                rewirings.append(Division((p, q), d, "steal"))
            elif adj == 1:
                rewirings.append(Division((p, q), d, "slide"))
            else:
                drops.append(Division((p, q), d, "drop"))
    return rewirings or drops


def _division_score(graph: ClusterGraph, div: Division, policy: str) -> tuple:
    parts = []
    sep = graph.edge(*div.edge).separator
    for term in policy.split("+"):
        if term == "min-cluster-cost-increase":
            d = graph.clusters[div.via]
            parts.append(
                potential_size(d.members | sep, graph.network)
                - potential_size(d.members, graph.network)
            )
        elif term == "min-total-cost-increase":
            sim = graph.clone()
            _apply_division(sim, div)
            parts.append(sim.cost() - graph.cost())
        elif term == "min-degree-increase":
            parts.append({"steal": 2, "slide": 1, "drop": 0}[div.kind])
        else:
            raise OperationError("choose_division", "unknown policy", policy=term)
    return tuple(parts)


def _apply_division(graph: ClusterGraph, div: Division) -> None:
    p, q = div.edge
    if div.kind == "steal":
        transforms.steal_an_edge(graph, p, q, div.via)
    elif div.kind == "slide":
        transforms.slide(graph, p, q, div.via)
    else:
        transforms.drop(graph, p, q, div.via)


def choose_division(
    graph: ClusterGraph,
    cycle: list[int],
    policy: str,
    rng: random.Random,
) -> Division:
    """The best-scoring way to subdivide the cycle.

    Candidates pair a cycle edge with a via cluster; the via's adjacency to
    the edge's endpoints dictates the transformation kind.  Edge rewirings
    are preferred; deletions remain only for triangles and fully chorded
    cycles.  Ties are drawn at random.
    """
    candidates = _division_candidates(graph, cycle)
    if not candidates:
        raise OperationError("choose_division", "no division applies", cycle=cycle)
    scored = sorted(
        ((_division_score(graph, c, policy), c.edge, c.via, c) for c in candidates),
        key=lambda t: t[:3],
    )
    best = scored[0][0]
    tied = [t[3] for t in scored if t[0] == best]
    return tied[0] if len(tied) == 1 else rng.choice(tied)


def _cycle_alive(graph: ClusterGraph, cycle: list[int]) -> bool:
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        return False
    if any(c not in graph.clusters for c in cycle):
        return False
    return all(
        graph.has_edge(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))
    )


def divide_a_loop(
    graph: ClusterGraph,
    cycle: list[int],
    preset: AlgorithmPreset,
    rng: random.Random,
) -> int:
    """Resolve one cycle by repeated subdivision.

    Each division deletes a cycle edge and reroutes through a via cluster,
    splitting the cycle at the via into two shorter cycles which are pushed
    and processed in turn; length-2 fragments are edges, not cycles, and
    vanish.  Sub-cycles invalidated by a cleanup sweep are skipped; the
    caller's loop re-finds whatever survives.  Returns the division count.
    """
    stack = [list(cycle)]
    steps = 0
    while stack:
        cur = stack.pop()
        if not _cycle_alive(graph, cur):
            continue
        div = choose_division(graph, cur, preset.division_policy, rng)
        _apply_division(graph, div)
        steps += 1
        n = len(cur)
        i = cur.index(div.edge[0])
        if cur[(i + 1) % n] != div.edge[1]:
            i = cur.index(div.edge[1])
        rotated = cur[(i + 1) % n:] + cur[: (i + 1) % n]
        m = rotated.index(div.via)
        first, second = rotated[: m + 1], rotated[m:]
        for sub_cycle in (second, first):
            if len(sub_cycle) >= 3:
                stack.append(sub_cycle)
    return steps


def free_variable_elimination(
    graph: ClusterGraph,
    scope: Iterable[int],
) -> tuple[int, dict[int, int | None]]:
    """Eliminate every variable that occurs in exactly one scope cluster.

    Run to fixpoint, cheapest-to-check order (sorted variables, one per
    pass).  Returns the elimination count and a replacement map from each
    merged cluster to the buffer that took its place in the scope (None
    when the cluster dissolved entirely).
    """
    scope_set = {c for c in set(scope) if c in graph.clusters}
    remap: dict[int, int | None] = {}
    count = 0
    while True:
        occurrences: dict[str, int] = {}
        for cid in sorted(scope_set):
            for v in graph.clusters[cid].members:
                occurrences[v] = occurrences.get(v, 0) + 1
        free = sorted(v for v, n in occurrences.items() if n == 1)
        if not free:
            return count, remap
        res = transforms.eliminate(graph, free[0], scope_set)
        for cid in res.merged:
            remap[cid] = res.buffer
        scope_set -= set(res.merged)
        if res.buffer is not None:
            scope_set.add(res.buffer)
        count += 1


def _resolve(remap: dict[int, int | None], cid: int) -> int | None:
    while cid in remap:
        nxt = remap[cid]
        if nxt is None:
            return None
        cid = nxt
    return cid


def divide_loops(
    graph: ClusterGraph,
    scope: Iterable[int],
    preset: AlgorithmPreset,
    rng: random.Random,
) -> int:
    """Resolve a region by dividing one cycle at a time until none remains.

    Per cycle: optional free-variable elimination over the cycle's clusters
    (the cycle is rewritten through the buffers it leaves behind), then the
    subdivision pass, then optionally a beneficial-slide sweep over what the
    cycle became.  Returns the number of cycles processed.
    """
    scope_set = set(scope)
    watermark = graph._next_id
    cycles = 0
    while True:
        region = {c for c in graph.clusters if c in scope_set or c >= watermark}
        if graph.scope_is_forest(region):
            return cycles
        cycle = find_cycle(graph, region, preset.cycle_policy, rng)
        if preset.pre_free_elim:
            _, remap = free_variable_elimination(graph, set(cycle))
            if remap:
                mapped = [_resolve(remap, c) for c in cycle]
                if any(c is None for c in mapped):
                    continue
                cycle = mapped
            if not _cycle_alive(graph, cycle):
                continue
        inner_mark = graph._next_id
        divide_a_loop(graph, cycle, preset, rng)
        cycles += 1
        if preset.per_cycle_slide:
            touched = {
                c for c in graph.clusters if c in set(cycle) or c >= inner_mark
            }
            slide_beneficially(graph, scope=touched)


# -- pre- and postprocessing ------------------------------------------------


def merge_redundant_clusters(graph: ClusterGraph, mode: str) -> int:
    """Merge adjacent clusters where one's members contain the other's.

    In "pre" mode the absorbed cluster's family markings must also be
    contained, so a cluster is never glued to variables its neighbor only
    carries in transit.  "post" mode has no such guard and requires a
    singly-connected graph.  Runs to fixpoint; returns the merge count.

    Merges here are pure absorptions (no spurious sweep): on a tree this
    reproduces exactly the dropping of subsumed cliques, which keeps the
    result's cost equal to the classical elimination oracle for a fixed
    order.  Sweeping would sometimes do better, but then the cost would no
    longer be the fixed-order cost.
    """
    if mode not in ("pre", "post"):
        raise OperationError("merge_redundant_clusters", "unknown mode", mode=mode)
    if mode == "post" and not graph.is_forest():
        raise OperationError("merge_redundant_clusters", "graph is not a forest")
    count = 0
    changed = True
    while changed:
        changed = False
        for k in sorted(graph.edges):
            a, b = k
            ca, cb = graph.clusters[a], graph.clusters[b]
            pair = None
            if ca.members <= cb.members:
                pair = (a, b)
            elif cb.members <= ca.members:
                pair = (b, a)
            if pair is None:
                continue
            small, big = pair
            if mode == "pre" and not (
                graph.clusters[small].family_vars <= graph.clusters[big].family_vars
            ):
                continue
            transforms.merge(graph, small, big, sweep=False)
            count += 1
            changed = True
            break
    return count


def _slide_candidates(graph: ClusterGraph, scope: set[int] | None):
    for k in sorted(graph.edges):
        p, q = k
        if scope is not None and (p not in scope or q not in scope):
            continue
        neighborhood = set(graph.neighbors(p)) | set(graph.neighbors(q))
        for d in sorted(neighborhood - {p, q}):
            if scope is not None and d not in scope:
                continue
            if graph.has_edge(p, d) != graph.has_edge(q, d):
                yield (p, q, d)


def slide_beneficially(graph: ClusterGraph, scope: set[int] | None = None) -> int:
    """Greedy cost descent by edge slides.

    Each candidate slide is simulated on a clone (the cleanup sweep included,
    so the score is the true cost change); the steepest strictly-negative
    one is applied and the search repeats.  Without a scope the graph must
    be a forest and stays one; with a scope only slides among scope clusters
    are considered.  Returns the total cost reduction.
    """
    if scope is None and not graph.is_forest():
        raise OperationError("slide_beneficially", "graph is not a forest")
    total = 0
    while True:
        best_delta = 0
        best = None
        for p, q, d in _slide_candidates(graph, scope):
            sim = graph.clone()
            transforms.slide(sim, p, q, d)
            delta = sim.cost() - graph.cost()
            if delta < best_delta:
                best_delta = delta
                best = (p, q, d)
        if best is None:
            return total
        transforms.slide(graph, *best)
        total -= best_delta


# -- preset runner ----------------------------------------------------------


@dataclass
class RunReport:
    preset: str
    seed: int | None
    cost_before: int
    cost_after: int
    events: int
    audits: list[SubInvocationAudit] = field(default_factory=list)
    eliminations: int = 0
    cycles_divided: int = 0
    post_merges: int = 0
    post_slide_gain: int = 0


def run_preset(
    graph: ClusterGraph,
    preset: AlgorithmPreset | str,
    seed: int | None = None,
    component_filter: set[int] | None = None,
    rng: random.Random | None = None,
) -> RunReport:
    """Run a preset solver on the graph and verify the result.

    The graph afterwards is a junction forest (checked, not assumed).  With
    ``component_filter`` only regions touching the listed clusters are
    resolved and the whole-graph postprocessing steps are skipped, which is
    the incremental mode of operation.  An explicit ``rng`` takes precedence
    over ``seed``; sessions pass their own generator so that consecutive
    restores keep drawing from one stream.
    """
    if isinstance(preset, str):
        try:
            preset = PRESETS[preset]
        except KeyError:
            raise OperationError("run_preset", "unknown preset", preset=preset) from None
    if rng is None:
        rng = random.Random(seed)
    report = RunReport(
        preset=preset.name,
        seed=seed,
        cost_before=graph.cost(),
        cost_after=0,
        events=len(graph.trace),
    )

    if preset.method == "eliminate":
        def sub(g: ClusterGraph, scope: list[int]) -> None:
            report.eliminations += node_elimination(
                g, scope, select=min_weight_select, rng=rng, stop_early=True
            )
    elif preset.method == "divide":
        def sub(g: ClusterGraph, scope: list[int]) -> None:
            report.cycles_divided += divide_loops(g, scope, preset, rng)
    else:
        raise OperationError("run_preset", "unknown method", method=preset.method)

    report.audits = transform_to_tree(graph, sub, component_filter=component_filter)

    if component_filter is None:
        if preset.post_slide:
            report.post_slide_gain = slide_beneficially(graph)
        if preset.post_merge:
            report.post_merges = merge_redundant_clusters(graph, "post")

    # check a clone: the normalizing check may widen separators, and that
    # must never happen outside a traced operation
    result = verify.check_junction_tree(graph.clone())
    if not result:
        raise OperationError(
            "run_preset", "result failed verification",
            preset=preset.name, witnesses=result.witnesses[:3],
        )
    report.cost_after = graph.cost()
    report.events = len(graph.trace) - report.events
    return report
