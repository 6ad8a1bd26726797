"""Pure-Python cost kernels over bitmask adjacency.

Graphs are given as ``adj``: a list where ``adj[i]`` is the neighbor set of
vertex ``i`` encoded as an int bitmask, and ``cards``: the per-vertex state
counts.  These implement the classical order-driven elimination cost and the
exhaustive minimum over all elimination orders; the compiled module mirrors
them operation for operation.
"""

from __future__ import annotations


def _potential(mask: int, cards: list[int]) -> int:
    size = 1
    while mask:
        v = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        size *= cards[v]
    return size


def _eliminate(adj: list[int], x: int) -> None:
    nb = adj[x]
    rest = nb
    while rest:
        v = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        adj[v] = (adj[v] | nb) & ~(1 << v) & ~(1 << x)
    adj[x] = 0


def elimination_cost(adj: list[int], cards: list[int], order: list[int]) -> int:
    """Total size of the cliques induced by eliminating in the given order.

    Eliminating x records the clique {x} union N(x), pairwise-connects N(x),
    and removes x.  Cliques subsumed by an earlier clique are not charged
    (an eliminated vertex cannot reappear, so only earlier cliques can
    contain later ones).
    """
    n = len(adj)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of range(n)")
    work = list(adj)
    cliques: list[int] = []
    for x in order:
        cliques.append(work[x] | (1 << x))
        _eliminate(work, x)
    total = 0
    kept: list[int] = []
    for cl in cliques:
        if any(k & cl == cl for k in kept):
            continue
        kept.append(cl)
        total += _potential(cl, cards)
    return total


def optimal_cost(adj: list[int], cards: list[int]) -> int:
    """Minimum elimination cost over every order (branch and bound).

    Sound pruning: the running clique-sum only grows along a branch, so any
    partial sum at or above the incumbent can be cut.  No memoization across
    histories; whether a future clique is subsumed depends on the cliques
    already recorded, so state-based dominance would be unsound.
    """
    n = len(adj)
    if n == 0:
        return 0
    full = (1 << n) - 1

    # greedy min-clique incumbent
    work = list(adj)
    remaining = full
    greedy: list[int] = []
    while remaining:
        pick, pick_pot = -1, -1
        rest = remaining
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            p = _potential(work[v] | (1 << v), cards)
            if pick < 0 or p < pick_pot:
                pick, pick_pot = v, p
        greedy.append(pick)
        _eliminate(work, pick)
        remaining &= ~(1 << pick)
    best = elimination_cost(adj, cards, greedy)

    kept: list[int] = []

    def search(a: list[int], remaining: int, partial: int) -> None:
        nonlocal best
        if not remaining:
            best = partial
            return
        cands: list[tuple[int, int]] = []
        rest = remaining
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            cands.append((_potential(a[v] | (1 << v), cards), v))
        cands.sort()
        for pot, v in cands:
            cl = a[v] | (1 << v)
            subsumed = any(k & cl == cl for k in kept)
            add = 0 if subsumed else pot
            if partial + add >= best:
                continue
            a2 = list(a)
            _eliminate(a2, v)
            if not subsumed:
                kept.append(cl)
            search(a2, remaining & ~(1 << v), partial + add)
            if not subsumed:
                kept.pop()

    search(list(adj), full, 0)
    return best
