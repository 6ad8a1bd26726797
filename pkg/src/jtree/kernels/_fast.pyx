# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the pure cost kernels; see _pure.py for the semantics.

Limits: at most 63 vertices, and the caller must ensure the clique-sum fits
in a signed 64-bit int (the package wrapper checks both before dispatching
here).
"""

from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc


cdef inline int _lowbit(uint64_t mask) noexcept nogil:
    cdef int v = 0
    while not (mask & 1):
        mask >>= 1
        v += 1
    return v


cdef int64_t _potential(uint64_t mask, int64_t* cards) noexcept nogil:
    cdef int64_t size = 1
    cdef int v
    while mask:
        v = _lowbit(mask)
        mask &= mask - 1
        size *= cards[v]
    return size


cdef void _eliminate(uint64_t* adj, int x) noexcept nogil:
    cdef uint64_t nb = adj[x]
    cdef uint64_t rest = nb
    cdef int v
    while rest:
        v = _lowbit(rest)
        rest &= rest - 1
        adj[v] = (adj[v] | nb) & ~(<uint64_t>1 << v) & ~(<uint64_t>1 << x)
    adj[x] = 0


def elimination_cost(adj, cards, order):
    cdef int n = len(adj)
    if n > 63:
        raise ValueError("compiled kernel supports at most 63 vertices")
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of range(n)")
    cdef uint64_t work[64]
    cdef int64_t crd[64]
    cdef uint64_t cliques[64]
    cdef int i, j, x
    for i in range(n):
        work[i] = adj[i]
        crd[i] = cards[i]
    for i in range(n):
        x = order[i]
        cliques[i] = work[x] | (<uint64_t>1 << x)
        _eliminate(work, x)
    cdef int64_t total = 0
    cdef bint subsumed
    for i in range(n):
        subsumed = False
        for j in range(i):
            if cliques[j] & cliques[i] == cliques[i]:
                subsumed = True
                break
        if not subsumed:
            total += _potential(cliques[i], crd)
    return total


cdef int64_t _search(uint64_t* adjbuf, int depth, int n, uint64_t remaining,
                     int64_t partial, int64_t best, int64_t* cards,
                     uint64_t* kept, int nkept) noexcept nogil:
    if remaining == 0:
        return partial
    cdef uint64_t* a = adjbuf + depth * n
    cdef uint64_t* a2 = adjbuf + (depth + 1) * n
    cdef int64_t pots[64]
    cdef int vs[64]
    cdef int k = 0
    cdef uint64_t rest = remaining
    cdef int v, i, j
    cdef int64_t p
    while rest:
        v = _lowbit(rest)
        rest &= rest - 1
        pots[k] = _potential(a[v] | (<uint64_t>1 << v), cards)
        vs[k] = v
        k += 1
    # insertion sort by potential, stable on vertex id
    for i in range(1, k):
        p = pots[i]
        v = vs[i]
        j = i - 1
        while j >= 0 and pots[j] > p:
            pots[j + 1] = pots[j]
            vs[j + 1] = vs[j]
            j -= 1
        pots[j + 1] = p
        vs[j + 1] = v
    cdef uint64_t cl
    cdef bint subsumed
    cdef int64_t add, got
    for i in range(k):
        v = vs[i]
        cl = a[v] | (<uint64_t>1 << v)
        subsumed = False
        for j in range(nkept):
            if kept[j] & cl == cl:
                subsumed = True
                break
        add = 0 if subsumed else pots[i]
        if partial + add >= best:
            continue
        for j in range(n):
            a2[j] = a[j]
        _eliminate(a2, v)
        if not subsumed:
            kept[nkept] = cl
            got = _search(adjbuf, depth + 1, n, remaining & ~(<uint64_t>1 << v),
                          partial + add, best, cards, kept, nkept + 1)
        else:
            got = _search(adjbuf, depth + 1, n, remaining & ~(<uint64_t>1 << v),
                          partial + add, best, cards, kept, nkept)
        if got < best:
            best = got
    return best


def optimal_cost(adj, cards):
    cdef int n = len(adj)
    if n == 0:
        return 0
    if n > 63:
        raise ValueError("compiled kernel supports at most 63 vertices")
    cdef int64_t crd[64]
    cdef uint64_t work[64]
    cdef int i
    for i in range(n):
        work[i] = adj[i]
        crd[i] = cards[i]

    # greedy min-clique incumbent
    cdef uint64_t remaining = (<uint64_t>1 << n) - 1
    cdef list greedy = []
    cdef int pick, v
    cdef int64_t pick_pot, p
    cdef uint64_t rest
    while remaining:
        pick = -1
        pick_pot = 0
        rest = remaining
        while rest:
            v = _lowbit(rest)
            rest &= rest - 1
            p = _potential(work[v] | (<uint64_t>1 << v), crd)
            if pick < 0 or p < pick_pot:
                pick = v
                pick_pot = p
        greedy.append(pick)
        _eliminate(work, pick)
        remaining &= ~(<uint64_t>1 << pick)
    cdef int64_t best = elimination_cost(adj, cards, greedy)

    cdef uint64_t* adjbuf = NULL
    cdef uint64_t kept[64]
    adjbuf = <uint64_t*> malloc(sizeof(uint64_t) * (n + 1) * n)
    if adjbuf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            adjbuf[i] = adj[i]
        best = _search(adjbuf, 0, n, (<uint64_t>1 << n) - 1, 0, best, crd, kept, 0)
    finally:
        free(adjbuf)
    return best
