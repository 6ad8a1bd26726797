"""Cost kernels: compiled extension when available, pure Python otherwise.

Set ``JTREE_PURE_KERNELS=1`` to force the pure implementation (used by the
kernel benchmark and the agreement tests).  The compiled kernel is limited to
63 vertices and 64-bit clique sums; inputs outside that envelope silently use
the pure path, which works on arbitrary Python ints.
"""

from __future__ import annotations

import importlib
import os

from . import _pure

BACKEND = "pure"
_fast = None
if os.environ.get("JTREE_PURE_KERNELS") != "1":
    try:
        # importlib avoids the from-import attribute lookup, which would
        # return the placeholder None bound above instead of the extension.
        _fast = importlib.import_module("._fast", __name__)
        BACKEND = "fast"
    except ImportError:
        pass


def _fits_compiled(adj: list[int], cards: list[int]) -> bool:
    if _fast is None or len(adj) > 63:
        return False
    total = 1
    for c in cards:
        total *= c
    return max(1, len(adj)) * total < (1 << 62)


def elimination_cost(adj: list[int], cards: list[int], order: list[int]) -> int:
    """Clique-sum cost of eliminating ``order`` on the given undirected graph."""
    impl = _fast if _fits_compiled(adj, cards) else _pure
    return impl.elimination_cost(list(adj), list(cards), list(order))


def optimal_cost(adj: list[int], cards: list[int]) -> int:
    """Minimum elimination cost over all orders."""
    impl = _fast if _fits_compiled(adj, cards) else _pure
    return impl.optimal_cost(list(adj), list(cards))
