"""Timing comparison of the compiled and pure cost kernels.

Runs the order-driven elimination cost and the exhaustive optimal cost on
identical seeded random graphs through both backends and prints a table of
best-of-N wall times plus the speedup.  Results are cross-checked for
agreement while timing; a disagreement aborts the run.

Usage:
    python3 benchmarks/kernel_bench.py [--repeats 5] [--seed 7]
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from jtree import kernels
from jtree.kernels import _pure


def random_graph(rng: random.Random, n: int, extra: float) -> tuple[list[int], list[int]]:
    """Connected bitmask graph: a random spanning tree plus extra*n edges."""
    adj = [0] * n
    nodes = list(range(n))
    rng.shuffle(nodes)
    for i in range(1, n):
        a, b = nodes[i], nodes[rng.randrange(i)]
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    added = 0
    while added < int(extra * n):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b and not adj[a] >> b & 1:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
            added += 1
    cards = [rng.randint(2, 4) for _ in range(n)]
    return adj, cards


def best_of(fn, payloads, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in payloads:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run_case(name: str, payloads, repeats: int) -> None:
    pure_fn = getattr(_pure, name)
    fast_fn = getattr(kernels._fast, name)
    for args in payloads:
        a, b = pure_fn(*args), fast_fn(*args)
        if a != b:
            sys.exit(f"backend disagreement on {name}: pure={a} fast={b} args={args}")
    t_pure = best_of(pure_fn, payloads, repeats)
    t_fast = best_of(fast_fn, payloads, repeats)
    label = f"{name} x{len(payloads)}"
    print(f"{label:<28} pure {t_pure * 1e3:9.2f} ms   fast {t_fast * 1e3:9.2f} ms"
          f"   speedup {t_pure / t_fast:6.1f}x")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats, best kept")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    if kernels._fast is None:
        print("compiled backend unavailable (pure only); nothing to compare", file=sys.stderr)
        return 1
    print(f"dispatch backend: {kernels.BACKEND}")

    rng = random.Random(args.seed)
    for n in (20, 40, 63):
        payloads = []
        for _ in range(50):
            adj, cards = random_graph(rng, n, extra=1.0)
            order = list(range(n))
            rng.shuffle(order)
            payloads.append((adj, cards, order))
        run_case("elimination_cost", payloads, args.repeats)
        print(f"    (n={n}, 50 graphs, spanning tree + {n} extra edges)")

    # the pure search grows steeply with n; keep the large case small
    for n, count, repeats in ((10, 20, args.repeats), (12, 3, 2)):
        payloads = []
        for _ in range(count):
            adj, cards = random_graph(rng, n, extra=0.6)
            payloads.append((adj, cards))
        run_case("optimal_cost", payloads, repeats)
        print(f"    (n={n}, {count} graphs, branch and bound)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
