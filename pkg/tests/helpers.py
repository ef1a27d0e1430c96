"""Shared test utilities, including an independent brute-force distance oracle.

The oracle below is deliberately written in plain Python with no reuse of
library internals: it pads both graphs to a common order, then scans every
alignment of the second graph's vertices onto the first one's positions and
counts differing matrix entries.
"""

from __future__ import annotations

import itertools

from sepx.graphs import AttributedGraph, random_graph


def plain_matrix(g: AttributedGraph, n: int) -> list[list[int]]:
    m = [[0] * n for _ in range(n)]
    for i, a in enumerate(g.attrs):
        m[i][i] = a
    for i, j in g.edges:
        m[i][j] = 1
    return m


def brute_ged(g1: AttributedGraph, g2: AttributedGraph) -> int:
    n = max(g1.order, g2.order)
    m1 = plain_matrix(g1, n)
    m2 = plain_matrix(g2, n)
    best = None
    for assign in itertools.permutations(range(n)):
        cost = 0
        for i in range(n):
            mi = m1[i]
            ai = assign[i]
            for j in range(n):
                if mi[j] != m2[ai][assign[j]]:
                    cost += 1
        if best is None or cost < best:
            best = cost
    return 0 if best is None else best


def random_pair(rng, max_order=5, alphabet=(1, 2, 3), density=0.3, equal_order=False):
    n1 = int(rng.integers(1, max_order + 1))
    n2 = n1 if equal_order else int(rng.integers(1, max_order + 1))
    return (
        random_graph(n1, alphabet, density, rng),
        random_graph(n2, alphabet, density, rng),
    )
