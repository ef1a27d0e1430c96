"""Variation operators over attributed digraphs.

Three crossovers and a point mutation, all defined on the padded
adjacency-matrix encoding:

* sep_crossover walks a shortest edit path between the parents and stops
  halfway, so the offspring sits at the midpoint of an optimal alignment.
* sep_bernoulli_crossover aligns parent 2 optimally onto parent 1 and then
  inherits every matrix entry from either parent with probability 1/2.
* standard_crossover does the same entrywise mix under a uniformly random
  relabeling of parent 2, which is the permutation-naive baseline.
* mutate adds one null-vertex slot of headroom and rewrites each matrix
  entry independently with a small probability: off-diagonal indicators
  flip, diagonal attributes resample from the alternatives.

Offspring are always returned with null vertices stripped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ged import DEFAULT_MAX_ORDER, GedResult, ged_distance, ged_exact
from .graphs import (
    AttributedGraph,
    GraphInputError,
    extend_with_nulls,
    from_aa_matrix,
    permute,
    random_graph,
    strip_nulls,
    to_aa_matrix,
)

__all__ = [
    "OperatorConfig",
    "SepEditPath",
    "sep_crossover",
    "sep_bernoulli_crossover",
    "standard_crossover",
    "mutate",
    "vary_with_retry",
    "always_valid",
    "dag_io_validity",
    "random_valid_graph",
    "random_dag_io_graph",
]

ValidityPredicate = Callable[[AttributedGraph], bool]


@dataclass(frozen=True)
class OperatorConfig:
    """Shared operator knobs.

    p_m of None means the per-entry mutation rate is chosen at call time as
    1 / (m * (m - 1)) for the post-headroom order m, which alters one
    off-diagonal entry per call on average.
    """

    alphabet: tuple[int, ...] = (1, 2, 3)
    p_m: float | None = None
    max_retries: int = 50
    max_order: int = DEFAULT_MAX_ORDER

    def __post_init__(self) -> None:
        alphabet = tuple(sorted({int(a) for a in self.alphabet}))
        if not alphabet or alphabet[0] <= 0:
            raise GraphInputError(f"alphabet must be positive integers, got {self.alphabet}")
        object.__setattr__(self, "alphabet", alphabet)
        if self.p_m is not None and not (0.0 <= self.p_m <= 1.0):
            raise GraphInputError(f"p_m must lie in [0, 1], got {self.p_m}")
        if self.max_retries < 1:
            raise GraphInputError(f"max_retries must be at least 1, got {self.max_retries}")


class SepEditPath:
    """A solved edit path between two parents, samplable many times.

    Solving for the path costs one exact distance computation; each sample
    afterwards just reshuffles the edit list and replays the first half, so
    retry loops should reuse one instance instead of calling sep_crossover
    repeatedly.
    """

    def __init__(self, g1: AttributedGraph, g2: AttributedGraph, *, max_order: int = DEFAULT_MAX_ORDER) -> None:
        self.result: GedResult = ged_exact(g1, g2, max_order=max_order)
        self.base = to_aa_matrix(extend_with_nulls(g1, self.result.order))
        self.half = (self.result.distance + 1) // 2  # ceil(d*/2)

    def sample(self, rng: np.random.Generator) -> AttributedGraph:
        edits = self.result.edits
        m = self.base.copy()
        for t in rng.permutation(len(edits))[: self.half]:
            edits[t].apply(m)
        return strip_nulls(from_aa_matrix(m))


def sep_crossover(
    g1: AttributedGraph,
    g2: AttributedGraph,
    rng: np.random.Generator,
    *,
    max_order: int = DEFAULT_MAX_ORDER,
) -> AttributedGraph:
    """Apply a uniformly shuffled half of a shortest edit path to parent 1.

    The offspring is at most ceil(d*/2) edits from parent 1 and, when no
    vertex slots appear or vanish along the path, at most floor(d*/2) edits
    from parent 2. With d* = 0 the offspring is parent 1 itself.
    """
    return SepEditPath(g1, g2, max_order=max_order).sample(rng)


def sep_bernoulli_crossover(
    g1: AttributedGraph,
    g2: AttributedGraph,
    rng: np.random.Generator,
    *,
    max_order: int = DEFAULT_MAX_ORDER,
) -> AttributedGraph:
    """Mix matrix entries of optimally aligned parents with fair coin flips."""
    res = ged_exact(g1, g2, max_order=max_order)
    n = res.order
    a1 = to_aa_matrix(extend_with_nulls(g1, n))
    a2 = permute(to_aa_matrix(extend_with_nulls(g2, n)), res.alignment)
    take = rng.random((n, n)) < 0.5
    return strip_nulls(from_aa_matrix(np.where(take, a2, a1)))


def standard_crossover(
    g1: AttributedGraph,
    g2: AttributedGraph,
    rng: np.random.Generator,
) -> AttributedGraph:
    """Entrywise mix under a uniformly random alignment of parent 2.

    Draws the relabeling first and the n*n inheritance coins second.
    """
    n = max(g1.order, g2.order)
    a1 = to_aa_matrix(extend_with_nulls(g1, n))
    a2 = permute(to_aa_matrix(extend_with_nulls(g2, n)), rng.permutation(n))
    take = rng.random((n, n)) < 0.5
    return strip_nulls(from_aa_matrix(np.where(take, a2, a1)))


def _rewrite_entries(m: np.ndarray, rng: np.random.Generator, alphabet: Sequence[int], p_m: float) -> None:
    """Entrywise rewrite pass used by mutate, in place on a padded matrix."""
    order = m.shape[0]
    hits = rng.random((order, order)) < p_m
    for i in range(order):
        for j in range(order):
            if not hits[i, j]:
                continue
            if i == j:
                current = int(m[i, i])
                choices = [a for a in (0, *alphabet) if a != current]
                m[i, i] = choices[int(rng.integers(len(choices)))]
            else:
                m[i, j] = 1 - m[i, j]


def mutate(
    g: AttributedGraph,
    rng: np.random.Generator,
    config: OperatorConfig = OperatorConfig(),
) -> AttributedGraph:
    """Independent per-entry rewrite with one slot of growth headroom.

    The graph is padded by a single null vertex first, so a diagonal hit on
    the padding slot turns into a vertex insertion; a diagonal hit on a live
    vertex resamples its attribute among (alphabet plus null) minus the
    current value, deleting the vertex when null comes up.
    """
    order = g.order + 1
    m = to_aa_matrix(extend_with_nulls(g, order))
    if config.p_m is not None:
        p_m = config.p_m
    else:
        p_m = 1.0 / (order * (order - 1)) if order > 1 else 1.0
    _rewrite_entries(m, rng, config.alphabet, p_m)
    return strip_nulls(from_aa_matrix(m))


def vary_with_retry(
    op,
    parents: Sequence[AttributedGraph],
    validity: ValidityPredicate,
    rng: np.random.Generator,
    *,
    max_retries: int = 50,
    max_order: int = DEFAULT_MAX_ORDER,
) -> AttributedGraph | None:
    """Sample op(*parents, rng) until the child is valid and novel.

    Novel means a nonzero edit distance to every parent. Returns None when
    all max_retries samples were rejected; the caller decides the fallback.
    """
    for _ in range(max_retries):
        child = op(*parents, rng)
        if not validity(child):
            continue
        if all(ged_distance(child, p, max_order=max_order).total > 0 for p in parents):
            return child
    return None


def always_valid(g: AttributedGraph) -> bool:
    return True


def dag_io_validity(
    source_attr: int = 1,
    sink_attr: int = 2,
    *,
    edge_cap: int | None = None,
    max_order: int | None = None,
) -> ValidityPredicate:
    """Predicate for single-input single-output DAG search spaces.

    A graph passes when it is acyclic, carries exactly one vertex with the
    source attribute and one with the sink attribute, every vertex lies on
    some source-to-sink path, and optional edge-count and order caps hold.
    """
    if source_attr == sink_attr:
        raise GraphInputError("source and sink attributes must differ")

    def valid(g: AttributedGraph) -> bool:
        n = g.order
        if max_order is not None and n > max_order:
            return False
        if edge_cap is not None and g.edge_count > edge_cap:
            return False
        sources = [i for i, a in enumerate(g.attrs) if a == source_attr]
        sinks = [i for i, a in enumerate(g.attrs) if a == sink_attr]
        if len(sources) != 1 or len(sinks) != 1:
            return False
        src, dst = sources[0], sinks[0]
        succ: list[list[int]] = [[] for _ in range(n)]
        pred: list[list[int]] = [[] for _ in range(n)]
        indegree = [0] * n
        for i, j in g.edges:
            succ[i].append(j)
            pred[j].append(i)
            indegree[j] += 1
        # Kahn's algorithm for acyclicity
        queue = [i for i in range(n) if indegree[i] == 0]
        seen = 0
        while queue:
            v = queue.pop()
            seen += 1
            for w in succ[v]:
                indegree[w] -= 1
                if indegree[w] == 0:
                    queue.append(w)
        if seen != n:
            return False

        def reach(start: int, adjacency: list[list[int]]) -> set[int]:
            out = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for w in adjacency[v]:
                    if w not in out:
                        out.add(w)
                        stack.append(w)
            return out

        from_src = reach(src, succ)
        to_dst = reach(dst, pred)
        return all(i in from_src and i in to_dst for i in range(n))

    return valid


def random_valid_graph(
    order: int,
    validity: ValidityPredicate,
    rng: np.random.Generator,
    *,
    alphabet: Sequence[int] = (1, 2, 3),
    edge_density: float = 0.3,
    max_proposals: int = 10_000,
) -> AttributedGraph:
    """Rejection-sample uniform proposals through the validity predicate.

    Only workable when the predicate accepts a non-negligible fraction of
    uniform graphs; constrained spaces need a constructive sampler such as
    random_dag_io_graph.
    """
    for _ in range(max_proposals):
        g = random_graph(order, alphabet, edge_density, rng)
        if validity(g):
            return g
    raise RuntimeError(
        f"no valid graph of order {order} found in {max_proposals} proposals; "
        "the validity predicate may be unsatisfiable with this alphabet"
    )


def random_dag_io_graph(
    order: int,
    rng: np.random.Generator,
    *,
    source_attr: int = 1,
    sink_attr: int = 2,
    alphabet: Sequence[int] = (1, 2, 3),
    edge_density: float = 0.3,
) -> AttributedGraph:
    """Sample a graph satisfying dag_io_validity by construction.

    Vertices get a random topological order; the first becomes the source,
    the last the sink, interiors draw from the remaining letters. Every
    non-source vertex receives an in-edge from an earlier vertex and every
    non-sink vertex an out-edge to a later one (so all vertices lie on a
    source-to-sink path), then each remaining forward pair becomes an edge
    with probability edge_density. All edges point forward, so the result
    is acyclic.

    Uniform rejection through the predicate accepts on the order of 1e-4 of
    proposals at order 5, which is why this exists.
    """
    if order < 2:
        raise GraphInputError(f"single-source single-sink graphs need order >= 2, got {order}")
    interior = [a for a in alphabet if a not in (source_attr, sink_attr)]
    if order > 2 and not interior:
        raise GraphInputError(
            "alphabet has no letters left for interior vertices "
            f"(alphabet {tuple(alphabet)}, terminals {source_attr}/{sink_attr})"
        )
    topo = [int(v) for v in rng.permutation(order)]
    attrs = [0] * order
    attrs[topo[0]] = source_attr
    attrs[topo[-1]] = sink_attr
    for k in range(1, order - 1):
        attrs[topo[k]] = interior[int(rng.integers(len(interior)))]
    edges: set[tuple[int, int]] = set()
    for k in range(1, order):
        u = topo[int(rng.integers(k))]
        edges.add((u, topo[k]))
    for k in range(order - 1):
        v = topo[k]
        if not any(a == v for a, _ in edges):
            w = topo[k + 1 + int(rng.integers(order - 1 - k))]
            edges.add((v, w))
    for k in range(order):
        for l in range(k + 1, order):
            if (topo[k], topo[l]) not in edges and rng.random() < edge_density:
                edges.add((topo[k], topo[l]))
    return AttributedGraph(attrs, edges)
