"""Exact graph edit distance over attributed adjacency matrices.

Both graphs are padded with null vertices to a common order n, and the
distance is the minimum, over all vertex alignments, of the number of
differing matrix entries. Diagonal differences are vertex edits (add,
delete, substitute) and off-diagonal differences are edge edits, so the
minimizing alignment also yields a shortest edit path between the graphs.

Two solvers share the same contract: exhaustive enumeration of all n!
alignments (vectorized, the default for n <= 8) and a depth-first
branch-and-bound over partial assignments (default for larger n, up to a
configurable cap). Ties between co-minimal alignments are broken
deterministically in favor of the first one under the search order, which
makes results reproducible; pass an rng to sample uniformly among the
co-minimal alignments instead.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graphs import (
    AttributedGraph,
    GraphInputError,
    MatrixDistance,
    check_aa_matrix,
    extend_with_nulls,
    from_aa_matrix,
    matrix_distances,
    to_aa_matrix,
)

__all__ = [
    "CapacityError",
    "EditOp",
    "GedResult",
    "ged_exact",
    "ged_distance",
    "edits_from_alignment",
    "apply_edits",
    "DEFAULT_MAX_ORDER",
]

DEFAULT_MAX_ORDER = 16
_EXHAUSTIVE_LIMIT = 8
_CHUNK = 50_000

_VERTEX_KINDS = ("add_vertex", "delete_vertex", "substitute_attr")
_EDGE_KINDS = ("add_edge", "delete_edge")


class CapacityError(RuntimeError):
    """The padded order of a graph pair exceeds the configured maximum."""


@dataclass(frozen=True)
class EditOp:
    """One entrywise edit of an attributed adjacency matrix.

    Vertex ops target diagonal entry (i, i); edge ops target (i, j).
    """

    kind: str
    i: int
    j: int | None = None
    attr: int | None = None

    def __post_init__(self) -> None:
        if self.kind in _VERTEX_KINDS:
            if self.j is not None:
                raise GraphInputError(f"{self.kind} takes a single vertex index")
            needs_attr = self.kind != "delete_vertex"
            if needs_attr and (self.attr is None or self.attr <= 0):
                raise GraphInputError(f"{self.kind} needs a positive attribute, got {self.attr}")
            if not needs_attr and self.attr is not None:
                raise GraphInputError("delete_vertex takes no attribute")
        elif self.kind in _EDGE_KINDS:
            if self.j is None or self.attr is not None:
                raise GraphInputError(f"{self.kind} takes two vertex indices and no attribute")
            if self.i == self.j:
                raise GraphInputError(f"{self.kind} cannot target a self-loop ({self.i}, {self.j})")
        else:
            raise GraphInputError(f"unknown edit kind {self.kind!r}")
        if self.i < 0 or (self.j is not None and self.j < 0):
            raise GraphInputError(f"{self.kind} has a negative index")

    @classmethod
    def add_vertex(cls, i: int, attr: int) -> "EditOp":
        return cls("add_vertex", i, attr=attr)

    @classmethod
    def delete_vertex(cls, i: int) -> "EditOp":
        return cls("delete_vertex", i)

    @classmethod
    def substitute_attr(cls, i: int, attr: int) -> "EditOp":
        return cls("substitute_attr", i, attr=attr)

    @classmethod
    def add_edge(cls, i: int, j: int) -> "EditOp":
        return cls("add_edge", i, j=j)

    @classmethod
    def delete_edge(cls, i: int, j: int) -> "EditOp":
        return cls("delete_edge", i, j=j)

    def apply(self, m: np.ndarray) -> None:
        """Write this edit into matrix m in place."""
        n = m.shape[0]
        if self.i >= n or (self.j is not None and self.j >= n):
            raise GraphInputError(
                f"{self.kind} at ({self.i}, {self.j}) is out of range for order {n}; "
                "extend the graph first"
            )
        if self.kind == "add_vertex" or self.kind == "substitute_attr":
            m[self.i, self.i] = self.attr
        elif self.kind == "delete_vertex":
            m[self.i, self.i] = 0
        elif self.kind == "add_edge":
            m[self.i, self.j] = 1
        else:
            m[self.i, self.j] = 0

    def to_json(self) -> dict:
        doc = {"op": self.kind, "i": self.i}
        if self.j is not None:
            doc["j"] = self.j
        if self.attr is not None:
            doc["attr"] = self.attr
        return doc

    @classmethod
    def from_json(cls, doc) -> "EditOp":
        if not isinstance(doc, dict) or "op" not in doc or "i" not in doc:
            raise GraphInputError(f"edit document must have 'op' and 'i', got {doc!r}")
        return cls(doc["op"], doc["i"], j=doc.get("j"), attr=doc.get("attr"))


@dataclass(frozen=True)
class GedResult:
    """Distance, minimizing alignment, and a shortest edit path.

    ``alignment`` is the relabeling applied to the padded second graph: its
    vertex v takes position alignment[v], after which the two matrices
    disagree in exactly ``distance`` entries. ``edits`` rewrites the padded
    first matrix into that aligned second matrix, diagonal entries first and
    off-diagonal entries in row-major order. ``order`` is the common padded
    order.
    """

    distance: int
    vertex_distance: int
    edge_distance: int
    alignment: tuple[int, ...]
    edits: tuple[EditOp, ...]
    order: int

    def to_json(self) -> dict:
        return {
            "distance": self.distance,
            "d_v": self.vertex_distance,
            "d_e": self.edge_distance,
            "alignment": list(self.alignment),
            "edits": [e.to_json() for e in self.edits],
        }


@lru_cache(maxsize=None)
def _perm_table(n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def _exhaustive_assign(a1: np.ndarray, a2: np.ndarray, rng) -> tuple[np.ndarray, int]:
    """Scan every alignment; returns (assignment, cost).

    The assignment maps positions of graph 1 to vertices of graph 2, and the
    scan order is lexicographic in that vector, so np.argmin picks the
    lexicographically smallest co-minimal assignment.
    """
    n = a1.shape[0]
    table = _perm_table(n)
    if a1.size and max(int(a1.max()), int(a2.max())) < np.iinfo(np.int16).max:
        a1 = a1.astype(np.int16)
        a2 = a2.astype(np.int16)
    best_cost = None
    best_row = None
    tie_count = 0
    for start in range(0, len(table), _CHUNK):
        block = table[start : start + _CHUNK]
        aligned = a2[block[:, :, None], block[:, None, :]]
        costs = (aligned != a1).reshape(len(block), -1).sum(axis=1)
        if rng is None:
            idx = int(np.argmin(costs))
            if best_cost is None or costs[idx] < best_cost:
                best_cost = int(costs[idx])
                best_row = block[idx].copy()
        else:
            block_min = int(costs.min())
            if best_cost is None or block_min < best_cost:
                best_cost = block_min
                tie_count = 0
            if block_min == best_cost:
                ties = np.flatnonzero(costs == best_cost)
                for t in ties:
                    tie_count += 1
                    if rng.random() < 1.0 / tie_count:
                        best_row = block[t].copy()
    return best_row, best_cost


class _BranchAndBound:
    """DFS over partial position-to-vertex assignments with admissible bounds.

    Positions of graph 1 are filled in order 0..n-1; candidates are tried in
    ascending vertex order, so the first optimum found is the
    lexicographically smallest one, matching the exhaustive scan.

    Two lower bounds gate each subtree. A cheap one adds a multiset-matching
    bound on the unassigned diagonal, absolute degree differences between
    assigned rows/columns and their images over the unassigned block, and a
    sorted degree-sequence pairing inside that block. When the cheap bound
    does not prune, a tighter assignment relaxation runs: each remaining
    (position, vertex) pair is costed with its exact attribute mismatch, its
    exact disagreement against all already-assigned rows and columns, and
    half the in/out degree gap inside the unassigned block (each block entry
    is shared by two pairs, hence the halving keeps the bound admissible),
    then a minimum-cost assignment over those pair costs bounds the best
    completion. Costs are doubled so everything stays integral.
    """

    def __init__(self, a1: np.ndarray, a2: np.ndarray, rng) -> None:
        self.n = a1.shape[0]
        self.attrs1 = a1.diagonal().copy()
        self.attrs2 = a2.diagonal().copy()
        self.e1 = a1.copy()
        np.fill_diagonal(self.e1, 0)
        self.e2 = a2.copy()
        np.fill_diagonal(self.e2, 0)
        self.rng = rng
        self.a = np.zeros(self.n, dtype=np.intp)
        self.used = np.zeros(self.n, dtype=bool)
        self.best = matrix_distances(a1, a2).total
        self.incumbent: np.ndarray | None = None
        self.tie_count = 0
        self.stop = False

    def solve(self) -> tuple[np.ndarray, int]:
        n = self.n
        if n == 0:
            return np.zeros(0, dtype=np.intp), 0
        identity = np.arange(n, dtype=np.intp)
        if self.rng is None and self.best == 0:
            # the identity is the lexicographically smallest permutation, so a
            # zero-cost identity is always the canonical answer
            return identity, 0
        # seed the pruning threshold with a greedy relaxation solution; the
        # incumbent stays unset so equal-cost subtrees are still explored
        # until the true first optimum is reached
        rows, cols = linear_sum_assignment(self._pair_costs_doubled(0, identity))
        greedy = np.asarray(cols, dtype=np.intp)
        greedy_cost = int(
            (self.e1 != self.e2[np.ix_(greedy, greedy)]).sum()
            + (self.attrs1 != self.attrs2[greedy]).sum()
        )
        self.best = min(self.best, greedy_cost)
        self._descend(0, 0)
        if self.incumbent is None:  # identity was the unique optimum
            self.incumbent = identity
        return self.incumbent, self.best

    def _delta(self, k: int, v: int) -> int:
        d = int(self.attrs1[k] != self.attrs2[v])
        if k:
            av = self.a[:k]
            d += int((self.e1[:k, k] != self.e2[av, v]).sum())
            d += int((self.e1[k, :k] != self.e2[v, av]).sum())
        return d

    def _cheap_bound(self, k: int, rem_v: np.ndarray) -> int:
        n = self.n
        c1 = Counter(self.attrs1[k:].tolist())
        c2 = Counter(self.attrs2[rem_v].tolist())
        overlap = sum(min(cnt, c2[val]) for val, cnt in c1.items())
        bound = (n - k) - overlap
        if k:
            av = self.a[:k]
            out1 = self.e1[:k, k:].sum(axis=1)
            out2 = self.e2[np.ix_(av, rem_v)].sum(axis=1)
            in1 = self.e1[k:, :k].sum(axis=0)
            in2 = self.e2[np.ix_(rem_v, av)].sum(axis=0)
            bound += int(np.abs(out1 - out2).sum()) + int(np.abs(in1 - in2).sum())
        b1 = self.e1[k:, k:]
        b2 = self.e2[np.ix_(rem_v, rem_v)]
        rows = int(np.abs(np.sort(b1.sum(axis=1)) - np.sort(b2.sum(axis=1))).sum())
        cols = int(np.abs(np.sort(b1.sum(axis=0)) - np.sort(b2.sum(axis=0))).sum())
        bound += max(rows, cols)
        return bound

    def _pair_costs_doubled(self, k: int, rem_v: np.ndarray) -> np.ndarray:
        pair = 2 * (self.attrs1[k:, None] != self.attrs2[None, rem_v]).astype(np.int64)
        if k:
            av = self.a[:k]
            x1 = self.e1[:k, k:]
            x2 = self.e2[av[:, None], rem_v[None, :]]
            pair += 2 * (x1[:, :, None] != x2[:, None, :]).sum(axis=0)
            y1 = self.e1[k:, :k]
            y2 = self.e2[rem_v[:, None], av[None, :]]
            pair += 2 * (y1[:, None, :] != y2[None, :, :]).sum(axis=2)
        b1 = self.e1[k:, k:]
        b2 = self.e2[np.ix_(rem_v, rem_v)]
        pair += np.abs(b1.sum(axis=1)[:, None] - b2.sum(axis=1)[None, :])
        pair += np.abs(b1.sum(axis=0)[:, None] - b2.sum(axis=0)[None, :])
        return pair

    def _lap_bound_doubled(self, k: int, rem_v: np.ndarray) -> int:
        pair = self._pair_costs_doubled(k, rem_v)
        rows, cols = linear_sum_assignment(pair)
        return int(pair[rows, cols].sum())

    def _pruned_doubled(self, lb2: int) -> bool:
        # everything is doubled so the half-integer degree terms stay exact
        if self.rng is not None or self.incumbent is None:
            return lb2 > 2 * self.best
        return lb2 >= 2 * self.best

    def _complete(self, cost: int) -> None:
        if self.incumbent is None or cost < self.best:
            self.best = cost
            self.incumbent = self.a.copy()
            self.tie_count = 1
            if self.rng is None and cost == 0:
                self.stop = True
        elif self.rng is not None and cost == self.best:
            self.tie_count += 1
            if self.rng.random() < 1.0 / self.tie_count:
                self.incumbent = self.a.copy()

    def _descend(self, k: int, cost: int) -> None:
        n = self.n
        for v in range(n):
            if self.stop:
                return
            if self.used[v]:
                continue
            c2 = cost + self._delta(k, v)
            self.a[k] = v
            self.used[v] = True
            if k + 1 == n:
                self._complete(c2)
            else:
                rem_v = np.flatnonzero(~self.used)
                lb2 = 2 * (c2 + self._cheap_bound(k + 1, rem_v))
                if not self._pruned_doubled(lb2):
                    lb2 = 2 * c2 + self._lap_bound_doubled(k + 1, rem_v)
                    if not self._pruned_doubled(lb2):
                        self._descend(k + 1, c2)
            self.used[v] = False


def _padded_matrices(g1: AttributedGraph, g2: AttributedGraph, max_order: int):
    n = max(g1.order, g2.order)
    if n > max_order:
        raise CapacityError(
            f"graph pair pads to order {n}, above the configured maximum {max_order}"
        )
    return to_aa_matrix(extend_with_nulls(g1, n)), to_aa_matrix(extend_with_nulls(g2, n)), n


def _solve(a1: np.ndarray, a2: np.ndarray, n: int, algorithm: str, rng):
    if algorithm == "auto":
        algorithm = "exhaustive" if n <= _EXHAUSTIVE_LIMIT else "branch-and-bound"
    if algorithm == "exhaustive":
        return _exhaustive_assign(a1, a2, rng)
    if algorithm == "branch-and-bound":
        return _BranchAndBound(a1, a2, rng).solve()
    raise ValueError(f"unknown algorithm {algorithm!r}")


def ged_exact(
    g1: AttributedGraph,
    g2: AttributedGraph,
    *,
    max_order: int = DEFAULT_MAX_ORDER,
    algorithm: str = "auto",
    rng: np.random.Generator | None = None,
) -> GedResult:
    """Exact edit distance with the minimizing alignment and edit path."""
    a1, a2, n = _padded_matrices(g1, g2, max_order)
    assign, cost = _solve(a1, a2, n, algorithm, rng)
    aligned = a2[np.ix_(assign, assign)] if n else a2
    dist = matrix_distances(a1, aligned)
    alignment = tuple(int(x) for x in np.argsort(assign))
    edits = edits_from_alignment(a1, aligned)
    return GedResult(dist.total, dist.vertex, dist.edge, alignment, edits, n)


def ged_distance(
    g1: AttributedGraph,
    g2: AttributedGraph,
    *,
    max_order: int = DEFAULT_MAX_ORDER,
    algorithm: str = "auto",
) -> MatrixDistance:
    """Distance only, skipping edit-path construction. Same minimization."""
    a1, a2, n = _padded_matrices(g1, g2, max_order)
    assign, cost = _solve(a1, a2, n, algorithm, None)
    if n == 0:
        return MatrixDistance(0, 0, 0)
    vertex = int((a1.diagonal() != a2.diagonal()[assign]).sum())
    return MatrixDistance(cost, vertex, cost - vertex)


def edits_from_alignment(m1, m2) -> tuple[EditOp, ...]:
    """Edit list rewriting matrix m1 into m2.

    Diagonal 0 -> a becomes add_vertex, a -> 0 delete_vertex, a -> b
    substitute_attr; off-diagonal 0 -> 1 add_edge and 1 -> 0 delete_edge.
    Diagonal edits come first in ascending index, then off-diagonal edits in
    row-major order, so the list length always equals the entry disagreement
    count.
    """
    a = check_aa_matrix(m1)
    b = check_aa_matrix(m2)
    if a.shape != b.shape:
        raise GraphInputError(f"matrix shapes {a.shape} and {b.shape} do not match")
    n = a.shape[0]
    ops: list[EditOp] = []
    for i in range(n):
        x, y = int(a[i, i]), int(b[i, i])
        if x == y:
            continue
        if x == 0:
            ops.append(EditOp.add_vertex(i, y))
        elif y == 0:
            ops.append(EditOp.delete_vertex(i))
        else:
            ops.append(EditOp.substitute_attr(i, y))
    for i in range(n):
        row_a, row_b = a[i], b[i]
        for j in range(n):
            if i == j or row_a[j] == row_b[j]:
                continue
            ops.append(EditOp.add_edge(i, j) if row_b[j] else EditOp.delete_edge(i, j))
    return tuple(ops)


def apply_edits(g: AttributedGraph, edits) -> AttributedGraph:
    """Apply edits entrywise to the graph's matrix and decode the result.

    The decode step drops edges stranded on null vertices (see
    from_aa_matrix); null vertices themselves are kept, so callers that want
    a compact graph should strip afterwards. Edit indices must fit the
    graph's current order; extend first when applying a path produced at a
    larger padded order.
    """
    m = to_aa_matrix(g)
    for op in edits:
        op.apply(m)
    return from_aa_matrix(m)
