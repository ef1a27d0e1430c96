"""Attributed digraphs and their adjacency-matrix encoding.

A graph here is a small directed graph where every vertex carries one
nonnegative integer attribute. Attribute 0 is reserved for the null vertex,
a padding slot used to bring two graphs to a common order; null vertices
never have incident edges.

The matrix encoding packs a graph of order n into an n x n integer matrix:
the diagonal holds vertex attributes and the off-diagonal entries are 0/1
edge indicators.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "GraphInputError",
    "AttributedGraph",
    "MatrixDistance",
    "to_aa_matrix",
    "from_aa_matrix",
    "check_aa_matrix",
    "extend_with_nulls",
    "strip_nulls",
    "permute",
    "identity_permutation",
    "invert_permutation",
    "matrix_distances",
    "random_graph",
    "graph_to_json",
    "graph_from_json",
    "load_graph",
    "dump_graph",
]

NULL_ATTR = 0


class GraphInputError(ValueError):
    """A graph document, matrix, or permutation failed validation."""


def _as_index(value, label: str) -> int:
    try:
        return operator.index(value)
    except TypeError:
        raise GraphInputError(f"{label}: expected an integer, got {value!r}") from None


@dataclass(frozen=True)
class AttributedGraph:
    """Immutable directed graph with integer vertex attributes.

    ``attrs[i]`` is the attribute of vertex i; 0 marks a null vertex.
    ``edges`` is a set of (origin, destination) pairs. Self-loops and edges
    incident to null vertices are rejected.
    """

    attrs: tuple[int, ...]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        attrs = tuple(_as_index(a, f"attrs[{k}]") for k, a in enumerate(self.attrs))
        for k, a in enumerate(attrs):
            if a < 0:
                raise GraphInputError(f"attrs[{k}]: negative attribute {a}")
        n = len(attrs)
        edges = set()
        for e in self.edges:
            try:
                i, j = e
            except (TypeError, ValueError):
                raise GraphInputError(f"edges: expected (origin, destination) pairs, got {e!r}") from None
            i = _as_index(i, "edges")
            j = _as_index(j, "edges")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphInputError(f"edges: endpoint out of range in ({i}, {j}) for order {n}")
            if i == j:
                raise GraphInputError(f"edges: self-loop ({i}, {j})")
            if attrs[i] == NULL_ATTR or attrs[j] == NULL_ATTR:
                raise GraphInputError(f"edges: edge ({i}, {j}) touches a null vertex")
            edges.add((i, j))
        object.__setattr__(self, "attrs", attrs)
        object.__setattr__(self, "edges", frozenset(edges))

    @property
    def order(self) -> int:
        return len(self.attrs)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


class MatrixDistance(NamedTuple):
    """Entrywise disagreement counts between two same-order matrices."""

    total: int
    vertex: int
    edge: int


def check_aa_matrix(m) -> np.ndarray:
    """Validate and normalize an attributed adjacency matrix.

    Returns an int64 array. Rejects non-square input, negative diagonals and
    off-diagonal values outside {0, 1}.
    """
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise GraphInputError(f"matrix: expected a square matrix, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise GraphInputError("matrix: entries must be integers")
    arr = arr.astype(np.int64, copy=False)
    diag = arr.diagonal()
    if np.any(diag < 0):
        k = int(np.argmax(diag < 0))
        raise GraphInputError(f"matrix: negative diagonal entry at ({k}, {k})")
    off = arr.copy()
    np.fill_diagonal(off, 0)
    if not np.all((off == 0) | (off == 1)):
        bad = np.argwhere((off != 0) & (off != 1))[0]
        raise GraphInputError(
            f"matrix: off-diagonal entry at ({bad[0]}, {bad[1]}) must be 0 or 1"
        )
    return arr


def to_aa_matrix(g: AttributedGraph) -> np.ndarray:
    """Encode a graph as its attributed adjacency matrix."""
    n = g.order
    m = np.zeros((n, n), dtype=np.int64)
    idx = np.arange(n)
    m[idx, idx] = g.attrs
    for i, j in g.edges:
        m[i, j] = 1
    return m


def from_aa_matrix(m) -> AttributedGraph:
    """Decode an attributed adjacency matrix back into a graph.

    Null-strip rule: any off-diagonal 1 in a row or column whose diagonal
    entry is 0 has no endpoint to attach to, so it is dropped. Null vertices
    themselves are kept; use strip_nulls to remove them.
    """
    arr = check_aa_matrix(m)
    attrs = tuple(int(a) for a in arr.diagonal())
    rows, cols = np.nonzero(arr)
    edges = {
        (int(i), int(j))
        for i, j in zip(rows, cols)
        if i != j and attrs[i] != NULL_ATTR and attrs[j] != NULL_ATTR
    }
    return AttributedGraph(attrs, frozenset(edges))


def extend_with_nulls(g: AttributedGraph, n: int) -> AttributedGraph:
    """Pad a graph with null vertices up to order n."""
    if n < g.order:
        raise GraphInputError(f"cannot extend a graph of order {g.order} down to {n}")
    if n == g.order:
        return g
    return AttributedGraph(g.attrs + (NULL_ATTR,) * (n - g.order), g.edges)


def strip_nulls(g: AttributedGraph) -> AttributedGraph:
    """Remove null vertices, renumbering the survivors in ascending order."""
    keep = [i for i, a in enumerate(g.attrs) if a != NULL_ATTR]
    if len(keep) == g.order:
        return g
    remap = {old: new for new, old in enumerate(keep)}
    attrs = tuple(g.attrs[i] for i in keep)
    edges = frozenset((remap[i], remap[j]) for i, j in g.edges)
    return AttributedGraph(attrs, edges)


def check_permutation(p, n: int) -> np.ndarray:
    arr = np.asarray(p, dtype=np.intp)
    if arr.shape != (n,) or not np.array_equal(np.sort(arr), np.arange(n)):
        raise GraphInputError(f"permutation: {list(np.ravel(p))} is not a permutation of 0..{n - 1}")
    return arr


def identity_permutation(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.intp)


def invert_permutation(p) -> np.ndarray:
    arr = check_permutation(p, len(np.asarray(p)))
    return np.argsort(arr)


def permute(m, p) -> np.ndarray:
    """Relabel matrix vertices: vertex i of the input becomes vertex p[i].

    result[p[i], p[j]] == m[i, j] for all i, j.
    """
    arr = np.asarray(m)
    perm = check_permutation(p, arr.shape[0])
    out = np.empty_like(arr)
    out[np.ix_(perm, perm)] = arr
    return out


def matrix_distances(m1, m2) -> MatrixDistance:
    """Count differing entries between two same-order matrices.

    The total splits into a vertex part (diagonal) and an edge part
    (off-diagonal).
    """
    a = np.asarray(m1)
    b = np.asarray(m2)
    if a.shape != b.shape:
        raise GraphInputError(f"matrix shapes {a.shape} and {b.shape} do not match")
    diff = a != b
    vertex = int(diff.diagonal().sum())
    total = int(diff.sum())
    return MatrixDistance(total, vertex, total - vertex)


def random_graph(
    order: int,
    alphabet: Sequence[int],
    edge_density: float,
    rng: np.random.Generator,
) -> AttributedGraph:
    """Sample a graph: attributes uniform over the alphabet, edges Bernoulli."""
    alphabet = tuple(int(a) for a in alphabet)
    if not alphabet or any(a <= 0 for a in alphabet):
        raise GraphInputError(f"alphabet must be positive integers, got {alphabet}")
    attrs = tuple(int(a) for a in rng.choice(alphabet, size=order))
    mask = rng.random((order, order)) < edge_density
    np.fill_diagonal(mask, False)
    edges = frozenset((int(i), int(j)) for i, j in np.argwhere(mask))
    return AttributedGraph(attrs, edges)


# ---------------------------------------------------------------------------
# JSON wire format: {"attrs": [int, ...], "edges": [[i, j], ...]}, 0-based.

def graph_to_json(g: AttributedGraph) -> dict:
    return {"attrs": list(g.attrs), "edges": [list(e) for e in g.sorted_edges()]}


def graph_from_json(doc) -> AttributedGraph:
    if not isinstance(doc, dict):
        raise GraphInputError(f"graph document must be an object, got {type(doc).__name__}")
    unknown = set(doc) - {"attrs", "edges"}
    if unknown:
        raise GraphInputError(f"graph document has unknown fields: {sorted(unknown)}")
    if "attrs" not in doc:
        raise GraphInputError("graph document is missing 'attrs'")
    attrs = doc["attrs"]
    if not isinstance(attrs, list):
        raise GraphInputError("attrs: expected a list of integers")
    for k, a in enumerate(attrs):
        if not isinstance(a, int) or isinstance(a, bool):
            raise GraphInputError(f"attrs[{k}]: expected an integer, got {a!r}")
        if a < 0:
            raise GraphInputError(f"attrs[{k}]: negative attribute {a}")
    n = len(attrs)
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise GraphInputError("edges: expected a list of [origin, destination] pairs")
    edges = set()
    for k, e in enumerate(raw_edges):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise GraphInputError(f"edges[{k}]: expected an [origin, destination] pair, got {e!r}")
        i, j = e
        if not isinstance(i, int) or not isinstance(j, int) or isinstance(i, bool) or isinstance(j, bool):
            raise GraphInputError(f"edges[{k}]: endpoints must be integers, got {e!r}")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphInputError(f"edges[{k}]: endpoint out of range in ({i}, {j}) for order {n}")
        if i == j:
            raise GraphInputError(f"edges[{k}]: self-loop ({i}, {j})")
        if attrs[i] == NULL_ATTR or attrs[j] == NULL_ATTR:
            raise GraphInputError(f"edges[{k}]: edge ({i}, {j}) touches a null vertex")
        edges.add((i, j))
    return AttributedGraph(tuple(attrs), frozenset(edges))


def load_graph(path) -> AttributedGraph:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise GraphInputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise GraphInputError(f"{path}: invalid JSON ({exc})") from None
    try:
        return graph_from_json(doc)
    except GraphInputError as exc:
        raise GraphInputError(f"{path}: {exc}") from None


def dump_graph(g: AttributedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_json(g), fh)
        fh.write("\n")
