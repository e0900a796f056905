"""Pair graphs built from raw pairwise comparisons.

A :class:`PairGraph` stores each unordered pair ``{i, j}`` once, read as
``(min, max)``. The stored mean score is the value for that orientation, so
reading the pair the other way round negates it and antisymmetry never has
to be checked at runtime.
"""

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse
from scipy.sparse import csgraph

RECORD_HEADER = ("i", "j", "value", "annotator")


class InvalidRecordError(ValueError):
    """A comparison record that cannot be attached to the graph."""


@dataclass(frozen=True)
class ComparisonRecord:
    """One pairwise judgment: ``value > 0`` means item ``i`` is preferred to ``j``."""

    i: int
    j: int
    value: float
    annotator: Optional[str] = None


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PairGraph:
    """Weighted aggregation of comparisons on ``n`` vertices.

    Attributes
    ----------
    n : int
        Number of vertices.
    edges : ndarray of shape (k, 2)
        Stored pairs with ``i < j``, sorted lexicographically.
    weights : ndarray of shape (k,)
        Edge weights (number of comparisons on the pair); all positive.
    means : ndarray of shape (k,)
        Mean comparison score oriented ``i -> j``.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    means: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        means = np.asarray(self.means, dtype=float).reshape(-1)
        if not (len(edges) == len(weights) == len(means)):
            raise ValueError("edges, weights and means must have equal length")
        if len(edges):
            if np.any(edges[:, 0] >= edges[:, 1]) or edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edges must satisfy 0 <= i < j < n")
            keys = edges[:, 0] * self.n + edges[:, 1]
            if np.any(np.diff(keys) <= 0):
                raise ValueError("edges must be sorted and unique")
            if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
                raise ValueError("edge weights must be positive and finite")
        object.__setattr__(self, "edges", _frozen(edges, np.int64))
        object.__setattr__(self, "weights", _frozen(weights, float))
        object.__setattr__(self, "means", _frozen(means, float))
        object.__setattr__(self, "_keys", edges[:, 0] * self.n + edges[:, 1])

    @classmethod
    def from_edges(cls, n, edges, weights=None, means=None):
        """Build a graph from unsorted pairs, merging nothing.

        Pairs may be given in either orientation; means are flipped to match.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        k = len(edges)
        weights = np.ones(k) if weights is None else np.asarray(weights, dtype=float)
        means = np.zeros(k) if means is None else np.asarray(means, dtype=float)
        sign = np.where(edges[:, 0] < edges[:, 1], 1.0, -1.0)
        lo = edges.min(axis=1)
        hi = edges.max(axis=1)
        order = np.lexsort((hi, lo))
        return cls(n, np.column_stack([lo, hi])[order], weights[order], (sign * means)[order])

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def m(self):
        """Total weight ``sum of w_ij``."""
        return float(self.weights.sum())

    def _index(self, i, j):
        lo, hi = min(i, j), max(i, j)
        keys = self._keys
        pos = int(np.searchsorted(keys, lo * self.n + hi))
        if pos < len(keys) and keys[pos] == lo * self.n + hi:
            return pos
        return None

    def has_edge(self, i, j):
        return i != j and self._index(i, j) is not None

    def weight(self, i, j):
        pos = self._index(i, j)
        return 0.0 if pos is None else float(self.weights[pos])

    def mean(self, i, j):
        """Mean score read in the orientation ``i -> j``."""
        pos = self._index(i, j)
        if pos is None:
            raise KeyError((i, j))
        value = float(self.means[pos])
        return value if i < j else -value

    def adjacency(self):
        """Dense weighted adjacency matrix."""
        a = np.zeros((self.n, self.n))
        i, j = self.edges.T
        a[i, j] = self.weights
        a[j, i] = self.weights
        return a

    def degrees(self):
        """Weighted degrees (row sums of the adjacency matrix)."""
        i, j = self.edges.T
        return (np.bincount(i, self.weights, minlength=self.n)
                + np.bincount(j, self.weights, minlength=self.n))

    def with_means(self, means):
        return PairGraph(self.n, self.edges, self.weights, means)

    def __eq__(self, other):
        if not isinstance(other, PairGraph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.means, other.means))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class EdgeFlow:
    """Antisymmetric function on the edges of a host graph.

    ``values[e]`` is the flow on ``graph.edges[e]`` read ``i -> j`` with
    ``i < j``; ``flow[j, i] == -flow[i, j]``.
    """

    graph: PairGraph
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(values) != self.graph.num_edges:
            raise ValueError("flow must have one value per edge of the host graph")
        object.__setattr__(self, "values", _frozen(values, float))

    def __getitem__(self, pair):
        i, j = pair
        pos = self.graph._index(i, j)
        if pos is None:
            raise KeyError(pair)
        return float(self.values[pos]) if i < j else -float(self.values[pos])

    def __add__(self, other):
        return EdgeFlow(self.graph, self.values + other.values)

    def __sub__(self, other):
        return EdgeFlow(self.graph, self.values - other.values)

    def inner(self, other):
        """Weighted inner product ``sum w_ij U_ij V_ij``."""
        return float(np.sum(self.graph.weights * self.values * other.values))

    def norm(self):
        return math.sqrt(max(self.inner(self), 0.0))

    def to_dict(self):
        return {f"{i}-{j}": float(v) for (i, j), v in zip(self.graph.edges.tolist(), self.values)}


@dataclass(frozen=True, eq=False)
class TriangleSet:
    """3-cliques of a graph, one row ``(i, j, k)`` with ``i < j < k`` per triangle."""

    triangles: np.ndarray

    def __len__(self):
        return len(self.triangles)

    def __iter__(self):
        return iter(tuple(t) for t in self.triangles.tolist())


def _check_record(n, rec, where):
    i, j, v = rec.i, rec.j, rec.value
    if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
        raise InvalidRecordError(f"{where}: vertex indices must be integers: {rec!r}")
    if i == j:
        raise InvalidRecordError(f"{where}: self-comparison i == j: {rec!r}")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidRecordError(f"{where}: vertex index out of range for n={n}: {rec!r}")
    if not math.isfinite(v):
        raise InvalidRecordError(f"{where}: non-finite value: {rec!r}")


def graph_from_arrays(n, i, j, values):
    """Aggregate comparisons given as parallel arrays (no validation)."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    v = np.asarray(values, dtype=float)
    if len(i) == 0:
        return PairGraph(n, np.empty((0, 2), dtype=np.int64), [], [])
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    oriented = np.where(i < j, v, -v)
    keys = lo * n + hi
    # sort by (pair, value) so floating sums do not depend on record order
    order = np.lexsort((oriented, keys))
    keys, oriented = keys[order], oriented[order]
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    sums = np.bincount(inverse, weights=oriented, minlength=len(uniq))
    edges = np.column_stack([uniq // n, uniq % n])
    return PairGraph(n, edges, counts.astype(float), sums / counts)


def build_pair_graph(n, records: Iterable[ComparisonRecord]):
    """Aggregate raw comparison records into a :class:`PairGraph`.

    Every record carries unit confidence weight, so ``w_ij`` is the number of
    records on the pair and the stored mean is the signed average of their
    values read ``min -> max``.

    Raises
    ------
    InvalidRecordError
        If a record compares an item with itself, references an index
        ``>= n`` or carries a non-finite value.
    """
    records = list(records)
    for k, rec in enumerate(records):
        _check_record(n, rec, f"record {k}")
    return graph_from_arrays(
        n,
        [r.i for r in records],
        [r.j for r in records],
        [r.value for r in records],
    )


def laplacian(graph, sparse=False):
    """Unnormalized Laplacian ``L = D - A`` of the weighted graph."""
    n = graph.n
    i, j = graph.edges.T
    w = graph.weights
    deg = graph.degrees()
    if sparse:
        rows = np.concatenate([i, j, np.arange(n)])
        cols = np.concatenate([j, i, np.arange(n)])
        data = np.concatenate([-w, -w, deg])
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    lap = np.zeros((n, n))
    lap[i, j] = -w
    lap[j, i] = -w
    lap[np.arange(n), np.arange(n)] = deg
    return lap


def divergence(graph, flow=None):
    """Weighted divergence ``b_i = sum_j w_ij Y_ij``.

    ``flow`` defaults to the graph's mean scores; an :class:`EdgeFlow` or a
    per-edge array may be passed instead.
    """
    if flow is None:
        values = graph.means
    elif isinstance(flow, EdgeFlow):
        values = flow.values
    else:
        values = np.asarray(flow, dtype=float)
    i, j = graph.edges.T
    wy = graph.weights * values
    return np.bincount(i, wy, minlength=graph.n) - np.bincount(j, wy, minlength=graph.n)


def gradient_flow(graph, x):
    """Edge flow ``x_i - x_j`` on every stored edge."""
    x = np.asarray(x, dtype=float)
    i, j = graph.edges.T
    return EdgeFlow(graph, x[i] - x[j])


def min_degree(graph):
    """Smallest weighted degree."""
    if graph.n < 1:
        raise ValueError("graph has no vertices")
    return float(graph.degrees().min())


def connected_components(graph):
    """Return ``(count, labels)`` for the components over edges with positive weight."""
    if graph.n == 0:
        return 0, np.empty(0, dtype=np.int64)
    i, j = graph.edges.T
    adj = scipy.sparse.coo_matrix((np.ones(len(i)), (i, j)), shape=(graph.n, graph.n))
    count, labels = csgraph.connected_components(adj, directed=False)
    return int(count), labels.astype(np.int64)


def is_connected(graph):
    return connected_components(graph)[0] == 1


def triangles(graph):
    """Enumerate all 3-cliques ``{i, j, k}`` with ``i < j < k``."""
    n = graph.n
    adj = np.zeros((n, n), dtype=bool)
    i, j = graph.edges.T
    adj[i, j] = True
    adj[j, i] = True
    found = []
    for a, b in graph.edges.tolist():
        common = np.flatnonzero(adj[a, b + 1:] & adj[b, b + 1:]) + b + 1
        found.extend((a, b, c) for c in common.tolist())
    tri = np.array(found, dtype=np.int64).reshape(-1, 3)
    if len(tri):
        tri = tri[np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0]))]
    return TriangleSet(tri)


def read_records_csv(path, n=None):
    """Read a comparison-record CSV (header ``i,j,value,annotator``).

    Returns the list of records. When ``n`` is given every record is also
    validated against it. Malformed rows raise :class:`InvalidRecordError`
    naming the line number.
    """
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != RECORD_HEADER:
            raise InvalidRecordError(f"{path}: line 1: expected header {','.join(RECORD_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InvalidRecordError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            try:
                i, j, value = int(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise InvalidRecordError(f"{path}: line {lineno}: cannot parse {row!r}") from None
            rec = ComparisonRecord(i, j, value, row[3] or None)
            if n is not None:
                _check_record(n, rec, f"{path}: line {lineno}")
            elif i == j or i < 0 or j < 0 or not math.isfinite(value):
                raise InvalidRecordError(f"{path}: line {lineno}: invalid record {rec!r}")
            records.append(rec)
    return records


def write_records_csv(path, records: Sequence[ComparisonRecord]):
    from .io import fmt

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for r in records:
            writer.writerow([r.i, r.j, fmt(r.value), r.annotator or ""])
