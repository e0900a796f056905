"""Edge-sampling schemes on ``n`` items.

``with_replacement``
    ``m`` independent uniform draws over the ``C(n, 2)`` pairs; repeated pairs
    accumulate weight.
``without_replacement``
    A uniform ``m``-subset of the pairs (Erdos-Renyi ``G(n, m)``).
``greedy``
    A uniform random spanning tree followed by repeatedly adding the absent
    pair with the largest squared Fiedler-vector difference.
``two_stage``
    Greedy up to a transition budget, then uniform without replacement over
    the pairs still absent.

Every sampler is a pure function of its :class:`SamplerSpec`.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from ._rng import make_rng
from .graph import PairGraph
from .spectral import DENSE_LIMIT, fiedler_pair

SCHEMES = ("with_replacement", "without_replacement", "greedy", "two_stage")
ALIASES = {"with": "with_replacement", "without": "without_replacement"}
MONOTONE_TOL = 1e-9
TIE_RTOL = 1e-9


class BudgetError(ValueError):
    """An edge budget the scheme cannot honour."""


def canonical_scheme(name):
    name = ALIASES.get(name, name)
    if name not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {', '.join(SCHEMES)}")
    return name


def n_pairs(n):
    return n * (n - 1) // 2


def budget_from_p0(n, p0):
    """Edge budget ``ceil(p0 (n - 1) log n / 2)``."""
    return int(math.ceil(p0 * (n - 1) * math.log(n) / 2.0 - 1e-9))


@dataclass(frozen=True)
class SamplerSpec:
    scheme: str
    n: int
    m: int
    seed: int = 0
    transition_p0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", canonical_scheme(self.scheme))
        if self.n < 2:
            raise BudgetError("need at least two items")
        if self.m < 1:
            raise BudgetError("edge budget m must be >= 1")
        if self.scheme != "with_replacement" and self.m > n_pairs(self.n):
            raise BudgetError(
                f"{self.scheme} needs m <= n(n-1)/2 = {n_pairs(self.n)}, got m = {self.m}")
        if self.scheme == "two_stage":
            if self.transition_p0 is None or self.transition_p0 < 1:
                raise BudgetError("two_stage requires transition_p0 >= 1")

    def to_dict(self):
        return {"n": self.n, "m": self.m, "scheme": self.scheme, "seed": self.seed,
                "transition_p0": self.transition_p0}


@lru_cache(maxsize=16)
def _pair_table(n):
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j]).astype(np.int64)


def pair_index_to_edge(n, idx):
    """Map row-major upper-triangle pair indices to ``(i, j)`` rows."""
    return _pair_table(n)[np.asarray(idx, dtype=np.int64)]


def floyd_sample(rng, population, k):
    """Uniform ``k``-subset of ``range(population)`` by Floyd's algorithm.

    Returns the indices in insertion order.
    """
    if not 0 <= k <= population:
        raise BudgetError(f"cannot draw {k} distinct items from {population}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    tops = np.arange(population - k, population, dtype=np.int64)
    draws = rng.integers(0, tops + 1).tolist()
    chosen = {}
    for top, t in zip(tops.tolist(), draws):
        chosen[top if t in chosen else t] = None
    return np.fromiter(chosen, dtype=np.int64, count=k)


def uniform_spanning_tree(rng, n, allowed=None):
    """Uniform random spanning tree by Wilson's algorithm.

    ``allowed`` is an optional boolean ``n x n`` matrix restricting the
    edges; by default the tree is drawn from the complete graph.
    Returns an array of ``n - 1`` edges ``(i, j)`` with ``i < j``.
    """
    if allowed is None:
        neighbours = None
    else:
        neighbours = [np.flatnonzero(allowed[v]) for v in range(n)]
        if any(len(nb) == 0 for nb in neighbours) and n > 1:
            raise BudgetError("the allowed pairs do not span all items")
    in_tree = np.zeros(n, dtype=bool)
    nxt = np.full(n, -1, dtype=np.int64)
    root = int(rng.integers(n))
    in_tree[root] = True
    steps = 0
    limit = 1000 * n * n + 10_000
    for start in range(n):
        u = start
        while not in_tree[u]:
            if neighbours is None:
                v = int(rng.integers(n - 1))
                v = v + 1 if v >= u else v
            else:
                nb = neighbours[u]
                v = int(nb[rng.integers(len(nb))])
            nxt[u] = v
            u = v
            steps += 1
            if steps > limit:
                raise BudgetError("the allowed pairs do not form a connected graph")
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    kids = np.flatnonzero(np.arange(n) != root)
    tree = np.column_stack([kids, nxt[kids]])
    return np.sort(tree, axis=1)


@dataclass
class GreedyPath:
    """Edges in arrival order and the Fiedler value after each arrival.

    The first ``n - 1`` edges are the bootstrap tree; ``lambda2[0]`` is the
    tree's Fiedler value and ``lambda2[k]`` the value after the ``k``-th
    greedy addition.
    """

    edges: np.ndarray
    lambda2: np.ndarray = field(default_factory=lambda: np.empty(0))


def greedy_extend(n, start_edges, m, allowed=None):
    """Add edges to a connected simple graph by the Fiedler-vector heuristic.

    At each step the absent allowed pair maximizing ``(psi_i - psi_j)^2`` is
    added, ties broken by the lexicographically smallest pair. Scores within
    a relative ``TIE_RTOL`` of the maximum count as tied, so that symmetric
    graphs do not pick a pair by rounding noise.
    """
    edges = [tuple(e) for e in np.asarray(start_edges, dtype=np.int64).tolist()]
    present = np.zeros((n, n), dtype=bool)
    lap = np.zeros((n, n))
    for i, j in edges:
        present[i, j] = present[j, i] = True
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    blocked = np.tril(np.ones((n, n), dtype=bool))
    if allowed is not None:
        blocked |= ~allowed
    method = "dense" if n <= DENSE_LIMIT else "iterative"
    values = []
    psi = None
    while True:
        value, psi = fiedler_pair(lap, v0=psi, method=method)
        values.append(value)
        if len(edges) >= m:
            break
        score = np.subtract.outer(psi, psi) ** 2
        score[blocked | present] = -np.inf
        best = float(score.max())
        if not np.isfinite(best):
            raise BudgetError("no absent pair left to add")
        # first row-major index is the lexicographically smallest pair
        flat = int(np.argmax(score >= best - TIE_RTOL * best))
        i, j = divmod(flat, n)
        edges.append((i, j))
        present[i, j] = present[j, i] = True
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    return GreedyPath(np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(values))


def _edges_to_graph(n, edges, counts=None):
    return PairGraph.from_edges(n, edges, counts)


def _greedy_path(spec, rng, m):
    if m < spec.n - 1:
        raise BudgetError(f"greedy sampling needs m >= n - 1 = {spec.n - 1}, got m = {m}")
    tree = uniform_spanning_tree(rng, spec.n)
    return greedy_extend(spec.n, tree, m)


def greedy_path(spec):
    """Run the greedy scheme and return its :class:`GreedyPath`."""
    if spec.scheme not in ("greedy", "two_stage"):
        raise ValueError("greedy_path needs a greedy or two_stage spec")
    return _greedy_path(spec, make_rng(spec.seed), spec.m)


def transition_budget(spec):
    """Greedy budget ``min(m, ceil(transition_p0 (n - 1) log n / 2))`` of a two-stage run."""
    return min(spec.m, budget_from_p0(spec.n, spec.transition_p0))


def sample_edges(spec):
    """Sampled pairs in arrival order (with repeats for ``with_replacement``)."""
    rng = make_rng(spec.seed)
    n, m = spec.n, spec.m
    if spec.scheme == "with_replacement":
        return pair_index_to_edge(n, rng.integers(0, n_pairs(n), size=m))
    if spec.scheme == "without_replacement":
        return pair_index_to_edge(n, floyd_sample(rng, n_pairs(n), m))
    if spec.scheme == "greedy":
        return _greedy_path(spec, rng, m).edges
    m1 = transition_budget(spec)
    first = _greedy_path(spec, rng, m1).edges
    taken = np.zeros((n, n), dtype=bool)
    taken[first[:, 0], first[:, 1]] = True
    table = _pair_table(n)
    absent = np.flatnonzero(~taken[table[:, 0], table[:, 1]])
    rest = table[absent[floyd_sample(rng, len(absent), m - m1)]]
    return np.vstack([first, rest])


def sample_with_replacement(spec):
    if spec.scheme != "with_replacement":
        raise ValueError("spec.scheme must be with_replacement")
    edges = sample_edges(spec)
    idx = edges[:, 0] * spec.n + edges[:, 1]
    uniq, counts = np.unique(idx, return_counts=True)
    return PairGraph(spec.n, np.column_stack([uniq // spec.n, uniq % spec.n]),
                     counts.astype(float), np.zeros(len(uniq)))


def sample_without_replacement(spec):
    if spec.scheme != "without_replacement":
        raise ValueError("spec.scheme must be without_replacement")
    return _edges_to_graph(spec.n, sample_edges(spec))


def sample_greedy(spec):
    if spec.scheme != "greedy":
        raise ValueError("spec.scheme must be greedy")
    return _edges_to_graph(spec.n, sample_edges(spec))


def sample_two_stage(spec):
    if spec.scheme != "two_stage":
        raise ValueError("spec.scheme must be two_stage")
    return _edges_to_graph(spec.n, sample_edges(spec))


_DISPATCH = {
    "with_replacement": sample_with_replacement,
    "without_replacement": sample_without_replacement,
    "greedy": sample_greedy,
    "two_stage": sample_two_stage,
}


def sample(spec):
    """Draw the :class:`PairGraph` described by ``spec``."""
    return _DISPATCH[spec.scheme](spec)
