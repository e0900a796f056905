import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hodgerank.graph import PairGraph

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_connected_graph(rng, n, extra=None, weighted=True):
    """Random spanning path plus extra random pairs, random weights and means."""
    perm = rng.permutation(n)
    pairs = {tuple(sorted((int(perm[k]), int(perm[k + 1])))) for k in range(n - 1)}
    total = n * (n - 1) // 2
    extra = rng.integers(0, total - len(pairs) + 1) if extra is None else extra
    while len(pairs) < min(total, n - 1 + extra):
        i, j = rng.choice(n, size=2, replace=False)
        pairs.add((int(min(i, j)), int(max(i, j))))
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    k = len(edges)
    weights = rng.integers(1, 6, size=k).astype(float) if weighted else np.ones(k)
    means = rng.uniform(-1, 1, size=k)
    return PairGraph(n, edges, weights, means)


def complete_graph(n, means=None):
    i, j = np.triu_indices(n, 1)
    k = len(i)
    return PairGraph(n, np.column_stack([i, j]), np.ones(k),
                     np.zeros(k) if means is None else means)


def path_graph(n):
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    return PairGraph(n, edges, np.ones(n - 1), np.zeros(n - 1))


def dense_laplacian(graph):
    """Entrywise D - A by explicit loops."""
    n = graph.n
    lap = np.zeros((n, n))
    for (i, j), w in zip(graph.edges.tolist(), graph.weights.tolist()):
        lap[i, j] -= w
        lap[j, i] -= w
    for i in range(n):
        lap[i, i] = -sum(lap[i, j] for j in range(n) if j != i)
    return lap


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)
