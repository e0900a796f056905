import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complete_graph, path_graph, random_connected_graph
from hodgerank.graph import ComparisonRecord as R
from hodgerank.graph import PairGraph, build_pair_graph, divergence, laplacian, triangles
from hodgerank.hodge import (DisconnectedGraphError, curl_operator, hodge_decompose,
                             hodge_rank, sensitivity, solve_laplacian)
from hodgerank.sampling import SamplerSpec, budget_from_p0, sample
from hodgerank.spectral import fiedler


def pinv_oracle(graph):
    """x = L^+ b from a full eigendecomposition."""
    lap = laplacian(graph)
    vals, vecs = np.linalg.eigh(lap)
    inv = np.where(vals > 1e-9 * vals[-1], 1.0 / np.where(vals > 0, vals, 1.0), 0.0)
    return vecs @ (inv * (vecs.T @ divergence(graph)))


def cyclic_k3():
    return build_pair_graph(3, [R(0, 1, 1), R(1, 2, 1), R(2, 0, 1)])


def cyclic_c4():
    return build_pair_graph(4, [R(0, 1, 1), R(1, 2, 1), R(2, 3, 1), R(3, 0, 1)])


def gradient_graph(graph, x):
    i, j = graph.edges.T
    return PairGraph(graph.n, graph.edges, graph.weights, x[i] - x[j])


class TestHodgeRank:
    def test_exact_gradient_data(self):
        x = np.array([1.0, 0.0, -1.0])
        score = hodge_rank(gradient_graph(complete_graph(3), x))
        np.testing.assert_allclose(score.x, x, atol=1e-14)
        assert score.centered
        assert score.ranking().tolist() == [0, 1, 2]

    def test_cycle_scores_zero(self):
        np.testing.assert_array_equal(hodge_rank(cyclic_k3()).x, 0.0)

    def test_pseudoinverse_oracle(self, rng):
        g = random_connected_graph(rng, 8)
        score = hodge_rank(g)
        np.testing.assert_allclose(score.x, pinv_oracle(g), atol=1e-8)
        assert abs(score.x.sum()) < 1e-12
        assert score.residual_norm <= 1e-10 * np.linalg.norm(divergence(g))

    def test_disconnected(self):
        g = PairGraph.from_edges(5, [(0, 1), (2, 3), (3, 4)], means=[1, 1, 1])
        with pytest.raises(DisconnectedGraphError) as info:
            hodge_rank(g)
        assert info.value.components() == [[0, 1], [2, 3, 4]]

    def test_single_vertex(self):
        assert hodge_rank(PairGraph(1, np.empty((0, 2)), [], [])).x.tolist() == [0.0]

    @given(st.integers(2, 14), st.integers(0, 2**32 - 1))
    def test_normal_equations(self, n, seed):
        g = random_connected_graph(np.random.default_rng(seed), n)
        x = hodge_rank(g).x
        b = divergence(g)
        assert np.linalg.norm(laplacian(g) @ x - b) <= 1e-9 * max(1.0, np.linalg.norm(b))
        assert abs(x.sum()) <= 1e-10 * max(1.0, np.linalg.norm(x))

    def test_solver_refines(self, rng):
        g = random_connected_graph(rng, 30, extra=40)
        lap, b = laplacian(g), rng.normal(size=30)
        x = solve_laplacian(lap, b)
        np.testing.assert_allclose(lap @ x, b - b.mean(), atol=1e-10 * np.linalg.norm(b))


class TestDecomposition:
    def test_pure_gradient(self, rng):
        g = gradient_graph(complete_graph(5), rng.normal(size=5))
        d = hodge_decompose(g)
        assert d.curl.norm() < 1e-12 and d.harmonic.norm() < 1e-12

    def test_k3_cycle_is_curl(self):
        d = hodge_decompose(cyclic_k3())
        np.testing.assert_allclose(d.curl.values, cyclic_k3().means, atol=1e-14)
        assert d.gradient.norm() == 0 and d.harmonic.norm() < 1e-14

    def test_c4_cycle_is_harmonic(self):
        g = cyclic_c4()
        d = hodge_decompose(g)
        np.testing.assert_array_equal(d.harmonic.values, g.means)
        assert d.gradient.norm() == 0 and d.curl.norm() == 0

    def test_curl_operator_rows(self):
        g = complete_graph(4, means=np.arange(6.0))
        c = curl_operator(g).toarray()
        assert c.shape == (4, 6)
        # every row reads Y_ij + Y_jk - Y_ik on its triangle
        for row, (i, j, k) in zip(c, triangles(g)):
            expect = g.mean(i, j) + g.mean(j, k) + g.mean(k, i)
            assert row @ g.means == pytest.approx(expect)

    @given(st.integers(3, 16), st.integers(0, 2**32 - 1))
    def test_orthogonal_split(self, n, seed):
        g = random_connected_graph(np.random.default_rng(seed), n)
        d = hodge_decompose(g)
        total = max(np.sqrt(np.sum(g.weights * g.means ** 2)), 1e-300)
        recon = d.gradient.values + d.curl.values + d.harmonic.values
        assert np.linalg.norm(recon - g.means) <= 1e-8 * np.linalg.norm(g.means)
        parts = [d.gradient, d.curl, d.harmonic]
        for a in range(3):
            for b in range(a + 1, 3):
                assert abs(parts[a].inner(parts[b])) <= 1e-8 * total ** 2
        tri_sums = curl_operator(g) @ d.harmonic.values
        assert np.max(np.abs(tri_sums), initial=0.0) <= 1e-8 * max(1.0, total)
        assert np.max(np.abs(divergence(g, d.harmonic))) <= 1e-8 * max(1.0, total)

    def test_json_shape(self):
        out = hodge_decompose(cyclic_k3()).to_json_dict()
        assert set(out) == {"potential", "gradient", "harmonic", "curl", "norms"}
        assert out["curl"] == {"0-1": 1.0, "0-2": -1.0, "1-2": 1.0}


class TestSensitivity:
    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_complete(self, n):
        assert sensitivity(complete_graph(n)) == pytest.approx(1.0 / n, rel=1e-12)

    def test_path(self):
        assert sensitivity(path_graph(3)) == pytest.approx(1.0, rel=1e-12)

    def test_matches_spectral(self):
        g = sample(SamplerSpec("without", 64, budget_from_p0(64, 3), seed=2))
        assert sensitivity(g) == pytest.approx(1.0 / fiedler(g).fiedler_value, rel=1e-9)

    def test_disconnected(self):
        with pytest.raises(DisconnectedGraphError):
            sensitivity(PairGraph.from_edges(4, [(0, 1), (2, 3)]))


def test_sparse_curl_path_matches_dense(rng, monkeypatch):
    import hodgerank.hodge as hodge

    g = random_connected_graph(rng, 14, extra=40)
    dense = hodge_decompose(g)
    monkeypatch.setattr(hodge, "DENSE_CURL_LIMIT", 0)
    sparse = hodge_decompose(g)
    scale = np.linalg.norm(g.means)
    assert np.linalg.norm(dense.curl.values - sparse.curl.values) <= 1e-8 * scale
