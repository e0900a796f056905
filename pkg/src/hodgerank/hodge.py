"""Least-squares global scores and the gradient/curl/harmonic split of a mean flow."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .graph import (EdgeFlow, connected_components, divergence, gradient_flow,
                    laplacian, triangles)
from .spectral import fiedler

SOLVE_RTOL = 1e-10
DENSE_CURL_LIMIT = 4_000_000


class DisconnectedGraphError(ValueError):
    """Raised when a global score is requested on a disconnected graph.

    Attributes
    ----------
    labels : ndarray
        Component label of every vertex.
    """

    def __init__(self, labels, message=None):
        self.labels = np.asarray(labels)
        self.n_components = int(self.labels.max()) + 1 if len(self.labels) else 0
        if message is None:
            message = f"graph is disconnected ({self.n_components} components)"
        super().__init__(message)

    def components(self):
        """Vertex lists, one per component, ordered by smallest member."""
        return [np.flatnonzero(self.labels == c).tolist() for c in range(self.n_components)]


@dataclass(frozen=True, eq=False)
class GlobalScore:
    x: np.ndarray
    residual_norm: float
    centered: bool = True

    def ranking(self):
        """Item indices from best to worst (stable for ties)."""
        return np.argsort(-self.x, kind="stable")


@dataclass(frozen=True, eq=False)
class HodgeDecomposition:
    gradient: EdgeFlow
    harmonic: EdgeFlow
    curl: EdgeFlow
    potential: GlobalScore

    def norms(self):
        return {
            "gradient": self.gradient.norm(),
            "harmonic": self.harmonic.norm(),
            "curl": self.curl.norm(),
        }

    def to_json_dict(self):
        return {
            "potential": self.potential.x,
            "gradient": self.gradient.to_dict(),
            "harmonic": self.harmonic.to_dict(),
            "curl": self.curl.to_dict(),
            "norms": self.norms(),
        }


def _require_connected(graph):
    count, labels = connected_components(graph)
    if count > 1:
        raise DisconnectedGraphError(labels)


def solve_laplacian(lap, b):
    """Minimal-norm solution of ``L x = b`` for a connected graph's Laplacian.

    Factorizes the definite matrix ``L + J / n`` and projects the result onto
    the zero-sum subspace; on that subspace the rank-one shift changes nothing.
    """
    n = lap.shape[0]
    b = np.asarray(b, dtype=float)
    b = b - b.mean()
    factor = scipy.linalg.cho_factor(lap + 1.0 / n, check_finite=False)
    x = scipy.linalg.cho_solve(factor, b, check_finite=False)
    x -= x.mean()
    scale = max(np.linalg.norm(b), np.finfo(float).tiny)
    for _ in range(3):
        r = b - lap @ x
        if np.linalg.norm(r) <= SOLVE_RTOL * scale:
            break
        dx = scipy.linalg.cho_solve(factor, r - r.mean(), check_finite=False)
        x += dx - dx.mean()
    return x


def hodge_rank(graph):
    """Global score ``x = L^+ div(Y)`` of a connected pair graph.

    Raises
    ------
    DisconnectedGraphError
        If the graph has more than one component; ``labels`` on the
        exception lets callers rank each component separately.
    """
    _require_connected(graph)
    if graph.n == 1:
        return GlobalScore(np.zeros(1), 0.0)
    lap = laplacian(graph)
    b = divergence(graph)
    if not np.any(b):
        return GlobalScore(np.zeros(graph.n), 0.0)
    x = solve_laplacian(lap, b)
    return GlobalScore(x, float(np.linalg.norm(lap @ x - b)))


def curl_operator(graph, tri=None):
    """Sparse matrix mapping an edge flow to its triangle sums ``Y_ij + Y_jk + Y_ki``."""
    if tri is None:
        tri = triangles(graph).triangles
    n = graph.n
    keys = graph.edges[:, 0] * n + graph.edges[:, 1]
    t = len(tri)
    if t == 0:
        return scipy.sparse.csr_matrix((0, graph.num_edges))
    i, j, k = tri.T
    e_ij = np.searchsorted(keys, i * n + j)
    e_jk = np.searchsorted(keys, j * n + k)
    e_ik = np.searchsorted(keys, i * n + k)
    rows = np.repeat(np.arange(t), 3)
    cols = np.column_stack([e_ij, e_jk, e_ik]).ravel()
    data = np.tile([1.0, 1.0, -1.0], t)
    return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(t, graph.num_edges))


def _curl_projection(graph, residual):
    # weighted projection of the residual onto the image of the curl adjoint
    # W^-1 C^T; in scaled coordinates this is ordinary least squares.
    c = curl_operator(graph)
    if c.shape[0] == 0:
        return np.zeros(graph.num_edges)
    sw = np.sqrt(graph.weights)
    mat = scipy.sparse.diags(1.0 / sw) @ c.T
    rhs = sw * residual
    if mat.shape[0] * mat.shape[1] <= DENSE_CURL_LIMIT:
        # numpy's SVD least squares; scipy's gelsd wrapper proved inaccurate on
        # rank-deficient triangle systems
        z = np.linalg.lstsq(mat.toarray(), rhs, rcond=None)[0]
    else:
        z = scipy.sparse.linalg.lsqr(mat, rhs, atol=1e-14, btol=1e-14, iter_lim=100_000)[0]
    return (mat @ z) / sw


def hodge_decompose(graph):
    """Split the mean flow into gradient, harmonic and curl parts.

    The gradient part comes from :func:`hodge_rank`; the curl part is the
    weighted least-squares projection of the remaining residual onto flows
    generated by triangles (unit weight per triangle); what is left is
    harmonic. The three parts are mutually orthogonal in the weighted inner
    product and sum back to the mean flow.
    """
    score = hodge_rank(graph)
    grad = gradient_flow(graph, score.x)
    residual = graph.means - grad.values
    if not np.any(residual):
        curl = np.zeros(graph.num_edges)
    else:
        curl = _curl_projection(graph, residual)
    harmonic = residual - curl
    return HodgeDecomposition(grad, EdgeFlow(graph, harmonic), EdgeFlow(graph, curl), score)


def sensitivity(graph):
    """Sensitivity certificate ``1 / lambda2``: the operator norm of ``L^+``.

    Raises
    ------
    DisconnectedGraphError
        When the graph is disconnected (the certificate is infinite).
    """
    _require_connected(graph)
    value = fiedler(graph).fiedler_value
    if value <= 0.0:
        raise DisconnectedGraphError(connected_components(graph)[1], "Fiedler value is zero")
    return 1.0 / value
