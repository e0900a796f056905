"""Algebraic connectivity and its random-graph estimates.

All logarithms are natural.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .graph import laplacian, min_degree

DENSE_LIMIT = 512
ITERATIVE_TOL = 1e-9
ROOT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Fiedler value and vector of a graph together with its minimal degree."""

    fiedler_value: float
    fiedler_vector: np.ndarray
    min_degree: float
    normalized_lambda2: float


@dataclass(frozen=True)
class EstimatorInputs:
    """Budget parameterizations shared by the estimators.

    ``p`` is the edge density ``m / C(n, 2)``, ``p0`` the budget in units of
    the connectivity threshold ``2m / ((n - 1) log n)`` and ``d`` the expected
    degree ``2m / n``. They satisfy ``p = p0 log n / n``.
    """

    n: int
    m: float
    p: float
    p0: float
    d: float

    @classmethod
    def from_budget(cls, n, m):
        if n < 2:
            raise ValueError("need n >= 2")
        p = 2.0 * m / (n * (n - 1))
        p0 = 2.0 * m / ((n - 1) * math.log(n))
        return cls(n, float(m), p, p0, 2.0 * m / n)

    @classmethod
    def from_p0(cls, n, p0):
        if n < 2:
            raise ValueError("need n >= 2")
        return cls.from_budget(n, p0 * (n - 1) * math.log(n) / 2.0)


def fiedler_pair(lap, v0=None, method="auto"):
    """Second-smallest eigenpair of a Laplacian, with the vector orthogonal to ones.

    Parameters
    ----------
    lap : ndarray or sparse matrix
        Symmetric Laplacian.
    v0 : ndarray, optional
        Starting vector for the iterative solver (ignored by the dense path).
    method : {"auto", "dense", "iterative"}
        ``auto`` picks dense for ``n <= 512``.

    Returns
    -------
    value : float
    vector : ndarray
        Unit norm, orthogonal to the constant vector.
    """
    n = lap.shape[0]
    if n < 2:
        raise ValueError("the Fiedler pair needs at least two vertices")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "dense":
        dense = lap.toarray() if scipy.sparse.issparse(lap) else np.asarray(lap, dtype=float)
        # push the constant eigenvector above the spectrum (L + c J / n acts as L on 1-perp)
        shift = 2.0 * float(np.max(np.abs(np.diag(dense)))) + 1.0
        vals, vecs = scipy.linalg.eigh(dense + shift / n, subset_by_index=[0, 0])
        vec = vecs[:, 0]
    elif method == "iterative":
        vec = _deflated_inverse_lanczos(lap, v0)
    else:
        raise ValueError(f"unknown method {method!r}")
    vec = vec - vec.mean()
    vec /= np.linalg.norm(vec)
    value = float(vec @ (lap @ vec))
    return max(value, 0.0), vec


def _deflated_inverse_lanczos(lap, v0=None):
    # Lanczos on P (L + s I)^{-1} P with P the projector onto 1-perp: its top
    # eigenvector is the Fiedler vector.
    n = lap.shape[0]
    sp = scipy.sparse.csc_matrix(lap)
    scale = float(sp.diagonal().mean()) or 1.0
    shift = 1e-3 * scale
    lu = scipy.sparse.linalg.splu(sp + shift * scipy.sparse.identity(n, format="csc"))

    def apply(x):
        x = x - x.mean()
        y = lu.solve(x)
        return y - y.mean()

    op = scipy.sparse.linalg.LinearOperator((n, n), matvec=apply, dtype=float)
    if v0 is None:
        v0 = np.cos(np.arange(n) * (math.pi / n) + 0.5)
    v0 = np.asarray(v0, dtype=float) - np.mean(v0)
    if not np.any(v0):
        v0 = np.cos(np.arange(n) + 0.5)
        v0 -= v0.mean()
    _, vecs = scipy.sparse.linalg.eigsh(op, k=1, which="LA", v0=v0, tol=ITERATIVE_TOL)
    return vecs[:, 0]


def fiedler(graph, method="auto"):
    """Compute the :class:`SpectralSummary` of a pair graph."""
    if graph.n < 2:
        raise ValueError("the Fiedler value needs n >= 2")
    lap = laplacian(graph, sparse=graph.n > DENSE_LIMIT and method != "dense")
    value, vec = fiedler_pair(lap, method=method)
    d = 2.0 * graph.m / graph.n
    dmin = min_degree(graph)
    return SpectralSummary(value, vec, dmin, value / d if d > 0 else float("nan"))


def cheeger_bound(n, dmin):
    """Upper bound ``n / (n - 1) * d_min`` on the Fiedler value."""
    return n / (n - 1) * dmin


def _g(a, p0):
    return a * p0 * (1.0 - math.log(a)) - (p0 - 1.0)


def solve_a(p0):
    """Root ``a`` in (0, 1) of ``p0 - 1 = a p0 (1 - log a)``.

    The left side minus the right is increasing in ``a`` on (0, 1), so
    bisection on ``(1e-15, 1)`` converges to the unique root. ``p0 == 1``
    returns the boundary value 0.

    Raises
    ------
    ValueError
        For ``p0 < 1`` (below the connectivity threshold).
    """
    p0 = float(p0)
    if not p0 >= 1.0:
        raise ValueError(f"p0 must be >= 1, got {p0}")
    if p0 == 1.0:
        return 0.0
    lo, hi = 1e-15, 1.0
    if _g(lo, p0) >= 0.0:
        return lo
    # bisect until the bracket cannot shrink further in double precision
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if _g(mid, p0) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo if abs(_g(lo, p0)) <= abs(_g(hi, p0)) else hi


def estimate_with_replacement(inputs):
    """Fiedler estimate ``lambda2 / (2m/n)`` for sampling with replacement.

    ``a1 = 1 - sqrt(2 / p0) * sqrt(1 - 2 / n)``; may be negative for small p0.
    """
    if inputs.p0 <= 0 or inputs.n < 2:
        raise ValueError("need p0 > 0 and n >= 2")
    return 1.0 - math.sqrt(2.0 / inputs.p0) * math.sqrt(1.0 - 2.0 / inputs.n)


def estimate_without_replacement(inputs):
    """Fiedler estimate for sampling without replacement.

    ``a2 = 1 - sqrt(2 / p0) * sqrt(1 - p)`` with ``p = p0 log n / n``.
    """
    if inputs.p0 <= 0 or inputs.n < 3:
        raise ValueError("need p0 > 0 and n >= 3")
    if inputs.p > 1.0 + 1e-12:
        raise ValueError(f"edge density p = {inputs.p:.6g} exceeds the complete graph")
    return 1.0 - math.sqrt(2.0 / inputs.p0) * math.sqrt(max(0.0, 1.0 - inputs.p))


def entropy_h(a):
    """``H(a) = a - a log a - 1``; zero at 1 and negative on (0, 1)."""
    if not a > 0:
        raise ValueError(f"H(a) needs a > 0, got {a}")
    return a - a * math.log(a) - 1.0


def min_degree_tail_bound(n, m, a):
    """Union bound ``min(1, n exp((2m/n) H(a)))`` on ``P(d_min <= 2am/n)`` under G0(n, m)."""
    if not 0 < a < 1:
        raise ValueError("need 0 < a < 1")
    if m < 1:
        raise ValueError("need m >= 1")
    exponent = (2.0 * m / n) * entropy_h(a)
    return min(1.0, n * math.exp(exponent))


def chernoff_bounds(n_trials, mu, k):
    """Chernoff-Hoeffding tail bounds for the mean of ``n_trials`` [0, 1] variables.

    Returns ``(lower, upper)``: ``lower`` bounds ``P(mean <= k mu)`` when
    ``k < 1`` and ``upper`` bounds ``P(mean >= k mu)`` when ``k > 1``. The side
    that does not apply is reported as the trivial bound 1.
    """
    if not 0 < mu < 1:
        raise ValueError("need 0 < mu < 1")
    if not k > 0:
        raise ValueError("need k > 0")
    bound = math.exp(-n_trials * mu * (k * math.log(k) - k + 1.0))
    if k < 1:
        return bound, 1.0
    if k > 1:
        return 1.0, bound
    return 1.0, 1.0
