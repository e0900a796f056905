"""scikit-learn style front end for HodgeRank."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted

from .graph import graph_from_arrays
from .hodge import hodge_decompose, hodge_rank
from .spectral import fiedler


def check_pairs(X, y=None, n_items=None):
    """Validate an ``(n_samples, 2)`` array of item pairs and optional values.

    Returns ``(X, y, n_items)`` with ``X`` as int64 and ``y`` as float
    (``+1`` for every pair when omitted, i.e. the first item wins).
    """
    X = check_array(X, dtype=None, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise ValueError(f"X must have two columns (i, j), got {X.shape[1]}")
    if not np.all(np.mod(X, 1) == 0):
        raise ValueError("X must hold integer item indices")
    X = X.astype(np.int64)
    if y is None:
        y = np.ones(len(X))
    else:
        y = check_array(y, ensure_2d=False, dtype=float)
        check_consistent_length(X, y)
    if np.any(X[:, 0] == X[:, 1]):
        bad = int(np.flatnonzero(X[:, 0] == X[:, 1])[0])
        raise ValueError(f"row {bad} compares an item with itself")
    if X.min() < 0:
        raise ValueError("item indices must be non-negative")
    seen = int(X.max()) + 1
    if n_items is None:
        n_items = seen
    elif seen > n_items:
        raise ValueError(f"item index {seen - 1} out of range for n_items={n_items}")
    return X, y, n_items


class HodgeRank(RegressorMixin, BaseEstimator):
    """Least-squares global ranking from pairwise comparisons.

    ``fit`` takes pairs ``X[k] = (i, j)`` and outcomes ``y[k]`` (positive when
    ``i`` is preferred) and learns one score per item; ``predict`` returns the
    score differences ``x_i - x_j`` for new pairs.

    Parameters
    ----------
    n_items : int, optional
        Number of items; inferred from ``X`` when omitted.
    decompose : bool, default False
        Also store the gradient/curl/harmonic split in ``decomposition_``.

    Attributes
    ----------
    scores_ : ndarray of shape (n_items,)
        Centered global scores.
    graph_ : PairGraph
    fiedler_value_ : float
    sensitivity_ : float
        ``1 / fiedler_value_``, the noise amplification bound.
    residual_norm_ : float
    decomposition_ : HodgeDecomposition or None
    """

    def __init__(self, n_items=None, decompose=False):
        self.n_items = n_items
        self.decompose = decompose

    def fit(self, X, y=None):
        X, y, n = check_pairs(X, y, self.n_items)
        self.graph_ = graph_from_arrays(n, X[:, 0], X[:, 1], y)
        if self.decompose:
            self.decomposition_ = hodge_decompose(self.graph_)
            score = self.decomposition_.potential
        else:
            self.decomposition_ = None
            score = hodge_rank(self.graph_)
        self.scores_ = score.x
        self.residual_norm_ = score.residual_norm
        self.n_items_ = n
        self.fiedler_value_ = fiedler(self.graph_).fiedler_value if n >= 2 else 0.0
        self.sensitivity_ = 1.0 / self.fiedler_value_ if self.fiedler_value_ > 0 else np.inf
        return self

    def predict(self, X):
        check_is_fitted(self, "scores_")
        X, _, _ = check_pairs(X, None, self.n_items_)
        return self.scores_[X[:, 0]] - self.scores_[X[:, 1]]

    def ranking(self):
        """Items from best to worst."""
        check_is_fitted(self, "scores_")
        return np.argsort(-self.scores_, kind="stable")
