"""Empirical KSD statistics: U- and V-statistics with importance weights.

Weights are carried in log space (log dQ/dLambda up to a shared additive
constant).  A shared constant rescales both statistics by a positive factor;
minimizers over parameters are unaffected, but any threshold comparison must
use quantities computed under the same weights.
"""

import numpy as np

from .errors import DimensionError, DomainError


class WeightedSample:
    """Points plus per-point log importance weights (zero = unweighted)."""

    def __init__(self, points, log_weights=None):
        self.points = np.asarray(points, float)
        if self.points.ndim == 2:
            self.points = self.points[None]
        n = self.points.shape[0]
        if log_weights is None:
            log_weights = np.zeros(n)
        self.log_weights = np.asarray(log_weights, float)
        if self.log_weights.shape != (n,):
            raise DimensionError("log_weights length must match point count")
        if not np.all(np.isfinite(self.log_weights)):
            raise DomainError("log_weights must be finite")

    @property
    def n(self):
        return self.points.shape[0]

    def weights(self):
        return np.exp(self.log_weights)

    def __len__(self):
        return self.n


def weighted_gram(evaluator, sample, gram=None):
    """kappa_p Gram scaled by w_i w_j."""
    g = evaluator.gram(sample.points) if gram is None else np.asarray(gram, float)
    w = sample.weights()
    return g * np.outer(w, w)


def v_stat(evaluator, sample, gram=None):
    """V_n = n^-2 sum_{i,j} kappa_p(x_i, x_j) w_i w_j (diagonal included)."""
    if sample.n < 1:
        raise DomainError("V-statistic needs n >= 1")
    gw = weighted_gram(evaluator, sample, gram)
    return float(np.sum(gw)) / sample.n**2


def u_stat(evaluator, sample, gram=None):
    """U_n = (n(n-1))^-1 sum_{i != j} kappa_p(x_i, x_j) w_i w_j."""
    n = sample.n
    if n < 2:
        raise DomainError("U-statistic needs n >= 2")
    gw = weighted_gram(evaluator, sample, gram)
    return float(np.sum(gw) - np.trace(gw)) / (n * (n - 1))


def u_and_v(evaluator, sample, gram=None):
    gw = weighted_gram(evaluator, sample, gram)
    n = sample.n
    total = float(np.sum(gw))
    diag = float(np.trace(gw))
    v = total / n**2
    u = (total - diag) / (n * (n - 1)) if n >= 2 else float("nan")
    return u, v


def bootstrap_se(gram_w, kind, n_boot=200, seed=0):
    """Bootstrap standard error of the U- or V-statistic from a weighted Gram."""
    gw = np.asarray(gram_w, float)
    n = gw.shape[0]
    rng = np.random.default_rng(seed)
    vals = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, size=n)
        sub = gw[np.ix_(idx, idx)]
        if kind.upper() == "V":
            vals[b] = np.sum(sub) / n**2
        else:
            vals[b] = (np.sum(sub) - np.trace(sub)) / (n * (n - 1))
    return float(np.std(vals, ddof=1))
