"""Diagonal Gaussian mixture over part codewords.

Each image becomes a point in R^P whose coordinates are the codeword indices
of its parts. At query time the visible coordinates are clamped and the
missing one is chosen among the K codewords by maximum mixture density.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from fashionrec.clustering import kmeans

log = logging.getLogger(__name__)

VAR_FLOOR = 1e-4


@dataclass
class GmmModel:
    weights: np.ndarray      # (M,)
    means: np.ndarray        # (M, P)
    variances: np.ndarray    # (M, P) diagonal covariances
    log_likelihoods: list[float] = field(default_factory=list, repr=False)
    converged: bool = False

    @property
    def M(self) -> int:
        return len(self.weights)

    @property
    def P(self) -> int:
        return self.means.shape[1]

    def component_log_density(self, X: np.ndarray) -> np.ndarray:
        """(n, M) array of log w_i + log N(x | mu_i, Sigma_i)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        diff = X[:, None, :] - self.means[None]
        log_norm = -0.5 * np.log(2 * np.pi * self.variances).sum(axis=1)
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        return log_w + log_norm - 0.5 * (diff**2 / self.variances[None]).sum(axis=2)

    def log_density(self, X: np.ndarray) -> np.ndarray:
        return logsumexp(self.component_log_density(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_likelihoods": list(self.log_likelihoods),
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GmmModel":
        return cls(
            np.asarray(obj["weights"], dtype=float),
            np.asarray(obj["means"], dtype=float),
            np.asarray(obj["variances"], dtype=float),
            list(obj.get("log_likelihoods", [])),
            bool(obj.get("converged", False)),
        )


def _m_step(X, resp, prev_means, prev_vars, var_floor):
    n = X.shape[0]
    nk = resp.sum(axis=0)
    weights = nk / n
    means = prev_means.copy()
    variances = prev_vars.copy()
    live = nk > 1e-12
    means[live] = (resp[:, live].T @ X) / nk[live, None]
    for i in np.flatnonzero(live):
        diff = X - means[i]
        variances[i] = resp[:, i] @ (diff**2) / nk[i]
    return weights, means, np.maximum(variances, var_floor)


def gmm_train(
    codewords: np.ndarray,
    M: int,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-6,
    var_floor: float = VAR_FLOOR,
) -> GmmModel:
    """Fit a diagonal GMM by EM.

    Initialisation runs k-means (k-means++ seeding) and takes one M-step from
    the hard assignments. EM stops when the relative change in total
    log-likelihood falls below ``tol`` or after ``max_iter`` iterations.
    Variances are floored at ``var_floor``; since each per-dimension M-step
    objective is unimodal in the variance, the clipped update is still the
    constrained maximiser and the log-likelihood stays non-decreasing.
    """
    X = np.asarray(codewords, dtype=float)
    if X.ndim != 2:
        raise ValueError("codewords must be an (n, P) array")
    n, P = X.shape
    if not 1 <= M <= n:
        raise ValueError(f"need 1 <= M <= n_train, got M={M}, n={n}")
    n_distinct = len(np.unique(X, axis=0))
    if n_distinct < M:
        warnings.warn(f"only {n_distinct} distinct points for M={M} components; variances will be floored")

    km = kmeans(X, M, seed=seed)
    resp = np.zeros((n, M))
    resp[np.arange(n), km.labels] = 1.0
    global_var = np.maximum(X.var(axis=0), var_floor)
    weights, means, variances = _m_step(X, resp, km.centers, np.tile(global_var, (M, 1)), var_floor)
    model = GmmModel(weights, means, variances)

    trace: list[float] = []
    for _ in range(max_iter):
        comp = model.component_log_density(X)
        per_point = logsumexp(comp, axis=1)
        ll = float(per_point.sum())
        if trace and abs(ll - trace[-1]) <= tol * abs(trace[-1]):
            trace.append(ll)
            model.converged = True
            break
        trace.append(ll)
        resp = np.exp(comp - per_point[:, None])
        model.weights, model.means, model.variances = _m_step(X, resp, model.means, model.variances, var_floor)
    else:
        log.info("GMM EM stopped after %d iterations without converging", max_iter)
    model.log_likelihoods = trace
    return model


def gmm_candidates(model: GmmModel, codewords: np.ndarray, K: int) -> tuple[int, np.ndarray]:
    """Log-density of every completion of the single missing coordinate.

    ``codewords`` holds the query's codeword indices with ``-1`` marking the
    missing part. Returns the missing position and a length-K array.
    """
    q = np.asarray(codewords)
    if q.shape != (model.P,):
        raise ValueError(f"query has {q.shape} codewords, model expects ({model.P},)")
    missing = np.flatnonzero(q < 0)
    if len(missing) != 1:
        raise ValueError(f"exactly one missing part required, got {len(missing)}")
    m = int(missing[0])
    grid = np.tile(q.astype(float), (K, 1))
    grid[:, m] = np.arange(K)
    return m, model.log_density(grid)


def gmm_infer(model: GmmModel, codewords: np.ndarray, K: int) -> int:
    """Constrained conditional argmax of the mixture density (ties -> lowest)."""
    _, scores = gmm_candidates(model, codewords, K)
    return int(np.argmax(scores))
