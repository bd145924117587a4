"""Lloyd's k-means with k-means++ seeding.

Shared by codebook training, the CNNC diversity operator and GMM
initialisation. Kept in-house (rather than sklearn) so that callers get the
full inertia trace and the exact stopping rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    inertia: float
    n_iter: int
    inertia_trace: list[float] = field(default_factory=list)


def squared_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n, k) matrix of squared L2 distances."""
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick ``k`` seed centers by D^2 sampling.

    When every remaining point coincides with a chosen center the D^2 mass is
    zero; the next seed is then drawn uniformly (possible duplicates).
    """
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    closest = squared_distances(X, X[idx]).min(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        closest = np.minimum(closest, squared_distances(X, X[[nxt]])[:, 0])
    return X[idx].astype(float, copy=True)


def assign(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-center labels (ties -> lowest index) and squared distances."""
    d2 = squared_distances(X, centers)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def kmeans(
    X: np.ndarray,
    k: int,
    seed: int | np.random.Generator | None = 0,
    max_iter: int = 300,
    tol: float = 1e-4,
) -> KMeansResult:
    """Cluster the rows of ``X`` into ``k`` groups.

    Stops when the relative change in inertia drops below ``tol`` or after
    ``max_iter`` Lloyd iterations. An empty cluster keeps its previous center,
    so inertia never increases between iterations.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("kmeans expects a 2-d array")
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} must be in [1, {X.shape[0]}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    centers = kmeans_plusplus(X, k, rng)
    labels, d2 = assign(X, centers)
    trace = [float(d2.sum())]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
        labels, d2 = assign(X, centers)
        inertia = float(d2.sum())
        prev = trace[-1]
        trace.append(inertia)
        if inertia == 0.0 or abs(prev - inertia) <= tol * prev:
            break
    return KMeansResult(centers, labels, trace[-1], n_iter, trace)
