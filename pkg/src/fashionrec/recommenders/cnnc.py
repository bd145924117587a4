"""Complementary nearest-neighbour consensus and its diversity corollary."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fashionrec.clustering import kmeans
from fashionrec.features import HolisticDescriptor

log = logging.getLogger(__name__)


def _l1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b).sum(axis=-1)


def _l2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(((a - b) ** 2).sum(axis=-1))


METRICS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {"l1": _l1, "l2": _l2}


@dataclass
class NeighborSet:
    indices: np.ndarray     # training rows, nearest first
    distances: np.ndarray
    hidden: np.ndarray      # (n_neighbors, K) hidden-part descriptors

    def __len__(self) -> int:
        return len(self.indices)


def cnnc_neighbors(
    query: HolisticDescriptor, train: np.ndarray, k: int, dist: str | Callable = "l1"
) -> NeighborSet:
    """The ``k`` training images closest to the query on its visible parts.

    ``train`` is an (n_train, P, K) array of holistic descriptors. The visible
    part distances are summed; ties keep the lower training index.
    """
    train = np.asarray(train, dtype=float)
    if train.ndim != 3 or train.shape[0] == 0:
        raise ValueError("training set must be a non-empty (n, P, K) array")
    if train.shape[1:] != query.parts.shape:
        raise ValueError(f"query shape {query.parts.shape} does not match training {train.shape[1:]}")
    if not 1 <= k <= train.shape[0]:
        raise ValueError(f"k={k} must be in [1, {train.shape[0]}]")
    metric = METRICS[dist] if isinstance(dist, str) else dist
    vis = query.visible_idx
    hid = query.single_hidden()
    d = metric(train[:, vis, :], query.parts[vis][None]).sum(axis=1)
    order = np.argsort(d, kind="stable")[:k]
    return NeighborSet(order, d[order], train[order, hid, :])


def cnnc_consensus(neighbors: NeighborSet) -> np.ndarray:
    """Average of the neighbours' hidden-part descriptors."""
    if len(neighbors) == 0:
        raise ValueError("empty neighbour set")
    return neighbors.hidden.mean(axis=0)


def diverse_members(hidden: np.ndarray, d: int, seed=0) -> np.ndarray:
    """Positions (into ``hidden``) of one medoid per k-means cluster.

    A medoid is the member nearest its cluster centroid. When fewer than ``d``
    distinct descriptors exist the distinct ones are returned first and the
    rest is padded with the next unused ranks.
    """
    hidden = np.asarray(hidden, dtype=float)
    n = len(hidden)
    if not 1 <= d <= n:
        raise ValueError(f"d={d} must be in [1, {n}]")
    _, first = np.unique(hidden, axis=0, return_index=True)
    if len(first) < d:
        log.warning("only %d distinct hidden descriptors for d=%d; padding from ranks", len(first), d)
        chosen = sorted(int(i) for i in first)
        chosen += [i for i in range(n) if i not in set(chosen)][: d - len(chosen)]
        return np.array(sorted(chosen))
    res = kmeans(hidden, d, seed=seed)
    chosen = []
    for c in range(d):
        members = np.flatnonzero(res.labels == c)
        if len(members) == 0:
            continue
        gaps = ((hidden[members] - res.centers[c]) ** 2).sum(axis=1)
        chosen.append(int(members[np.argmin(gaps)]))
    if len(chosen) < d:
        taken = set(chosen)
        chosen += [i for i in range(n) if i not in taken][: d - len(chosen)]
    return np.array(sorted(chosen))


def cnnc_diverse(neighbors: NeighborSet, d: int, seed=0) -> list[np.ndarray]:
    """``d`` mutually dissimilar hidden-part descriptors from the neighbour set."""
    return [neighbors.hidden[i] for i in diverse_members(neighbors.hidden, d, seed)]


@dataclass
class CnncModel:
    """Training co-occurrences plus search settings."""

    train: np.ndarray
    k: int = 5
    metric: str = "l1"
    diversity: int = 0
    seed: int = 0

    def recommend(self, query: HolisticDescriptor) -> list[np.ndarray]:
        nbrs = cnnc_neighbors(query, self.train, min(self.k, len(self.train)), self.metric)
        if self.diversity:
            return cnnc_diverse(nbrs, min(self.diversity, len(nbrs)), self.seed)
        return [cnnc_consensus(nbrs)]
