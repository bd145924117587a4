"""Exact (linear scan) nearest-neighbour retrieval over inventory descriptors."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

KL_EPS = 1e-8
METRICS = ("l1", "l2", "kl")


def smooth(p: np.ndarray, eps: float = KL_EPS) -> np.ndarray:
    p = np.asarray(p, dtype=float) + eps
    return p / p.sum(axis=-1, keepdims=True)


def distances(X: np.ndarray, q: np.ndarray, metric: str = "l1") -> np.ndarray:
    """Distance from ``q`` to every row of ``X``.

    ``kl`` is the symmetrised divergence 0.5 * (KL(p||q) + KL(q||p)) after
    adding ``KL_EPS`` to both arguments and renormalising.
    """
    if metric == "l1":
        return np.abs(X - q).sum(axis=1)
    if metric == "l2":
        return np.sqrt(((X - q) ** 2).sum(axis=1))
    if metric == "kl":
        P, Q = smooth(X), smooth(q)
        return 0.5 * ((P - Q) * (np.log(P) - np.log(Q))).sum(axis=1)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: tuple[tuple[str, float], ...]

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> list[str]:
        return [i for i, _ in self.entries]

    def to_dict(self) -> dict:
        return {"query_id": self.query_id, "entries": [[i, d] for i, d in self.entries]}


class InventoryIndex:
    """Immutable descriptor matrix keyed by item id."""

    def __init__(self, ids: Sequence[str], descriptors: np.ndarray, metric: str = "l1"):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
        X = np.asarray(descriptors, dtype=float)
        if X.ndim != 2 or len(ids) != X.shape[0] or X.shape[0] == 0:
            raise ValueError("need a non-empty (n, K) descriptor array with one id per row")
        ids = [str(i) for i in ids]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item ids")
        self.ids = np.array(ids)
        self.descriptors = X
        self.descriptors.setflags(write=False)
        self.metric = metric

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.descriptors.shape[1]

    def query(self, q: np.ndarray, k: int = 10, query_id: str = "") -> RankedList:
        return query(self, q, k, query_id)


def build(items: Iterable[tuple[str, np.ndarray]], metric: str = "l1") -> InventoryIndex:
    """Index ``(id, descriptor)`` pairs; all descriptors must share one dimension."""
    items = list(items)
    if not items:
        raise ValueError("cannot index an empty inventory")
    dims = {np.asarray(h).shape for _, h in items}
    if len(dims) != 1:
        raise ValueError(f"descriptor dimension mismatch: {sorted(dims)}")
    return InventoryIndex([i for i, _ in items], np.stack([np.asarray(h, dtype=float) for _, h in items]), metric)


def query(index: InventoryIndex, q: np.ndarray, k: int = 10, query_id: str = "") -> RankedList:
    """The ``k`` nearest items, ascending by distance, ties broken by lowest id."""
    q = np.asarray(q, dtype=float)
    if q.shape != (index.dim,):
        raise ValueError(f"query dimension {q.shape} does not match index dim {index.dim}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > len(index):
        warnings.warn(f"k={k} exceeds index size {len(index)}; returning all items")
        k = len(index)
    d = distances(index.descriptors, q, index.metric)
    order = np.lexsort((index.ids, d))[:k]
    return RankedList(query_id, tuple((str(index.ids[i]), float(d[i])) for i in order))


def interleave(lists: Sequence[RankedList], k: int, query_id: str | None = None) -> RankedList:
    """Round-robin merge of several ranked lists, dropping repeated items."""
    if not lists:
        raise ValueError("nothing to merge")
    seen: set[str] = set()
    merged = []
    for rank in range(max(l.k for l in lists)):
        for rl in lists:
            if rank < rl.k and rl.entries[rank][0] not in seen:
                seen.add(rl.entries[rank][0])
                merged.append(rl.entries[rank])
    qid = lists[0].query_id if query_id is None else query_id
    return RankedList(qid, tuple(merged[:k]))
