"""Crowd-rating aggregation with agreement filtering.

Every rater scores each algorithm's top-10 list for a query as -1 (bad),
0 (neutral), 1 (good) or 2 (excellent). A rater's disagreement on a query is
the summed L1 distance of their rating vector to everybody's (their own
included). Raters whose disagreement is strictly below the global median are
kept; each query is weighted by the fraction of its raters that survived.
"""

from __future__ import annotations

import csv
import logging
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

RATING_VALUES = (-1, 0, 1, 2)
DEFAULT_ALGORITHMS = ("PR", "CNNC", "GMM", "MCL", "TAR")


@dataclass(frozen=True)
class RatingRecord:
    query_id: str
    rater_id: str
    ratings: tuple[int, ...]

    def __post_init__(self):
        bad = [r for r in self.ratings if r not in RATING_VALUES]
        if bad:
            raise ValueError(f"ratings must be in {RATING_VALUES}, got {bad}")


@dataclass
class AgreementStats:
    algorithms: tuple[str, ...]
    gamma: dict[tuple[str, str], float]
    threshold: float
    confidence: dict[str, float]
    raw_scores: np.ndarray
    mean_scores: np.ndarray
    normalized_scores: np.ndarray
    excluded_queries: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def clean(a):
            return [None if np.isnan(v) else float(v) for v in a]

        return {
            "algorithms": list(self.algorithms),
            "threshold": self.threshold,
            "raw_scores": dict(zip(self.algorithms, clean(self.raw_scores))),
            "mean_scores": dict(zip(self.algorithms, clean(self.mean_scores))),
            "normalized_scores": dict(zip(self.algorithms, clean(self.normalized_scores))),
            "confidence": self.confidence,
            "gamma": [{"query_id": q, "rater_id": r, "gamma": g} for (q, r), g in sorted(self.gamma.items())],
            "excluded_queries": list(self.excluded_queries),
            "n_queries": len(self.confidence),
        }


def _n_algorithms(records: Sequence[RatingRecord]) -> int:
    lengths = {len(r.ratings) for r in records}
    if len(lengths) > 1:
        raise ValueError(f"inconsistent number of algorithms across records: {sorted(lengths)}")
    return lengths.pop() if lengths else 0


def group_by_query(records: Iterable[RatingRecord]) -> dict[str, list[RatingRecord]]:
    groups: dict[str, list[RatingRecord]] = defaultdict(list)
    for r in records:
        groups[r.query_id].append(r)
    return dict(groups)


def disagreement(records: Sequence[RatingRecord]) -> dict[str, float]:
    """Per-rater disagreement for the records of a single query."""
    _n_algorithms(records)
    Z = np.array([r.ratings for r in records], dtype=float).reshape(len(records), -1)
    gamma = np.abs(Z[:, None, :] - Z[None, :, :]).sum(axis=(1, 2))
    return {r.rater_id: float(g) for r, g in zip(records, gamma)}


def threshold(gammas: Iterable[float]) -> float:
    """Median disagreement (mean of the middle two for an even count)."""
    values = np.asarray(list(gammas), dtype=float)
    if values.size == 0:
        raise ValueError("no disagreement values")
    return float(np.median(values))


def score(
    records: Sequence[RatingRecord],
    agreement_threshold: float | None = None,
    algorithms: Sequence[str] | None = None,
) -> AgreementStats:
    """Agreement-filtered per-algorithm scores.

    For each query q with retained raters R_q (disagreement < threshold) and
    confidence C_q = |R_q| / |raters of q|, the raw score adds
    C_q * mean_{i in R_q} rating_i(a). Queries with no retained rater add
    nothing and are listed in ``excluded_queries``. The normalised score maps
    the confidence-weighted mean rating from [-1, 2] onto [0, 1]; it is NaN
    when no query contributes.
    """
    records = list(records)
    if not records:
        raise ValueError("no rating records")
    A = _n_algorithms(records)
    names = tuple(algorithms) if algorithms is not None else (DEFAULT_ALGORITHMS if A == 5 else tuple(f"algo{i}" for i in range(A)))
    if len(names) != A:
        raise ValueError(f"{len(names)} algorithm names for {A} rating columns")

    groups = group_by_query(records)
    gamma: dict[tuple[str, str], float] = {}
    for q, recs in groups.items():
        seen = [r.rater_id for r in recs]
        if len(set(seen)) != len(seen):
            raise ValueError(f"query {q!r} has duplicate rater ids")
        for rater, g in disagreement(recs).items():
            gamma[(q, rater)] = g
    A_T = threshold(gamma.values()) if agreement_threshold is None else float(agreement_threshold)

    raw = np.zeros(A)
    weight = 0.0
    confidence: dict[str, float] = {}
    excluded = []
    for q in sorted(groups):
        recs = groups[q]
        kept = [r for r in recs if gamma[(q, r.rater_id)] < A_T]
        confidence[q] = len(kept) / len(recs)
        if not kept:
            excluded.append(q)
            continue
        mean = np.array([r.ratings for r in kept], dtype=float).mean(axis=0)
        raw += confidence[q] * mean
        weight += confidence[q]
    if excluded:
        log.info("%d of %d queries have no rater below the agreement threshold %.3g",
                 len(excluded), len(groups), A_T)
    if weight > 0:
        mean_scores = raw / weight
        normalized = (mean_scores + 1.0) / 3.0
    else:
        mean_scores = np.full(A, np.nan)
        normalized = np.full(A, np.nan)
    return AgreementStats(names, gamma, A_T, confidence, raw, mean_scores, normalized, excluded)


def solid_probability(
    retrievals: Sequence[np.ndarray],
    ratings: Sequence[int],
    classify: Callable[[np.ndarray], bool],
) -> dict[int, float]:
    """Mean fraction of solid items in retrieved lists, bucketed by the list's rating.

    ``retrievals[i]`` is an (n_items, K) array of retrieved descriptors that
    received rating ``ratings[i]``.
    """
    if len(retrievals) != len(ratings):
        raise ValueError("one rating per retrieval list required")
    buckets: dict[int, list[float]] = defaultdict(list)
    for items, rating in zip(retrievals, ratings):
        items = np.atleast_2d(items)
        if len(items) == 0:
            continue
        buckets[int(rating)].append(float(np.mean([bool(classify(h)) for h in items])))
    return {r: float(np.mean(v)) for r, v in sorted(buckets.items())}


def agreement_report(
    records: Sequence[RatingRecord],
    query_class: Mapping[str, str],
    agreement_threshold: float | None = None,
) -> dict:
    """Histograms of retained-rater counts and agreed rating values per query class.

    Returns ``{"threshold", "retained": {cls: {count: n_queries}},
    "agreed_ratings": {cls: {rating: n}}}``, where agreed ratings are every
    rating given by a retained rater.
    """
    groups = group_by_query(records)
    gamma = {}
    for q, recs in groups.items():
        for rater, g in disagreement(recs).items():
            gamma[(q, rater)] = g
    A_T = threshold(gamma.values()) if agreement_threshold is None else float(agreement_threshold)
    retained: dict[str, Counter] = defaultdict(Counter)
    agreed: dict[str, Counter] = defaultdict(Counter)
    for q, recs in groups.items():
        if q not in query_class:
            raise ValueError(f"query {q!r} has no pattern class")
        cls = query_class[q]
        kept = [r for r in recs if gamma[(q, r.rater_id)] < A_T]
        retained[cls][len(kept)] += 1
        for r in kept:
            agreed[cls].update(r.ratings)
    return {
        "threshold": A_T,
        "retained": {c: dict(sorted(h.items())) for c, h in sorted(retained.items())},
        "agreed_ratings": {c: {v: h.get(v, 0) for v in RATING_VALUES} for c, h in sorted(agreed.items())},
    }


def read_ratings_csv(path: str | os.PathLike) -> tuple[list[RatingRecord], tuple[str, ...]]:
    """Load ``query_id,rater_id,<algo>,...`` rows; returns records and algorithm names."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["query_id", "rater_id"] or len(header) < 3:
            raise ValueError("ratings CSV needs a header 'query_id,rater_id,<algorithm>,...'")
        algos = tuple(h.strip() for h in header[2:])
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
            records.append(RatingRecord(row[0], row[1], tuple(int(v) for v in row[2:])))
    return records, algos


def write_ratings_csv(path: str | os.PathLike, records: Iterable[RatingRecord], algorithms: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["query_id", "rater_id", *algorithms])
        for r in records:
            w.writerow([r.query_id, r.rater_id, *r.ratings])
