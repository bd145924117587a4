import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures_ratings import (
    HAND_CONFIDENCE,
    HAND_GAMMA,
    HAND_MEAN,
    HAND_NORMALIZED,
    HAND_RAW,
    HAND_THRESHOLD,
    hand_records,
)
from fashionrec.evaluation import (
    RatingRecord,
    agreement_report,
    disagreement,
    read_ratings_csv,
    score,
    solid_probability,
    threshold,
    write_ratings_csv,
)


def test_disagreement_small_example():
    recs = [RatingRecord("q", "a", (2, 2, 2)), RatingRecord("q", "b", (-1, -1, -1)), RatingRecord("q", "c", (2, 2, 2))]
    assert disagreement(recs) == {"a": 9.0, "b": 18.0, "c": 9.0}
    # one rater 3 away from two others on each of 5 algorithms
    recs = [RatingRecord("q", "x", (2,) * 5), RatingRecord("q", "y", (-1,) * 5), RatingRecord("q", "z", (-1,) * 5)]
    assert disagreement(recs) == {"x": 30.0, "y": 15.0, "z": 15.0}


def test_threshold_even_count():
    assert threshold([1, 3, 5, 7]) == 4.0
    assert threshold([7, 1, 5]) == 5.0
    with pytest.raises(ValueError):
        threshold([])


@settings(max_examples=50)
@given(st.lists(st.integers(0, 200), min_size=1, max_size=40))
def test_threshold_sort_and_pick(values):
    s = sorted(values)
    n = len(s)
    expected = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    assert threshold(values) == expected


def test_hand_fixture():
    stats = score(hand_records())
    for q, gs in HAND_GAMMA.items():
        assert [stats.gamma[(q, f"r{i + 1}")] for i in range(5)] == gs
    assert stats.threshold == HAND_THRESHOLD
    assert stats.confidence == HAND_CONFIDENCE
    assert stats.excluded_queries == ["q1"]
    np.testing.assert_allclose(stats.raw_scores, HAND_RAW, atol=1e-12)
    np.testing.assert_allclose(stats.mean_scores, HAND_MEAN, atol=1e-12)
    np.testing.assert_allclose(stats.normalized_scores, HAND_NORMALIZED, atol=1e-12)


def test_unanimous_raters_are_all_dropped():
    recs = [RatingRecord(q, r, (1, 1)) for q in ("a", "b") for r in ("x", "y", "z")]
    stats = score(recs, algorithms=("A", "B"))
    assert stats.threshold == 0.0
    assert stats.excluded_queries == ["a", "b"]
    assert np.isnan(stats.normalized_scores).all()
    assert stats.to_dict()["normalized_scores"] == {"A": None, "B": None}


def test_invariant_to_record_order(rng):
    recs = hand_records()
    base = score(recs)
    for _ in range(10):
        shuffled = [recs[i] for i in rng.permutation(len(recs))]
        np.testing.assert_array_equal(score(shuffled).normalized_scores, base.normalized_scores)


def test_algorithm_columns_permute_with_labels(rng):
    recs = hand_records()
    base = score(recs)
    perm = rng.permutation(5)
    names = tuple(np.array(base.algorithms)[perm])
    permuted = [RatingRecord(r.query_id, r.rater_id, tuple(np.array(r.ratings)[perm])) for r in recs]
    stats = score(permuted, algorithms=names)
    got = dict(zip(stats.algorithms, stats.normalized_scores))
    for a, v in zip(base.algorithms, base.normalized_scores):
        assert got[a] == pytest.approx(v, abs=1e-12)


def test_input_errors():
    with pytest.raises(ValueError):
        RatingRecord("q", "r", (3, 0))
    with pytest.raises(ValueError):
        score([RatingRecord("q", "a", (1, 1)), RatingRecord("q", "b", (1, 1, 1))])
    with pytest.raises(ValueError):
        score([RatingRecord("q", "a", (1,)), RatingRecord("q", "a", (0,))])
    with pytest.raises(ValueError):
        score([])


def test_solid_probability():
    solid = np.array([1.0, 0.0])
    patterned = np.array([0.5, 0.5])
    classify = lambda h: h[0] == 1.0
    lists = [np.array([solid] * 10), np.array([patterned] * 10), np.array([solid] * 5 + [patterned] * 5)]
    assert solid_probability(lists, [2, -1, 0], classify) == {-1: 0.0, 0: 0.5, 2: 1.0}
    assert solid_probability(lists[:2], [1, 1], classify) == {1: 0.5}


def test_agreement_report_bucket_totals(rng):
    recs = []
    classes = {}
    for qi in range(187):
        q = f"q{qi}"
        classes[q] = "solid" if qi < 120 else "patterned"
        for r in range(5):
            recs.append(RatingRecord(q, f"r{r}", tuple(int(v) for v in rng.integers(-1, 3, size=4))))
    rep = agreement_report(recs, classes)
    assert sum(sum(h.values()) for h in rep["retained"].values()) == 187
    # every retained rater contributes 4 ratings
    kept = sum(n * c for h in rep["retained"].values() for n, c in h.items())
    assert sum(sum(h.values()) for h in rep["agreed_ratings"].values()) == 4 * kept
    with pytest.raises(ValueError):
        agreement_report(recs, {})


def test_agreement_report_750_raters(rng):
    recs = [RatingRecord(f"q{i // 5}", f"r{i % 5}", (int(rng.integers(-1, 3)),)) for i in range(750)]
    rep = agreement_report(recs, {f"q{i}": "any" for i in range(150)})
    assert sum(rep["retained"]["any"].values()) == 150


def test_csv_round_trip(tmp_path):
    recs = hand_records()
    write_ratings_csv(tmp_path / "r.csv", recs, ("PR", "CNNC", "GMM", "MCL", "TAR"))
    back, algos = read_ratings_csv(tmp_path / "r.csv")
    assert back == recs and algos == ("PR", "CNNC", "GMM", "MCL", "TAR")
    (tmp_path / "bad.csv").write_text("query_id,rater_id,A\nq,r,1,2\n")
    with pytest.raises(ValueError, match="line 2"):
        read_ratings_csv(tmp_path / "bad.csv")
