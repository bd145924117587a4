import logging

import numpy as np
import pytest

from conftest import random_simplex
from fashionrec.features import HolisticDescriptor
from fashionrec.recommenders.cnnc import (
    CnncModel,
    cnnc_consensus,
    cnnc_diverse,
    cnnc_neighbors,
    diverse_members,
)

# parts = (top, bottom); the top is hidden, the bottom is the query
TRAIN = np.array(
    [
        [[1.0, 0.0], [1.0, 0.0]],
        [[0.0, 1.0], [0.5, 0.5]],
        [[0.5, 0.5], [0.0, 1.0]],
    ]
)


def query(bottom):
    return HolisticDescriptor.with_hidden(np.array([[np.nan, np.nan], bottom]), "top")


def test_hand_computed_order_with_tie():
    # L1 to [0.75, 0.25]: img0 0.5, img1 0.5, img2 1.5
    nb = cnnc_neighbors(query([0.75, 0.25]), TRAIN, 3)
    assert nb.indices.tolist() == [0, 1, 2]
    np.testing.assert_allclose(nb.distances, [0.5, 0.5, 1.5])
    np.testing.assert_array_equal(cnnc_consensus(cnnc_neighbors(query([0.75, 0.25]), TRAIN, 2)), [0.5, 0.5])


def test_self_match_and_exhaustive():
    nb = cnnc_neighbors(query([0.0, 1.0]), TRAIN, 1)
    assert nb.indices.tolist() == [2] and nb.distances[0] == 0.0
    assert sorted(cnnc_neighbors(query([0.0, 1.0]), TRAIN, 3).indices) == [0, 1, 2]


def test_errors():
    with pytest.raises(ValueError):
        cnnc_neighbors(query([1.0, 0.0]), TRAIN[:0], 1)
    with pytest.raises(ValueError):
        cnnc_neighbors(query([1.0, 0.0]), TRAIN, 4)


def test_consensus_single_and_midpoint():
    nb = cnnc_neighbors(query([1.0, 0.0]), TRAIN, 1)
    np.testing.assert_array_equal(cnnc_consensus(nb), TRAIN[0, 0])


def test_consensus_matches_summation_oracle(rng):
    train = np.stack([random_simplex(rng, 30, 8), random_simplex(rng, 30, 8)], axis=1)
    q = HolisticDescriptor.with_hidden(train[0], "top")
    nb = cnnc_neighbors(q, train, 5)
    expected = [sum(train[i, 0, k] for i in nb.indices) / 5 for k in range(8)]
    np.testing.assert_allclose(cnnc_consensus(nb), expected, atol=1e-12)
    assert abs(cnnc_consensus(nb).sum() - 1) < 1e-12


def test_diverse_single_cluster_is_global_medoid(rng):
    hidden = random_simplex(rng, 12, 6)
    [pos] = diverse_members(hidden, 1)
    gaps = ((hidden - hidden.mean(axis=0)) ** 2).sum(axis=1)
    assert pos == int(np.argmin(gaps))


def test_diverse_one_per_group(rng):
    centers = np.eye(4)
    groups = rng.integers(0, 4, size=20)
    groups[:4] = np.arange(4)
    hidden = centers[groups] * 0.97 + 0.01 + rng.random((20, 4)) * 0.001
    hidden /= hidden.sum(axis=1, keepdims=True)
    chosen = diverse_members(hidden, 4, seed=0)
    # oracle: exhaustive nearest-group assignment of the chosen members
    assigned = sorted(int(np.argmin(((centers - h) ** 2).sum(axis=1))) for h in hidden[chosen])
    assert assigned == [0, 1, 2, 3]


def test_diverse_all(rng):
    hidden = random_simplex(rng, 7, 5)
    assert diverse_members(hidden, 7).tolist() == list(range(7))


def test_diverse_degenerate_pads(caplog):
    hidden = np.tile([0.5, 0.5], (5, 1))
    with caplog.at_level(logging.WARNING):
        assert diverse_members(hidden, 3).tolist() == [0, 1, 2]
    assert "padding" in caplog.text


def test_diverse_too_many():
    nb = cnnc_neighbors(query([1.0, 0.0]), TRAIN, 2)
    with pytest.raises(ValueError):
        cnnc_diverse(nb, 3)


def test_model_diversity_mode(rng):
    train = np.stack([random_simplex(rng, 40, 6), random_simplex(rng, 40, 6)], axis=1)
    q = HolisticDescriptor.with_hidden(train[3], "top")
    outs = CnncModel(train, k=10, diversity=3).recommend(q)
    assert len(outs) == 3
    assert len({tuple(o) for o in outs}) == 3
