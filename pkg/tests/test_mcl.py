import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fashionrec.recommenders.mcl import MclModel, mcl_infer, mcl_train, topic_posterior

# five images, two parts, K = 3
WORDS = np.array([[0, 1], [0, 1], [1, 2], [2, 2], [0, 0]])


def test_single_topic_counts_by_hand():
    model = mcl_train(WORDS, T=1, K=3, eta=0.5)
    np.testing.assert_allclose(model.initial, np.array([3.5, 1.5, 1.5]) / 6.5)
    A = model.transitions[0, 0]
    np.testing.assert_allclose(A[0], np.array([1.5, 2.5, 0.5]) / 4.5)
    np.testing.assert_allclose(A[1], np.array([0.5, 0.5, 1.5]) / 2.5)
    np.testing.assert_allclose(A[2], np.array([0.5, 0.5, 1.5]) / 2.5)


def test_identity_chain_recovered():
    W = np.repeat(np.arange(6), 4)[:, None].repeat(3, axis=1)
    model = mcl_train(W, T=1, K=6, eta=1e-6)
    np.testing.assert_allclose(model.transitions[0, 0], np.eye(6), atol=1e-5)
    for k in range(6):
        assert mcl_infer(model, np.array([k, k, -1]))[0] == k
        assert mcl_infer(model, np.array([-1, k, k]))[0] == k


def test_unseen_rows_uniform_without_smoothing():
    model = mcl_train(np.array([[0, 1]]), T=1, K=3, eta=0.0)
    np.testing.assert_allclose(model.transitions[0, 0, 2], [1 / 3] * 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(2, 4), st.integers(2, 6), st.integers(0, 1000))
def test_rows_stochastic(T, P, K, seed):
    rng = np.random.default_rng(seed)
    model = mcl_train(rng.integers(0, K, size=(30, P)), T=T, K=K, seed=seed, iterations=20)
    np.testing.assert_allclose(model.transitions.sum(axis=-1), 1.0, atol=1e-9)
    np.testing.assert_allclose(model.initial.sum(), 1.0, atol=1e-9)


def random_model(rng, T, P, K):
    return MclModel(
        rng.uniform(0.5, 2.0, size=T),
        rng.dirichlet(np.ones(K)),
        rng.dirichlet(np.ones(K), size=(T, P - 1, K)),
    )


def joint(model, z, w):
    p = model.topic_prior[z] * model.initial[w[0]]
    for j in range(1, len(w)):
        p *= model.transitions[z, j - 1, w[j - 1], w[j]]
    return p


def test_inference_matches_brute_force(rng):
    for _ in range(30):
        T, P, K = rng.integers(1, 5), rng.integers(2, 5), rng.integers(2, 7)
        model = random_model(rng, T, P, K)
        q = rng.integers(0, K, size=P)
        m = rng.integers(P)
        q[m] = -1
        table = np.zeros((T, K))
        for z, k in itertools.product(range(T), range(K)):
            w = q.copy()
            w[m] = k
            table[z, k] = joint(model, z, w)
        post = table.sum(axis=1) / table.sum()
        word, got = mcl_infer(model, q)
        np.testing.assert_allclose(got, post, atol=1e-12)
        assert abs(got.sum() - 1) < 1e-12
        assert word == int(np.argmax(table[int(np.argmax(post))]))


def test_hidden_last_part_posterior_is_prior(rng):
    model = random_model(rng, 3, 2, 4)
    np.testing.assert_allclose(topic_posterior(model, np.array([1, -1])), model.topic_prior)


def test_errors():
    model = mcl_train(WORDS, T=2, K=3)
    with pytest.raises(ValueError):
        mcl_infer(model, np.array([-1, -1]))
    with pytest.raises(ValueError):
        mcl_infer(model, np.array([0, 1]))
    with pytest.raises(ValueError):
        mcl_train(WORDS, T=0, K=3)
    with pytest.raises(ValueError):
        mcl_train(WORDS, T=1, K=2)


def test_sampling_is_seeded(rng):
    model = random_model(rng, 2, 3, 5)
    q = np.array([1, -1, 2])
    draws = [mcl_infer(model, q, sample=True, seed=s)[0] for s in range(20)]
    assert draws == [mcl_infer(model, q, sample=True, seed=s)[0] for s in range(20)]
    assert len(set(draws)) > 1


def test_em_log_likelihood_non_decreasing(rng):
    W = rng.integers(0, 5, size=(80, 3))
    trace = np.array(mcl_train(W, T=3, K=5, eta=0.0, iterations=50, tol=0).log_likelihoods)
    assert np.all(np.diff(trace) >= -1e-8 * np.abs(trace[:-1]))
