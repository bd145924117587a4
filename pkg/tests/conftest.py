import numpy as np
import pytest

from fashionrec.features import HSV_DIM


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_simplex(rng, n, K):
    """Random points on the probability simplex (some sparse)."""
    X = rng.gamma(0.5, size=(n, K))
    X[rng.random((n, K)) < 0.3] = 0.0
    X[X.sum(axis=1) == 0, 0] = 1.0
    return X / X.sum(axis=1, keepdims=True)


def random_hsv_descriptor(rng):
    out = []
    for n in (24, 8, 8):
        c = rng.integers(0, 5, size=n).astype(float)
        if c.sum() == 0:
            c[rng.integers(n)] = 1.0
        out.append(c / c.sum())
    h = np.concatenate(out) / 3.0
    assert h.shape == (HSV_DIM,)
    return h


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory):
    """A small synthetic corpus shared by the pipeline tests."""
    from fashionrec.synthetic import make_toy_corpus

    out = tmp_path_factory.mktemp("toy")
    make_toy_corpus(out, n=60, n_inventory=40, seed=3, n_small=4)
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
