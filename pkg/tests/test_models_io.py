import json

import numpy as np
import pytest

from conftest import random_simplex
from fashionrec.features import HolisticDescriptor, train_codebook
from fashionrec.recommenders import (
    CnncModel,
    GmmRecommender,
    HybridModel,
    MclRecommender,
    PrModel,
    TarModel,
    gmm_train,
    mcl_train,
)
from fashionrec.recommenders.models import load_model, query_codewords, save_model


@pytest.fixture
def setup(tmp_path, rng):
    train = np.stack([random_simplex(rng, 80, 40), random_simplex(rng, 80, 40)], axis=1)
    cb = train_codebook(train.reshape(-1, 40), 6, seed=0)
    cb_path = tmp_path / "codebook.json"
    cb.save(cb_path)
    words = np.stack([cb.quantize(train[:, 0]), cb.quantize(train[:, 1])], axis=1)
    models = {
        "PR": PrModel(),
        "CNNC": CnncModel(train, k=4),
        "GMM": GmmRecommender(gmm_train(words, 3), cb),
        "MCL": MclRecommender(mcl_train(words, 2, cb.K), cb),
        "TAR": TarModel(seed=5),
        "HYBRID": HybridModel(CnncModel(train, k=4), TarModel(seed=5)),
    }
    query = HolisticDescriptor.with_hidden(train[7], "top")
    return tmp_path, cb_path, models, query


def test_round_trip_all_kinds(setup):
    tmp_path, cb_path, models, query = setup
    for kind, model in models.items():
        path = tmp_path / "models" / f"{kind.lower()}.json"
        path.parent.mkdir(exist_ok=True)
        save_model(path, kind, model, cb_path)
        loaded_kind, loaded = load_model(path)
        assert loaded_kind == kind
        for a, b in zip(model.recommend(query), loaded.recommend(query)):
            np.testing.assert_array_equal(a, b)


def test_tar_file_holds_only_its_parameters(setup):
    tmp_path, _, models, _ = setup
    save_model(tmp_path / "tar.json", "TAR", models["TAR"])
    params = json.loads((tmp_path / "tar.json").read_text())["parameters"]
    assert params == {"K": 40, "seed": 5, "mode": "uniform"}


def test_codebook_mismatch_detected(setup, rng):
    tmp_path, cb_path, models, _ = setup
    save_model(tmp_path / "gmm.json", "GMM", models["GMM"], cb_path)
    train_codebook(random_simplex(rng, 50, 40), 6, seed=9).save(cb_path)
    with pytest.raises(ValueError, match="does not match"):
        load_model(tmp_path / "gmm.json")


def test_query_codewords_marks_hidden(setup):
    _, _, models, query = setup
    words = query_codewords(query, models["GMM"].codebook)
    assert words[0] == -1 and 0 <= words[1] < 6
