import json

import numpy as np
import pytest

from fashionrec.cli import run
from fashionrec.pipeline import PipelineConfig
from fashionrec.synthetic import write_random_ratings

CONFIG = """\
[paths]
manifest = {toy}/corpus.jsonl
inventory = {toy}/inventory.jsonl
work = {work}

[corpus]
n_train = 50
n_test = 10

[features]
K = 8
patch_K = 8
n_patches = 40

[models]
gmm_M = 4
mcl_T = 2
"""


def cli(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1])


@pytest.fixture(scope="module")
def config(toy_dir, tmp_path_factory):
    work = tmp_path_factory.mktemp("work")
    path = work / "run.ini"
    path.write_text(CONFIG.format(toy=toy_dir, work=work / "artifacts"))
    return path


@pytest.fixture(scope="module")
def pipeline_run(config):
    codes = []
    for argv in (["ingest"], ["featurize"], ["codebook"], ["train", "--model", "all"],
                 ["recommend"], ["retrieve", "--topk", "10"], ["report"]):
        codes.append(run(["--config", str(config), *argv]))
    return codes, PipelineConfig.load(config).work_dir


def test_full_chain(pipeline_run):
    codes, work = pipeline_run
    assert codes == [0] * 7
    split = json.loads((work / "split.json").read_text())
    assert len(split["train"]) == 50 and len(split["test"]) == 10
    assert split["cleanup_removed"] == 4
    rows = [json.loads(l) for l in (work / "retrievals.jsonl").read_text().splitlines()]
    assert len(rows) == 10 * 6
    assert all(len(r["entries"]) == 10 for r in rows)
    key = json.loads((work / "report_key.json").read_text())
    assert all(sorted(v) == sorted(["PR", "CNNC", "GMM", "MCL", "TAR", "HYBRID"]) for v in key["rows"].values())


def test_tar_model_file(pipeline_run):
    _, work = pipeline_run
    obj = json.loads((work / "models" / "tar.json").read_text())
    assert obj["kind"] == "TAR" and obj["codebook_ref"] is None
    assert set(obj["parameters"]) == {"K", "seed", "mode"}


def test_report_is_deterministic(config, pipeline_run, capsys):
    _, work = pipeline_run
    first = (work / "report.html").read_text()
    assert cli(capsys, "--config", str(config), "report")[0] == 0
    assert (work / "report.html").read_text() == first
    assert "PR" not in first.replace("PRE", "")   # algorithm names are hidden from raters


def test_recommendations_are_idempotent(config, pipeline_run, capsys):
    _, work = pipeline_run
    before = (work / "recommendations.jsonl").read_text()
    assert cli(capsys, "--config", str(config), "recommend")[0] == 0
    assert (work / "recommendations.jsonl").read_text() == before


def test_single_image(config, pipeline_run, capsys):
    _, work = pipeline_run
    qid = json.loads((work / "split.json").read_text())["test"][0]
    code, summary = cli(capsys, "--config", str(config), "recommend", "--image", qid, "--model", "cnnc")
    assert code == 0 and summary["result"] == {"queries": 1, "models": ["CNNC"], "recommendations": 1}
    row = json.loads((work / "recommendations.jsonl").read_text())
    assert abs(np.sum(row["descriptors"][0]) - 1) < 1e-9
    run(["--config", str(config), "recommend"])   # restore the full file for other tests


def test_evaluate_with_random_ratings(config, pipeline_run, capsys, tmp_path):
    _, work = pipeline_run
    test_ids = json.loads((work / "split.json").read_text())["test"]
    ratings = write_random_ratings(tmp_path / "ratings.csv", test_ids, seed=1)
    code, summary = cli(capsys, "--config", str(config), "evaluate", "--ratings", str(ratings))
    assert code == 0
    scores = json.loads((work / "scores.json").read_text())
    assert set(scores["normalized_scores"]) == {"PR", "CNNC", "GMM", "MCL", "TAR"}
    assert all(v is None or 0 <= v <= 1 for v in scores["normalized_scores"].values())
    assert "agreement" in scores and "solid_probability" in scores
    assert (work / "scores.html").exists()


def test_usage_error(capsys):
    assert run(["frobnicate"]) == 1
    assert run(["train"]) == 1


def test_missing_artifact(tmp_path, capsys):
    code, summary = cli(capsys, "--work", str(tmp_path / "empty"), "recommend")
    assert code == 2 and summary["status"] == "missing_artifact"
    assert summary["artifact"] == "split.json"


def test_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[models]\nhidden = shoes\n")
    code, summary = cli(capsys, "--config", str(bad), "ingest")
    assert code == 3 and summary["status"] == "data_error"


def test_env_override(config, monkeypatch):
    monkeypatch.setenv("FASHIONREC_RETRIEVAL_TOPK", "3")
    assert PipelineConfig.load(config).topk == 3


def test_bag_of_words_path(toy_dir, tmp_path, capsys):
    path = tmp_path / "bow.ini"
    path.write_text(CONFIG.format(toy=toy_dir, work=tmp_path / "w") + "\n")
    base = ["--config", str(path)]
    assert cli(capsys, *base, "ingest")[0] == 0
    assert cli(capsys, *base, "featurize", "--descriptor", "bow")[0] == 2   # needs a patch codebook
    assert cli(capsys, *base, "codebook", "--target", "patch")[0] == 0
    assert cli(capsys, *base, "featurize", "--descriptor", "bow")[0] == 0
    assert cli(capsys, *base, "codebook")[0] == 0
    for model in ("cnnc", "gmm", "mcl", "tar"):
        assert cli(capsys, *base, "train", "--model", model)[0] == 0
    assert cli(capsys, *base, "recommend")[0] == 0
    code, summary = cli(capsys, *base, "retrieve")
    assert code == 0 and summary["result"]["lists"] == 40


def test_config_inline_comments(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[features]\ndescriptor = bow   ; patches\n[retrieval]\nmetric = kl # smoothed\n")
    cfg = PipelineConfig.load(path, environ={})
    assert cfg.descriptor == "bow" and cfg.metric == "kl"
