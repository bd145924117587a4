"""Model wrappers with a common ``recommend`` method and JSON persistence.

Model file layout::

    {"version": 1, "kind": "GMM",
     "codebook_ref": {"path": "../codebook.json", "fingerprint": "..."},
     "parameters": {...}}
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fashionrec._io import atomic_write_json, read_json
from fashionrec.features import Codebook, HolisticDescriptor, quantize_many
from fashionrec.recommenders.cnnc import CnncModel
from fashionrec.recommenders.gmm import GmmModel, gmm_infer
from fashionrec.recommenders.hybrid import HybridModel
from fashionrec.recommenders.mcl import MclModel, mcl_infer
from fashionrec.recommenders.pr import COMPLEMENTARY, pr_transform
from fashionrec.recommenders.tar import TarModel

MODEL_VERSION = 1
KINDS = ("PR", "CNNC", "GMM", "MCL", "TAR", "HYBRID")


def query_codewords(query: HolisticDescriptor, codebook: Codebook) -> np.ndarray:
    """Codeword per visible part, -1 for hidden parts."""
    words = np.full(query.P, -1, dtype=int)
    vis = query.visible_idx
    if len(vis):
        words[vis] = quantize_many(query.parts[vis], codebook)
    return words


@dataclass
class PrModel:
    mode: str = COMPLEMENTARY

    def recommend(self, query: HolisticDescriptor) -> list[np.ndarray]:
        return pr_transform(query, self.mode)


@dataclass
class GmmRecommender:
    gmm: GmmModel
    codebook: Codebook

    def recommend(self, query: HolisticDescriptor) -> list[np.ndarray]:
        word = gmm_infer(self.gmm, query_codewords(query, self.codebook), self.codebook.K)
        return [self.codebook.centroids[word].copy()]


@dataclass
class MclRecommender:
    mcl: MclModel
    codebook: Codebook
    sample: bool = False
    seed: int = 0

    def recommend(self, query: HolisticDescriptor) -> list[np.ndarray]:
        word, _ = mcl_infer(self.mcl, query_codewords(query, self.codebook), self.sample, self.seed)
        return [self.codebook.centroids[word].copy()]


def _params(kind: str, model) -> dict:
    if kind == "PR":
        return {"mode": model.mode}
    if kind == "TAR":
        return {"K": model.K, "seed": model.seed, "mode": model.mode}
    if kind == "CNNC":
        return {"k": model.k, "metric": model.metric, "diversity": model.diversity,
                "seed": model.seed, "train": model.train.tolist()}
    if kind == "GMM":
        return model.gmm.to_dict()
    if kind == "MCL":
        return dict(model.mcl.to_dict(), sample=model.sample, seed=model.seed)
    if kind == "HYBRID":
        return {"tau": model.tau, "cnnc": _params("CNNC", model.cnnc), "tar": _params("TAR", model.tar)}
    raise ValueError(f"unknown model kind {kind!r}")


def _build(kind: str, p: dict, codebook: Codebook | None):
    if kind == "PR":
        return PrModel(p["mode"])
    if kind == "TAR":
        return TarModel(int(p["K"]), int(p["seed"]), p["mode"])
    if kind == "CNNC":
        return CnncModel(np.asarray(p["train"], dtype=float), int(p["k"]), p["metric"],
                         int(p["diversity"]), int(p["seed"]))
    if kind == "HYBRID":
        return HybridModel(_build("CNNC", p["cnnc"], None), _build("TAR", p["tar"], None), float(p["tau"]))
    if codebook is None:
        raise ValueError(f"{kind} model needs its codebook")
    if kind == "GMM":
        return GmmRecommender(GmmModel.from_dict(p), codebook)
    if kind == "MCL":
        return MclRecommender(MclModel.from_dict(p), codebook, bool(p.get("sample", False)), int(p.get("seed", 0)))
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(path: str | os.PathLike, kind: str, model, codebook_path: str | os.PathLike | None = None) -> None:
    """Write a trained model; GMM/MCL record where their codebook lives."""
    kind = kind.upper()
    path = Path(path)
    ref = None
    if kind in ("GMM", "MCL"):
        if codebook_path is None:
            raise ValueError(f"{kind} model needs codebook_path")
        rel = os.path.relpath(Path(codebook_path).resolve(), path.parent.resolve())
        ref = {"path": rel, "fingerprint": model.codebook.trained_on}
    atomic_write_json(path, {"version": MODEL_VERSION, "kind": kind, "codebook_ref": ref,
                             "parameters": _params(kind, model)})


def load_model(path: str | os.PathLike):
    """Returns ``(kind, model)``."""
    path = Path(path)
    obj = read_json(path)
    if obj.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {obj.get('version')!r}")
    kind = obj["kind"]
    codebook = None
    ref = obj.get("codebook_ref")
    if ref:
        codebook = Codebook.load(path.parent / ref["path"])
        if ref.get("fingerprint") and codebook.trained_on != ref["fingerprint"]:
            raise ValueError(f"codebook at {ref['path']} does not match the one {kind} was trained with")
    return kind, _build(kind, obj["parameters"], codebook)
