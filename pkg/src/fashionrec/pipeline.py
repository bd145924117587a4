"""Pipeline stages operating on a work directory.

Each stage reads the artifacts of earlier stages from ``cfg.work`` and writes
its own atomically. A missing prerequisite raises :class:`MissingArtifact`.
"""

from __future__ import annotations

import configparser
import logging
import os
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

from fashionrec import corpus as corpus_mod
from fashionrec._io import atomic_write_json, atomic_write_jsonl, atomic_write_text, iter_jsonl, read_json
from fashionrec.evaluation import agreement_report, read_ratings_csv, score, solid_probability
from fashionrec.features import (
    HSV_DIM,
    Codebook,
    HolisticDescriptor,
    color_bow,
    crop,
    hsv_histogram,
    patch_vectors,
    quantize_many,
    rgb_to_hsv_degrees,
    sample_patches,
    train_codebook,
)
from fashionrec.index import build, interleave
from fashionrec.recommenders.cnnc import CnncModel
from fashionrec.recommenders.gmm import gmm_train
from fashionrec.recommenders.hybrid import HybridModel, is_solid, solid_pattern_classify
from fashionrec.recommenders.mcl import mcl_train
from fashionrec.recommenders.models import (
    KINDS,
    GmmRecommender,
    MclRecommender,
    PrModel,
    load_model,
    save_model,
)
from fashionrec.recommenders.tar import TarModel
from fashionrec.report import gallery, render_gallery, render_scores, row_key

log = logging.getLogger(__name__)

ENV_PREFIX = "FASHIONREC_"


class MissingArtifact(RuntimeError):
    def __init__(self, name: str, path: Path | str, hint: str = ""):
        msg = f"missing artifact {name!r} at {path}"
        super().__init__(msg + (f" (run `{hint}` first)" if hint else ""))
        self.name = name
        self.path = str(path)


@dataclass
class PipelineConfig:
    manifest: str | None = None
    inventory: str | None = None
    ratings: str | None = None
    work: str = "work"
    parts: tuple[str, ...] = corpus_mod.DEFAULT_PARTS
    n_train: int = 500
    n_test: int = 100
    split_seed: int = 0
    descriptor: str = "hsv"
    K: int = 16
    patch_K: int = 32
    n_patches: int = 200
    feature_seed: int = 0
    hidden: str = "top"
    cnnc_k: int = 5
    diversity: int = 0
    cnnc_metric: str = "l1"
    gmm_M: int = 8
    mcl_T: int = 4
    alpha: float = 1.0
    eta: float = 0.01
    mcl_iterations: int = 100
    mcl_sample: bool = False
    tau: float = 0.5
    tar_mode: str = "uniform"
    pr_mode: str = "complementary"
    model_seed: int = 0
    metric: str = "l1"
    topk: int = 10
    report_seed: int = 0
    base_dir: str = "."

    # config file section/key -> attribute
    _KEYS = {
        ("paths", "manifest"): "manifest", ("paths", "inventory"): "inventory",
        ("paths", "ratings"): "ratings", ("paths", "work"): "work",
        ("corpus", "parts"): "parts", ("corpus", "n_train"): "n_train",
        ("corpus", "n_test"): "n_test", ("corpus", "seed"): "split_seed",
        ("features", "descriptor"): "descriptor", ("features", "k"): "K",
        ("features", "patch_k"): "patch_K", ("features", "n_patches"): "n_patches",
        ("features", "seed"): "feature_seed",
        ("models", "hidden"): "hidden", ("models", "cnnc_k"): "cnnc_k",
        ("models", "diversity"): "diversity", ("models", "cnnc_metric"): "cnnc_metric",
        ("models", "gmm_m"): "gmm_M", ("models", "mcl_t"): "mcl_T", ("models", "alpha"): "alpha",
        ("models", "eta"): "eta", ("models", "mcl_iterations"): "mcl_iterations",
        ("models", "mcl_sample"): "mcl_sample", ("models", "tau"): "tau",
        ("models", "tar_mode"): "tar_mode", ("models", "pr_mode"): "pr_mode",
        ("models", "seed"): "model_seed",
        ("retrieval", "metric"): "metric", ("retrieval", "topk"): "topk",
        ("report", "seed"): "report_seed",
    }

    def set(self, attr: str, raw: Any) -> None:
        current = getattr(self, attr)
        if attr == "parts":
            value = tuple(p.strip() for p in raw.split(",") if p.strip()) if isinstance(raw, str) else tuple(raw)
        elif isinstance(current, bool):
            value = raw if isinstance(raw, bool) else str(raw).strip().lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        else:
            value = None if raw is None else str(raw)
        setattr(self, attr, value)

    @classmethod
    def load(cls, path: str | os.PathLike | None = None, environ=None) -> "PipelineConfig":
        """Read an INI-style file, then apply ``FASHIONREC_<SECTION>_<KEY>`` overrides.

        Relative paths in the file are resolved against the file's directory.
        """
        cfg = cls()
        if path is not None:
            parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
            if not parser.read(path):
                raise FileNotFoundError(path)
            cfg.base_dir = str(Path(path).resolve().parent)
            for section in parser.sections():
                for key, raw in parser.items(section):
                    attr = cls._KEYS.get((section.lower(), key.lower()))
                    if attr is None:
                        raise ValueError(f"unknown config key [{section}] {key}")
                    cfg.set(attr, raw)
        environ = os.environ if environ is None else environ
        for (section, key), attr in cls._KEYS.items():
            name = f"{ENV_PREFIX}{section}_{key}".upper()
            if name in environ:
                cfg.set(attr, environ[name])
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("part schema needs at least two parts")
        if self.hidden not in self.parts:
            raise ValueError(f"hidden part {self.hidden!r} not in schema {self.parts}")
        for name in ("K", "cnnc_k", "gmm_M", "mcl_T", "topk", "n_patches", "patch_K"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.descriptor not in ("hsv", "bow"):
            raise ValueError("descriptor must be 'hsv' or 'bow'")
        if self.metric not in ("l1", "l2", "kl"):
            raise ValueError("metric must be l1, l2 or kl")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")

    def path(self, value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def work_dir(self) -> Path:
        return self.path(self.work)

    def artifact(self, name: str) -> Path:
        return self.work_dir / name


ARTIFACT_HINTS = {
    "records.jsonl": "ingest", "split.json": "ingest", "inventory.jsonl": "ingest",
    "descriptors.jsonl": "featurize", "inventory_descriptors.jsonl": "featurize",
    "codebook.json": "codebook", "patch_codebook.json": "codebook --target patch",
    "recommendations.jsonl": "recommend", "retrievals.jsonl": "retrieve",
}


def require(cfg: PipelineConfig, name: str) -> Path:
    p = cfg.artifact(name)
    if not p.exists():
        hint = ARTIFACT_HINTS.get(name, "")
        if name.startswith("models/"):
            hint = f"train --model {name[len('models/'):-len('.json')].lower()}"
        raise MissingArtifact(name, p, hint)
    return p


def _load_records(path: Path) -> list[corpus_mod.ImageRecord]:
    return [corpus_mod.record_from_dict(obj) for obj in iter_jsonl(path)]


# -- ingest ------------------------------------------------------------------


def run_ingest(cfg: PipelineConfig) -> dict:
    manifest = cfg.path(cfg.manifest)
    if manifest is None:
        raise MissingArtifact("manifest", "<unset>", "set [paths] manifest or pass --manifest")
    if not manifest.exists():
        raise MissingArtifact("manifest", manifest)
    errors: list[corpus_mod.ManifestError] = []
    raw = corpus_mod.ingest(manifest, cfg.parts, errors)
    cleaned = corpus_mod.cleanup(raw)
    complete, incomplete = corpus_mod.complete_records(cleaned, cfg.parts)
    train, test = corpus_mod.split(complete, corpus_mod.SplitSpec(cfg.n_train, cfg.n_test, cfg.split_seed))
    image_root = str(manifest.resolve().parent)

    def rows(records):
        return [dict(r.to_dict(), image_path=_absolute(image_root, r.image_path)) for r in records]

    atomic_write_jsonl(cfg.artifact("records.jsonl"), rows(train + test))
    atomic_write_json(cfg.artifact("split.json"), {
        "train": [r.id for r in train], "test": [r.id for r in test],
        "parts": list(cfg.parts), "seed": cfg.split_seed,
        "cleanup_removed": len(raw) - len(cleaned), "incomplete": incomplete,
        "errors": [{"line": e.lineno, "message": e.message} for e in errors],
    })
    summary = {"ingested": len(raw), "after_cleanup": len(cleaned), "train": len(train),
               "test": len(test), "manifest_errors": len(errors), "incomplete": len(incomplete)}
    if cfg.inventory:
        inv_path = cfg.path(cfg.inventory)
        if not inv_path.exists():
            raise MissingArtifact("inventory", inv_path)
        inv_errors: list[corpus_mod.ManifestError] = []
        inv = [r for r in corpus_mod.ingest(inv_path, cfg.parts, inv_errors) if r.part(cfg.hidden)]
        inv_root = str(inv_path.resolve().parent)
        atomic_write_jsonl(cfg.artifact("inventory.jsonl"),
                           [dict(r.to_dict(), image_path=_absolute(inv_root, r.image_path)) for r in inv])
        summary.update(inventory=len(inv), inventory_errors=len(inv_errors))
    return summary


def _absolute(root: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(root, path))


# -- features ----------------------------------------------------------------


def load_rgb(path: str) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def part_hsv(rgb: np.ndarray, box) -> np.ndarray:
    return rgb_to_hsv_degrees(crop(rgb, box))


def _record_seed(cfg: PipelineConfig, record_id: str, part: str) -> int:
    return (cfg.feature_seed * 1_000_003 + zlib.crc32(f"{record_id}/{part}".encode())) % (2**32)


def describe(cfg: PipelineConfig, record: corpus_mod.ImageRecord, parts, patch_codebook: Codebook | None):
    rgb = load_rgb(record.image_path)
    out = {}
    for name in parts:
        ann = record.part(name)
        if ann is None:
            continue
        region = part_hsv(rgb, ann.box)
        if cfg.descriptor == "hsv":
            out[name] = hsv_histogram(region)
        else:
            out[name] = color_bow(region, patch_codebook, cfg.n_patches, _record_seed(cfg, record.id, name))
    return out


def run_featurize(cfg: PipelineConfig) -> dict:
    records = _load_records(require(cfg, "records.jsonl"))
    patch_cb = None
    if cfg.descriptor == "bow":
        patch_cb = Codebook.load(require(cfg, "patch_codebook.json"))
    rows = []
    for r in records:
        for name, h in describe(cfg, r, cfg.parts, patch_cb).items():
            rows.append({"image_id": r.id, "part": name, "descriptor": h.tolist()})
    atomic_write_jsonl(cfg.artifact("descriptors.jsonl"), rows)
    summary = {"descriptor": cfg.descriptor, "descriptors": len(rows)}
    inv_path = cfg.artifact("inventory.jsonl")
    if inv_path.exists():
        inv_rows = []
        for r in _load_records(inv_path):
            h = describe(cfg, r, [cfg.hidden], patch_cb).get(cfg.hidden)
            if h is not None:
                inv_rows.append({"image_id": r.id, "part": cfg.hidden, "descriptor": h.tolist()})
        atomic_write_jsonl(cfg.artifact("inventory_descriptors.jsonl"), inv_rows)
        summary["inventory_descriptors"] = len(inv_rows)
    return summary


def load_descriptor_cache(path: Path) -> dict[tuple[str, str], np.ndarray]:
    return {(row["image_id"], row["part"]): np.asarray(row["descriptor"]) for row in iter_jsonl(path)}


def holistic(cfg: PipelineConfig, cache, ids) -> np.ndarray:
    """(n, P, K) array of part descriptors in schema order."""
    return np.stack([np.stack([cache[(i, p)] for p in cfg.parts]) for i in ids])


def run_codebook(cfg: PipelineConfig, target: str = "descriptor") -> dict:
    split = read_json(require(cfg, "split.json"))
    if target == "patch":
        records = {r.id: r for r in _load_records(require(cfg, "records.jsonl"))}
        vecs = []
        for rid in split["train"]:
            r = records[rid]
            rgb = load_rgb(r.image_path)
            for name in cfg.parts:
                region = part_hsv(rgb, r.part(name).box)
                n = max(1, cfg.n_patches // 10)
                vecs.append(patch_vectors(sample_patches(region, n, seed=_record_seed(cfg, rid, name))))
        cb = train_codebook(np.concatenate(vecs), cfg.patch_K, seed=cfg.feature_seed)
        cb.save(cfg.artifact("patch_codebook.json"))
        return {"target": "patch", "K": cb.K, "dim": cb.dim, "iterations": len(cb.inertia_trace) - 1}
    cache = load_descriptor_cache(require(cfg, "descriptors.jsonl"))
    X = holistic(cfg, cache, split["train"]).reshape(-1, len(next(iter(cache.values()))))
    cb = train_codebook(X, cfg.K, seed=cfg.feature_seed)
    cb.save(cfg.artifact("codebook.json"))
    return {"target": "descriptor", "K": cb.K, "dim": cb.dim, "iterations": len(cb.inertia_trace) - 1}


# -- models ------------------------------------------------------------------


def _train_arrays(cfg: PipelineConfig):
    split = read_json(require(cfg, "split.json"))
    cache = load_descriptor_cache(require(cfg, "descriptors.jsonl"))
    return holistic(cfg, cache, split["train"])


def _cnnc(cfg, train) -> CnncModel:
    return CnncModel(train, cfg.cnnc_k, cfg.cnnc_metric, cfg.diversity, cfg.model_seed)


def _tar(cfg, dim) -> TarModel:
    return TarModel(dim, cfg.model_seed, cfg.tar_mode)


def run_train(cfg: PipelineConfig, kind: str) -> dict:
    kind = kind.upper()
    if kind == "ALL":
        return {k.lower(): run_train(cfg, k) for k in KINDS}
    if kind not in KINDS:
        raise ValueError(f"unknown model {kind!r}")
    out = cfg.artifact(f"models/{kind.lower()}.json")
    if kind == "PR":
        model, info = PrModel(cfg.pr_mode), {}
        save_model(out, kind, model)
        return {"model": out.name, **info}
    train = _train_arrays(cfg)
    dim = train.shape[2]
    if kind == "TAR":
        save_model(out, kind, _tar(cfg, dim))
        return {"model": out.name}
    if kind == "CNNC":
        save_model(out, kind, _cnnc(cfg, train))
        return {"model": out.name, "n_train": len(train)}
    if kind == "HYBRID":
        if dim != HSV_DIM:
            raise ValueError("the hybrid router needs HSV descriptors")
        save_model(out, kind, HybridModel(_cnnc(cfg, train), _tar(cfg, dim), cfg.tau))
        return {"model": out.name, "n_train": len(train)}
    cb_path = require(cfg, "codebook.json")
    cb = Codebook.load(cb_path)
    words = quantize_many(train.reshape(-1, dim), cb).reshape(len(train), -1)
    if kind == "GMM":
        gmm = gmm_train(words, min(cfg.gmm_M, len(words)), seed=cfg.model_seed)
        save_model(out, kind, GmmRecommender(gmm, cb), cb_path)
        return {"model": out.name, "M": gmm.M, "iterations": len(gmm.log_likelihoods),
                "log_likelihood": gmm.log_likelihoods[-1]}
    mcl = mcl_train(words, cfg.mcl_T, cb.K, cfg.alpha, cfg.eta, cfg.model_seed, cfg.mcl_iterations)
    save_model(out, kind, MclRecommender(mcl, cb, cfg.mcl_sample, cfg.model_seed), cb_path)
    return {"model": out.name, "T": mcl.T, "iterations": len(mcl.log_likelihoods)}


def _query_seed(cfg: PipelineConfig, query_id: str) -> int:
    return (cfg.model_seed * 1_000_003 + zlib.crc32(query_id.encode())) % (2**32)


def recommend_one(cfg: PipelineConfig, kind: str, model, query: HolisticDescriptor, query_id: str):
    if kind in ("TAR", "HYBRID"):
        return model.recommend(query, seed=_query_seed(cfg, query_id))
    return model.recommend(query)


def trained_models(cfg: PipelineConfig, kinds=None) -> dict[str, Any]:
    kinds = [k.upper() for k in kinds] if kinds else [k for k in KINDS if cfg.artifact(f"models/{k.lower()}.json").exists()]
    if not kinds:
        raise MissingArtifact("models/*.json", cfg.artifact("models"), "train --model <kind>")
    return {k: load_model(require(cfg, f"models/{k.lower()}.json"))[1] for k in kinds}


def run_recommend(cfg: PipelineConfig, image: str | None = None, hidden: str | None = None, kinds=None) -> dict:
    split = read_json(require(cfg, "split.json"))
    cache = load_descriptor_cache(require(cfg, "descriptors.jsonl"))
    hidden = hidden or cfg.hidden
    if hidden not in cfg.parts:
        raise ValueError(f"hidden part {hidden!r} not in schema {cfg.parts}")
    models = trained_models(cfg, kinds)
    query_ids = [image] if image else split["test"]
    rows = []
    for qid in query_ids:
        if any((qid, p) not in cache for p in cfg.parts):
            raise ValueError(f"no descriptors for image {qid!r}")
        query = HolisticDescriptor.with_hidden(holistic(cfg, cache, [qid])[0], hidden, cfg.parts)
        for kind, model in models.items():
            outs = recommend_one(cfg, kind, model, query, qid)
            rows.append({"query_id": qid, "hidden": hidden, "model": kind,
                         "descriptors": [np.asarray(h).tolist() for h in outs]})
    atomic_write_jsonl(cfg.artifact("recommendations.jsonl"), rows)
    return {"queries": len(query_ids), "models": list(models), "recommendations": len(rows)}


def run_retrieve(cfg: PipelineConfig) -> dict:
    inv = load_descriptor_cache(require(cfg, "inventory_descriptors.jsonl"))
    index = build(((i, h) for (i, _), h in inv.items()), cfg.metric)
    rows = []
    for rec in iter_jsonl(require(cfg, "recommendations.jsonl")):
        lists = [index.query(np.asarray(h), min(cfg.topk, len(index)), rec["query_id"]) for h in rec["descriptors"]]
        merged = lists[0] if len(lists) == 1 else interleave(lists, cfg.topk)
        rows.append({"query_id": rec["query_id"], "model": rec["model"],
                     "entries": [[i, d] for i, d in merged.entries]})
    atomic_write_jsonl(cfg.artifact("retrievals.jsonl"), rows)
    return {"lists": len(rows), "topk": cfg.topk, "metric": cfg.metric, "inventory": len(index)}


# -- evaluation and reports ----------------------------------------------------


def run_evaluate(cfg: PipelineConfig, ratings: str | None = None) -> dict:
    path = cfg.path(ratings or cfg.ratings)
    if path is None or not path.exists():
        raise MissingArtifact("ratings", path or "<unset>", "set [paths] ratings or pass --ratings")
    records, algos = read_ratings_csv(path)
    stats = score(records, algorithms=algos)
    result = stats.to_dict()
    agreement = None
    desc_path = cfg.artifact("descriptors.jsonl")
    if desc_path.exists():
        cache = load_descriptor_cache(desc_path)
        visible = [p for p in cfg.parts if p != cfg.hidden][0]
        classes = {}
        for r in records:
            h = cache.get((r.query_id, visible))
            if h is not None and len(h) == HSV_DIM:
                classes[r.query_id] = solid_pattern_classify(h, cfg.tau)
        if len(classes) == len({r.query_id for r in records}):
            agreement = agreement_report(records, classes, stats.threshold)
            result["agreement"] = _str_keys(agreement)
            result["solid_probability"] = _solid_probability(cfg, records, algos, classes)
    atomic_write_json(cfg.artifact("scores.json"), result)
    atomic_write_text(cfg.artifact("scores.html"), render_scores(result, _str_keys(agreement) if agreement else None))
    return {"normalized_scores": result["normalized_scores"], "threshold": stats.threshold,
            "excluded_queries": len(stats.excluded_queries)}


def _solid_probability(cfg, records, algos, classes):
    ret_path = cfg.artifact("retrievals.jsonl")
    inv_path = cfg.artifact("inventory_descriptors.jsonl")
    if not (ret_path.exists() and inv_path.exists()):
        return None
    inv = {i: h for (i, _), h in load_descriptor_cache(inv_path).items()}
    if any(len(h) != HSV_DIM for h in inv.values()):
        return None
    lists = {(r["query_id"], r["model"]): [inv[i] for i, _ in r["entries"]] for r in iter_jsonl(ret_path)}
    out = {}
    for cls in sorted(set(classes.values())):
        items, ratings = [], []
        for rec in records:
            if classes[rec.query_id] != cls:
                continue
            for a, rating in zip(algos, rec.ratings):
                got = lists.get((rec.query_id, a.upper()))
                if got:
                    items.append(np.stack(got))
                    ratings.append(rating)
        out[cls] = {str(k): v for k, v in solid_probability(items, ratings, lambda h: is_solid(h, cfg.tau)).items()}
    return out


def _str_keys(obj):
    if isinstance(obj, dict):
        return {str(k): _str_keys(v) for k, v in obj.items()}
    return obj


def run_report(cfg: PipelineConfig) -> dict:
    retrievals: dict[str, dict[str, list[str]]] = {}
    for row in iter_jsonl(require(cfg, "retrievals.jsonl")):
        retrievals.setdefault(row["query_id"], {})[row["model"]] = [i for i, _ in row["entries"]]
    image_paths = {}
    for name in ("records.jsonl", "inventory.jsonl"):
        p = cfg.artifact(name)
        if p.exists():
            image_paths.update({obj["id"]: obj["image_path"] for obj in iter_jsonl(p)})
    grids = gallery(retrievals, cfg.report_seed)
    atomic_write_text(cfg.artifact("report.html"), render_gallery(grids, image_paths, cfg.report_seed))
    atomic_write_json(cfg.artifact("report_key.json"), {"seed": cfg.report_seed, "rows": row_key(grids)})
    shape = sorted({(len(g.rows), max((len(r.items) for r in g.rows), default=0)) for g in grids})
    return {"queries": len(grids), "grid_shapes": [list(s) for s in shape], "seed": cfg.report_seed}
