"""Synthetic street-fashion corpora with a planted top/bottom colour rule.

Images are drawn as flat or striped colour blocks on a grey background so the
whole pipeline can run without any real photographs.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from fashionrec.corpus import ImageRecord, PartAnnotation, write_manifest
from fashionrec.evaluation import DEFAULT_ALGORITHMS, RatingRecord, write_ratings_csv

# saturated hues at 30 degree steps plus black, white and grey
PALETTE = np.array(
    [
        [220, 30, 30], [230, 130, 20], [220, 210, 30], [120, 200, 40],
        [30, 170, 60], [30, 190, 160], [30, 180, 220], [40, 90, 210],
        [90, 40, 200], [160, 40, 200], [210, 40, 160], [200, 40, 90],
        [20, 20, 20], [240, 240, 240], [128, 128, 128],
    ],
    dtype=np.uint8,
)

IMAGE_SIZE = (240, 420)            # width, height; passes the cleanup filter
TOP_BOX = (40, 50, 160, 160)       # x, y, w, h
BOTTOM_BOX = (40, 230, 160, 170)
INVENTORY_SIZE = (160, 160)


def complement_rule(n_colors: int = len(PALETTE)) -> np.ndarray:
    """Planted bottom -> top colour map (a fixed permutation)."""
    return np.roll(np.arange(n_colors), n_colors // 2)


def paint(canvas: np.ndarray, box, color, rng: np.random.Generator, stripe_color=None, noise: float = 6.0):
    x, y, w, h = box
    block = np.empty((h, w, 3), dtype=float)
    block[:] = color
    if stripe_color is not None:
        period = int(rng.integers(6, 16))
        rows = (np.arange(h) // (period // 2)) % 2 == 1
        block[rows] = stripe_color
    block += rng.normal(0.0, noise, size=block.shape)
    canvas[y : y + h, x : x + w] = np.clip(block, 0, 255)


def make_image(top, bottom, rng, top_stripe=None, bottom_stripe=None) -> np.ndarray:
    w, h = IMAGE_SIZE
    img = np.full((h, w, 3), 150.0)
    img += rng.normal(0.0, 4.0, size=img.shape)
    paint(img, TOP_BOX, top, rng, top_stripe)
    paint(img, BOTTOM_BOX, bottom, rng, bottom_stripe)
    return np.clip(img, 0, 255).astype(np.uint8)


def make_toy_corpus(
    out_dir: str | os.PathLike,
    n: int = 600,
    n_inventory: int = 300,
    seed: int = 0,
    rule_strength: float = 0.8,
    pattern_rate: float = 0.3,
    n_small: int = 0,
) -> dict[str, Path]:
    """Write images plus ``corpus.jsonl`` and ``inventory.jsonl`` under ``out_dir``.

    Each corpus image has a bottom colour b and, with probability
    ``rule_strength``, the top colour ``complement_rule()[b]`` (otherwise a
    random colour). A fraction ``pattern_rate`` of bottoms are striped.
    ``n_small`` extra landscape images are added that cleanup must remove.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rule = complement_rule()
    n_colors = len(PALETTE)
    records = []
    for i in range(n + n_small):
        b = int(rng.integers(n_colors))
        t = int(rule[b]) if rng.random() < rule_strength else int(rng.integers(n_colors))
        stripe = PALETTE[int(rng.integers(n_colors))] if rng.random() < pattern_rate else None
        img = make_image(PALETTE[t], PALETTE[b], rng, bottom_stripe=stripe)
        rid = f"street-{i:05d}"
        rel = f"images/{rid}.png"
        if i >= n:
            img = img[:300].transpose(1, 0, 2)[:, :300].copy()
            Image.fromarray(img).save(out / rel, compress_level=1)
            h, w = img.shape[:2]
            records.append(ImageRecord(rid, rel, w, h, (), ("landscape",)))
            continue
        Image.fromarray(img).save(out / rel, compress_level=1)
        records.append(
            ImageRecord(
                rid, rel, IMAGE_SIZE[0], IMAGE_SIZE[1],
                (PartAnnotation("top", TOP_BOX), PartAnnotation("bottom", BOTTOM_BOX)),
                ("striped" if stripe is not None else "solid",),
                user_id=f"user-{int(rng.integers(50)):03d}",
            )
        )
    write_manifest(out / "corpus.jsonl", records)

    inventory = []
    w, h = INVENTORY_SIZE
    for i in range(n_inventory):
        c = int(rng.integers(n_colors))
        stripe = PALETTE[int(rng.integers(n_colors))] if rng.random() < pattern_rate else None
        img = np.full((h, w, 3), 255.0)
        paint(img, (10, 10, w - 20, h - 20), PALETTE[c], rng, stripe)
        img = np.clip(img, 0, 255).astype(np.uint8)
        rid = f"inv-{i:05d}"
        rel = f"images/{rid}.png"
        Image.fromarray(img).save(out / rel, compress_level=1)
        inventory.append(ImageRecord(rid, rel, w, h, (PartAnnotation("top", (10, 10, w - 20, h - 20)),)))
    write_manifest(out / "inventory.jsonl", inventory)
    return {"manifest": out / "corpus.jsonl", "inventory": out / "inventory.jsonl", "images": out / "images"}


def random_ratings(
    query_ids, n_raters: int = 5, algorithms=DEFAULT_ALGORITHMS, seed: int = 0, bias=None
) -> list[RatingRecord]:
    """Noisy ratings around a per-algorithm mean (``bias``, default all 0.5)."""
    rng = np.random.default_rng(seed)
    bias = np.zeros(len(algorithms)) + 0.5 if bias is None else np.asarray(bias, dtype=float)
    out = []
    for q in query_ids:
        for r in range(n_raters):
            vals = np.clip(np.rint(bias + rng.normal(0, 0.9, size=len(algorithms))), -1, 2).astype(int)
            out.append(RatingRecord(str(q), f"rater-{r}", tuple(int(v) for v in vals)))
    return out


def write_random_ratings(path, query_ids, **kw) -> Path:
    algorithms = kw.get("algorithms", DEFAULT_ALGORITHMS)
    write_ratings_csv(path, random_ratings(query_ids, **kw), algorithms)
    return Path(path)
