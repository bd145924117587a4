"""Annotated image manifests: ingestion, cleanup filters and splits.

A manifest is line-oriented JSON, one image per line::

    {"id": "img-0001", "image_path": "imgs/0001.png", "width": 300,
     "height": 450, "parts": [{"part_name": "top", "box": [40, 60, 200, 150]}],
     "tags": ["street"], "user_id": "u17", "brand": "acme"}
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from fashionrec._io import atomic_write_jsonl

log = logging.getLogger(__name__)

DEFAULT_PARTS: tuple[str, ...] = ("top", "bottom")

MIN_HEIGHT = 400


class ManifestError(ValueError):
    """A manifest line that does not match the record schema."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
        self.message = message


@dataclass(frozen=True)
class PartAnnotation:
    part_name: str
    box: tuple[int, int, int, int]  # x, y, w, h in pixels

    def __post_init__(self):
        if len(self.box) != 4:
            raise ValueError("box must be [x, y, w, h]")
        if self.box[2] <= 0 or self.box[3] <= 0:
            raise ValueError(f"part {self.part_name!r} has non-positive box size")


@dataclass(frozen=True)
class ImageRecord:
    id: str
    image_path: str
    width: int
    height: int
    parts: tuple[PartAnnotation, ...]
    tags: tuple[str, ...] = ()
    user_id: str | None = None
    brand: str | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"record {self.id!r}: width and height must be positive")
        names = [p.part_name for p in self.parts]
        if len(set(names)) != len(names):
            raise ValueError(f"record {self.id!r}: duplicate part names {names}")
        for p in self.parts:
            x, y, w, h = p.box
            if x < 0 or y < 0 or x + w > self.width or y + h > self.height:
                raise ValueError(f"record {self.id!r}: box of {p.part_name!r} leaves the image")

    def part(self, name: str) -> PartAnnotation | None:
        for p in self.parts:
            if p.part_name == name:
                return p
        return None

    def has_parts(self, names: Iterable[str]) -> bool:
        return all(self.part(n) is not None for n in names)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "image_path": self.image_path,
            "width": self.width,
            "height": self.height,
            "parts": [{"part_name": p.part_name, "box": list(p.box)} for p in self.parts],
            "tags": list(self.tags),
            "user_id": self.user_id,
            "brand": self.brand,
        }


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_test: int
    seed: int = 0

    def __post_init__(self):
        if self.n_train < 0 or self.n_test < 0:
            raise ValueError("split sizes must be non-negative")


def record_from_dict(obj: dict, part_schema: Sequence[str] | None = None) -> ImageRecord:
    """Validate one decoded manifest object and build an :class:`ImageRecord`."""
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    for key in ("id", "image_path", "width", "height", "parts"):
        if key not in obj:
            raise ValueError(f"missing required key {key!r}")
    if not isinstance(obj["parts"], list):
        raise ValueError("'parts' must be a list")
    parts = []
    for raw in obj["parts"]:
        if not isinstance(raw, dict) or "part_name" not in raw or "box" not in raw:
            raise ValueError("each part needs 'part_name' and 'box'")
        name = str(raw["part_name"])
        if part_schema is not None and name not in part_schema:
            raise ValueError(f"part {name!r} not in schema {list(part_schema)}")
        box = tuple(int(v) for v in raw["box"])
        parts.append(PartAnnotation(name, box))
    width, height = obj["width"], obj["height"]
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (width, height)):
        raise ValueError("width/height must be numbers")
    return ImageRecord(
        id=str(obj["id"]),
        image_path=str(obj["image_path"]),
        width=int(width),
        height=int(height),
        parts=tuple(parts),
        tags=tuple(str(t) for t in obj.get("tags") or ()),
        user_id=obj.get("user_id"),
        brand=obj.get("brand"),
    )


def ingest(
    manifest_path: str | os.PathLike,
    part_schema: Sequence[str] | None = DEFAULT_PARTS,
    errors: list[ManifestError] | None = None,
) -> list[ImageRecord]:
    """Read a JSONL manifest, skipping and reporting malformed lines.

    Bad lines are logged as warnings and, if ``errors`` is given, appended to
    it as :class:`ManifestError` objects carrying the 1-based line number.
    An unreadable file raises ``OSError``.
    """
    records = []
    with open(manifest_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(record_from_dict(json.loads(line), part_schema))
            except (ValueError, TypeError) as exc:
                err = ManifestError(lineno, str(exc))
                log.warning("%s: skipping %s", manifest_path, err)
                if errors is not None:
                    errors.append(err)
    return records


def write_manifest(path: str | os.PathLike, records: Iterable[ImageRecord]) -> None:
    atomic_write_jsonl(path, (r.to_dict() for r in records))


def keep_record(height: int, width: int) -> bool:
    return height >= MIN_HEIGHT and height > width


def cleanup(records: Iterable[ImageRecord]) -> list[ImageRecord]:
    """Keep full-body shots: height at least 400 px and taller than wide."""
    return [r for r in records if keep_record(r.height, r.width)]


def split(records: Sequence[ImageRecord], spec: SplitSpec) -> tuple[list[ImageRecord], list[ImageRecord]]:
    """Random disjoint train/test subsets, reproducible for a fixed seed."""
    n = len(records)
    if spec.n_train + spec.n_test > n:
        raise ValueError(f"split needs {spec.n_train + spec.n_test} records, corpus has {n}")
    order = np.random.default_rng(spec.seed).permutation(n)
    train = [records[i] for i in order[: spec.n_train]]
    test = [records[i] for i in order[spec.n_train : spec.n_train + spec.n_test]]
    return train, test


def complete_records(
    records: Iterable[ImageRecord], part_schema: Sequence[str] = DEFAULT_PARTS
) -> tuple[list[ImageRecord], list[str]]:
    """Records that carry every schema part, plus the ids that were dropped."""
    kept, dropped = [], []
    for r in records:
        (kept if r.has_parts(part_schema) else dropped).append(r)
    if dropped:
        log.info("%d records lack one of %s and are excluded", len(dropped), list(part_schema))
    return kept, [r.id for r in dropped]
