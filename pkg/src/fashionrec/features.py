"""Per-part colour descriptors and the shared codebook.

Two low-level representations are supported:

* a 40-d HSV histogram (24 hue, 8 saturation, 8 value bins), and
* a colour bag-of-words: random 15x15 patches, each summarised by its mean
  HSV triple, quantised against a learned patch codebook.

Every part descriptor is a non-negative vector summing to one.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from matplotlib.colors import rgb_to_hsv

from fashionrec._io import atomic_write_json, read_json
from fashionrec.clustering import kmeans

HUE_BINS, SAT_BINS, VAL_BINS = 24, 8, 8
HSV_DIM = HUE_BINS + SAT_BINS + VAL_BINS
HUE = slice(0, HUE_BINS)
SAT = slice(HUE_BINS, HUE_BINS + SAT_BINS)
VAL = slice(HUE_BINS + SAT_BINS, HSV_DIM)

PATCH_SIZE = (15, 15)
N_PATCHES = 200
CODEBOOK_VERSION = 1


def rgb_to_hsv_degrees(rgb: np.ndarray) -> np.ndarray:
    """RGB (uint8 or float in [0, 1]) -> HSV with H in degrees, S and V in [0, 1]."""
    rgb = np.asarray(rgb)
    if rgb.dtype == np.uint8:
        rgb = rgb.astype(float) / 255.0
    hsv = rgb_to_hsv(np.clip(rgb.astype(float), 0.0, 1.0))
    hsv[..., 0] = (hsv[..., 0] * 360.0) % 360.0
    return hsv


def _bin(values: np.ndarray, lo: float, hi: float, n: int) -> np.ndarray:
    idx = np.floor((values - lo) * n / (hi - lo)).astype(int)
    return np.clip(idx, 0, n - 1)


def hsv_histogram(hsv: np.ndarray, bins: tuple[int, int, int] = (HUE_BINS, SAT_BINS, VAL_BINS)) -> np.ndarray:
    """Concatenated per-channel histograms of an HSV region.

    Each channel histogram is normalised to one and the concatenation is
    scaled by 1/3, so the result sums to one and the three channels carry
    equal weight under L1.

    Args:
        hsv: array of shape (..., 3); hue in degrees [0, 360), S and V in [0, 1].
        bins: number of uniform bins per channel.
    """
    hsv = np.asarray(hsv, dtype=float).reshape(-1, 3)
    if hsv.shape[0] == 0:
        raise ValueError("empty region")
    nh, ns, nv = bins
    out = []
    for values, lo, hi, n in ((hsv[:, 0] % 360.0, 0.0, 360.0, nh), (hsv[:, 1], 0.0, 1.0, ns), (hsv[:, 2], 0.0, 1.0, nv)):
        counts = np.bincount(_bin(values, lo, hi, n), minlength=n).astype(float)
        out.append(counts / counts.sum())
    return np.concatenate(out) / 3.0


def crop(image: np.ndarray, box: Sequence[int]) -> np.ndarray:
    x, y, w, h = (int(v) for v in box)
    region = image[y : y + h, x : x + w]
    if region.size == 0:
        raise ValueError(f"box {tuple(box)} selects an empty region")
    return region


def patch_corners(
    shape: tuple[int, int], count: int, patch_size: tuple[int, int] = PATCH_SIZE, seed=0
) -> np.ndarray:
    """Uniform random (row, col) top-left corners of patches fully inside ``shape``."""
    rows, cols = shape[:2]
    ph, pw = patch_size
    if rows < ph or cols < pw:
        raise ValueError(f"region {rows}x{cols} smaller than patch {ph}x{pw}")
    rng = np.random.default_rng(seed)
    r = rng.integers(0, rows - ph + 1, size=count)
    c = rng.integers(0, cols - pw + 1, size=count)
    return np.stack([r, c], axis=1)


def sample_patches(
    region: np.ndarray, count: int = N_PATCHES, patch_size: tuple[int, int] = PATCH_SIZE, seed=0
) -> np.ndarray:
    """Randomly placed patches, shape (count, ph, pw, channels)."""
    region = np.asarray(region)
    corners = patch_corners(region.shape, count, patch_size, seed)
    ph, pw = patch_size
    return np.stack([region[r : r + ph, c : c + pw] for r, c in corners])


def patch_vectors(hsv_patches: np.ndarray) -> np.ndarray:
    """Mean (H/360, S, V) of each HSV patch; hue rescaled to the unit interval."""
    means = np.asarray(hsv_patches, dtype=float).reshape(len(hsv_patches), -1, 3).mean(axis=1)
    means[:, 0] /= 360.0
    return means


@dataclass
class Codebook:
    """K centroids shared by all parts."""

    centroids: np.ndarray
    trained_on: str = ""
    inertia_trace: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=float)
        if self.centroids.ndim != 2 or self.centroids.shape[0] < 2:
            raise ValueError("a codebook needs at least two centroids")
        if len(np.unique(self.centroids, axis=0)) != len(self.centroids):
            raise ValueError("codebook centroids must be pairwise distinct")

    @property
    def K(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def quantize(self, vectors: np.ndarray) -> np.ndarray:
        return quantize_many(vectors, self)

    def to_dict(self) -> dict:
        return {
            "version": CODEBOOK_VERSION,
            "K": self.K,
            "dim": self.dim,
            "centroids": self.centroids.tolist(),
            "trained_on": self.trained_on,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Codebook":
        if obj.get("version") != CODEBOOK_VERSION:
            raise ValueError(f"unsupported codebook version {obj.get('version')!r}")
        cb = cls(np.asarray(obj["centroids"], dtype=float), obj.get("trained_on", ""))
        if cb.K != obj["K"] or cb.dim != obj["dim"]:
            raise ValueError("codebook header does not match centroid array")
        return cb

    def save(self, path: str | os.PathLike) -> None:
        atomic_write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Codebook":
        return cls.from_dict(read_json(path))


def fingerprint(data: np.ndarray) -> str:
    data = np.ascontiguousarray(data, dtype=float)
    h = hashlib.sha256(str(data.shape).encode())
    h.update(data.tobytes())
    return h.hexdigest()[:16]


def train_codebook(
    vectors: np.ndarray, K: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-4
) -> Codebook:
    """k-means (k-means++ seeding, L2) codebook over patch vectors or descriptors."""
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected an (n, dim) array of vectors")
    if K < 2:
        raise ValueError("K must be at least 2")
    n_distinct = len(np.unique(X, axis=0))
    if n_distinct < K:
        raise ValueError(f"need at least K={K} distinct inputs, got {n_distinct}")
    result = kmeans(X, K, seed=seed, max_iter=max_iter, tol=tol)
    return Codebook(result.centers, fingerprint(X), result.inertia_trace)


def quantize_many(vectors: np.ndarray, codebook: Codebook) -> np.ndarray:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.shape[1] != codebook.dim:
        raise ValueError(f"dimension {vectors.shape[1]} does not match codebook dim {codebook.dim}")
    diff = vectors[:, None, :] - codebook.centroids[None, :, :]
    return np.argmin(np.einsum("nkd,nkd->nk", diff, diff), axis=1)


def quantize(descriptor: np.ndarray, codebook: Codebook) -> int:
    """Index of the nearest centroid under L2; ties go to the lowest index."""
    descriptor = np.asarray(descriptor, dtype=float)
    if descriptor.ndim != 1:
        raise ValueError("quantize expects a single vector")
    return int(quantize_many(descriptor, codebook)[0])


def color_bow(
    hsv_region: np.ndarray, patch_codebook: Codebook, count: int = N_PATCHES, seed=0
) -> np.ndarray:
    """Normalised histogram of patch codeword assignments (length K)."""
    patches = sample_patches(hsv_region, count, PATCH_SIZE, seed)
    words = quantize_many(patch_vectors(patches), patch_codebook)
    hist = np.bincount(words, minlength=patch_codebook.K).astype(float)
    return hist / hist.sum()


def validate_descriptor(h: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or (h < 0).any() or abs(h.sum() - 1.0) > atol:
        raise ValueError("part descriptor must be non-negative and sum to 1")
    return h


@dataclass
class HolisticDescriptor:
    """All part descriptors of one image plus which of them the model may see.

    ``parts`` has shape (P, K). Rows of hidden parts are ignored by the
    recommenders (they may hold ground truth or NaN).
    """

    parts: np.ndarray
    visible: np.ndarray
    names: tuple[str, ...] = ("top", "bottom")

    def __post_init__(self):
        self.parts = np.asarray(self.parts, dtype=float)
        self.visible = np.asarray(self.visible, dtype=bool)
        if self.parts.ndim != 2 or self.visible.shape != (self.parts.shape[0],):
            raise ValueError("parts must be (P, K) with one visibility flag per part")
        if len(self.names) != self.parts.shape[0]:
            raise ValueError("one name per part required")

    @classmethod
    def with_hidden(cls, parts: np.ndarray, hidden: int | str, names: Sequence[str] = ("top", "bottom")):
        names = tuple(names)
        j = names.index(hidden) if isinstance(hidden, str) else int(hidden)
        visible = np.ones(len(names), dtype=bool)
        visible[j] = False
        return cls(parts, visible, names)

    @property
    def P(self) -> int:
        return self.parts.shape[0]

    @property
    def K(self) -> int:
        return self.parts.shape[1]

    @property
    def visible_idx(self) -> np.ndarray:
        return np.flatnonzero(self.visible)

    @property
    def hidden_idx(self) -> np.ndarray:
        return np.flatnonzero(~self.visible)

    def single_hidden(self) -> int:
        hidden = self.hidden_idx
        if len(hidden) != 1:
            raise ValueError(f"expected exactly one hidden part, got {len(hidden)}")
        return int(hidden[0])
