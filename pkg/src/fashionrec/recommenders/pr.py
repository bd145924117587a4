"""Perceptual retrieval: hue-wheel rotation baselines.

Complementary colours sit 180 degrees apart on the hue wheel (12 of the 24
hue bins); a triad uses +/-120 degrees (8 bins). Saturation and value
histograms are reflected (bin order reversed), pairing muted with vivid and
dark with light.
"""

from __future__ import annotations

import numpy as np

from fashionrec.features import HSV_DIM, HUE, HUE_BINS, SAT, VAL, HolisticDescriptor

COMPLEMENTARY = "complementary"
TRIAD = "triad"
MODES = (COMPLEMENTARY, TRIAD)


def _check_hsv(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (HSV_DIM,):
        raise ValueError(f"PR needs a {HSV_DIM}-d HSV histogram, got shape {h.shape}")
    return h


def rotate_hue(h: np.ndarray, shift_bins: int) -> np.ndarray:
    """Rotate the hue sub-histogram by ``shift_bins`` and reflect S and V."""
    h = _check_hsv(h)
    out = np.empty_like(h)
    out[HUE] = np.roll(h[HUE], shift_bins)
    out[SAT] = h[SAT][::-1]
    out[VAL] = h[VAL][::-1]
    return out


def pr_descriptor(h: np.ndarray, mode: str = COMPLEMENTARY) -> list[np.ndarray]:
    if mode == COMPLEMENTARY:
        return [rotate_hue(h, HUE_BINS // 2)]
    if mode == TRIAD:
        third = HUE_BINS // 3
        return [rotate_hue(h, third), rotate_hue(h, -third)]
    raise ValueError(f"unknown PR mode {mode!r}; expected one of {MODES}")


def pr_transform(query: HolisticDescriptor, mode: str = COMPLEMENTARY, source: int | None = None) -> list[np.ndarray]:
    """Transform the query's visible part into hidden-part predictions.

    ``source`` picks the visible part to rotate; by default the first one.
    Returns one descriptor for ``complementary`` and two for ``triad``.
    """
    query.single_hidden()
    if source is None:
        source = int(query.visible_idx[0])
    elif not query.visible[source]:
        raise ValueError(f"part {source} is hidden")
    return pr_descriptor(query.parts[source], mode)
