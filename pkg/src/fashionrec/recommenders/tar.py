"""Texture agnostic retrieval: a random, query-independent target."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fashionrec.features import HSV_DIM, HUE, HUE_BINS, SAT, VAL, HolisticDescriptor

UNIFORM = "uniform"
PEAKED = "peaked"


def tar_transform(K: int = HSV_DIM, seed=0, mode: str = UNIFORM) -> np.ndarray:
    """Sample a descriptor.

    ``uniform`` draws K values from U([0, 1]) and normalises them.
    ``peaked`` is a solid colour in the HSV layout: one random hue bin and
    the top saturation and value bins, each holding a third of the mass.
    """
    rng = np.random.default_rng(seed)
    if mode == UNIFORM:
        if K < 1:
            raise ValueError("K must be positive")
        h = rng.uniform(0.0, 1.0, size=K)
        return h / h.sum()
    if mode == PEAKED:
        if K != HSV_DIM:
            raise ValueError(f"peaked mode needs the {HSV_DIM}-d HSV layout")
        h = np.zeros(HSV_DIM)
        h[HUE][rng.integers(HUE_BINS)] = 1.0 / 3
        h[SAT][-1] = 1.0 / 3
        h[VAL][-1] = 1.0 / 3
        return h
    raise ValueError(f"unknown TAR mode {mode!r}")


@dataclass
class TarModel:
    K: int = HSV_DIM
    seed: int = 0
    mode: str = UNIFORM

    def recommend(self, query: HolisticDescriptor | None = None, seed=None) -> list[np.ndarray]:
        return [tar_transform(self.K, self.seed if seed is None else seed, self.mode)]
