"""Solid/patterned routing between CNNC and TAR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fashionrec.features import HSV_DIM, HUE, HolisticDescriptor
from fashionrec.recommenders.cnnc import CnncModel
from fashionrec.recommenders.tar import TarModel

SOLID = "solid"
PATTERNED = "patterned"
DEFAULT_TAU = 0.5


def hue_concentration(h: np.ndarray) -> float:
    """Largest bin of the hue sub-histogram, renormalised to sum to one."""
    h = np.asarray(h, dtype=float)
    if h.shape[-1] != HSV_DIM:
        raise ValueError(f"expected a {HSV_DIM}-d HSV histogram")
    hue = h[..., HUE]
    total = hue.sum(axis=-1)
    return float(hue.max() / total) if total > 0 else 0.0


def solid_pattern_classify(h: np.ndarray, tau: float = DEFAULT_TAU) -> str:
    """``solid`` iff the dominant hue bin holds at least ``tau`` of the hue mass."""
    return SOLID if hue_concentration(h) >= tau else PATTERNED


def is_solid(h: np.ndarray, tau: float = DEFAULT_TAU) -> bool:
    return solid_pattern_classify(h, tau) == SOLID


@dataclass
class HybridModel:
    cnnc: CnncModel | None
    tar: TarModel | None
    tau: float = DEFAULT_TAU

    def route(self, query: HolisticDescriptor) -> str:
        return solid_pattern_classify(query.parts[query.visible_idx[0]], self.tau)

    def recommend(self, query: HolisticDescriptor, seed=None) -> list[np.ndarray]:
        if self.cnnc is None or self.tar is None:
            raise ValueError("hybrid recommender needs both a CNNC and a TAR sub-model")
        if self.route(query) == SOLID:
            return self.cnnc.recommend(query)
        return self.tar.recommend(query, seed=seed)


def hybrid_recommend(query: HolisticDescriptor, cnnc: CnncModel, tar: TarModel, tau: float = DEFAULT_TAU, seed=None):
    return HybridModel(cnnc, tar, tau).recommend(query, seed=seed)
