"""Query transformations: visible-part descriptors in, hidden-part descriptors out."""

from fashionrec.recommenders.cnnc import (
    CnncModel,
    NeighborSet,
    cnnc_consensus,
    cnnc_diverse,
    cnnc_neighbors,
)
from fashionrec.recommenders.gmm import GmmModel, gmm_infer, gmm_train
from fashionrec.recommenders.hybrid import HybridModel, hybrid_recommend, solid_pattern_classify
from fashionrec.recommenders.mcl import MclModel, mcl_infer, mcl_train, topic_posterior
from fashionrec.recommenders.models import (
    KINDS,
    GmmRecommender,
    MclRecommender,
    PrModel,
    load_model,
    save_model,
)
from fashionrec.recommenders.pr import pr_transform
from fashionrec.recommenders.tar import TarModel, tar_transform

__all__ = [
    "CnncModel", "NeighborSet", "cnnc_consensus", "cnnc_diverse", "cnnc_neighbors",
    "GmmModel", "gmm_infer", "gmm_train",
    "HybridModel", "hybrid_recommend", "solid_pattern_classify",
    "MclModel", "mcl_infer", "mcl_train", "topic_posterior",
    "KINDS", "GmmRecommender", "MclRecommender", "PrModel", "load_model", "save_model",
    "pr_transform", "TarModel", "tar_transform",
]
