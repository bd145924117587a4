"""Complementary clothing recommendation from street fashion images.

Subpackages and modules:

* :mod:`fashionrec.corpus` - manifests, cleanup filter, train/test split
* :mod:`fashionrec.features` - HSV histograms, colour bag-of-words, codebooks
* :mod:`fashionrec.recommenders` - PR, CNNC, GMM, MCL, TAR and the hybrid router
* :mod:`fashionrec.index` - exact top-k retrieval over an inventory
* :mod:`fashionrec.evaluation` - agreement-filtered crowd-rating scores
* :mod:`fashionrec.cli` - the end-to-end pipeline
"""

__version__ = "0.1.0"
