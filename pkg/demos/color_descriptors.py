"""
Colour descriptors of clothing regions
======================================

Render a striped skirt and a plain shirt, describe both parts with the
40-bin HSV histogram and with a colour bag-of-words, then apply the
complementary-hue rotation used by the perceptual recommender.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fashionrec.features import (
    HUE,
    color_bow,
    crop,
    hsv_histogram,
    patch_vectors,
    rgb_to_hsv_degrees,
    sample_patches,
    train_codebook,
)
from fashionrec.recommenders.hybrid import hue_concentration, solid_pattern_classify
from fashionrec.recommenders.pr import pr_descriptor
from fashionrec.synthetic import BOTTOM_BOX, PALETTE, TOP_BOX, make_image

rng = np.random.default_rng(0)
image = make_image(PALETTE[0], PALETTE[7], rng, bottom_stripe=PALETTE[2])
top = rgb_to_hsv_degrees(crop(image, TOP_BOX))
bottom = rgb_to_hsv_degrees(crop(image, BOTTOM_BOX))

# %%
# The HSV histogram: 24 hue bins, then 8 saturation and 8 value bins, each
# block normalised and weighted by a third.
h_top = hsv_histogram(top)
h_bottom = hsv_histogram(bottom)
print("top sums to", h_top.sum(), "; dominant hue bin", h_top[HUE].argmax())
print("hue concentration: top %.2f, bottom %.2f" % (hue_concentration(h_top), hue_concentration(h_bottom)))
print("classified as:", solid_pattern_classify(h_top), "/", solid_pattern_classify(h_bottom))

# %%
# Complementary rotation moves hue by half the wheel and mirrors S and V.
(complement,) = pr_descriptor(h_top)
print("complement of hue bin", h_top[HUE].argmax(), "is bin", complement[HUE].argmax())

# %%
# Colour bag-of-words: 15x15 patches, mean (H/360, S, V) per patch,
# quantised against a small patch codebook.
patches = np.vstack([patch_vectors(sample_patches(region, 200, seed=s)) for s, region in enumerate([top, bottom])])
patch_codebook = train_codebook(patches, 8, seed=0)
print("bottom BoW:", np.round(color_bow(bottom, patch_codebook, seed=1), 3))

fig, axes = plt.subplots(1, 3, figsize=(12, 3))
axes[0].imshow(image)
axes[0].set_title("synthetic outfit")
axes[1].bar(np.arange(40), h_top, color="C3")
axes[1].set_title("top HSV histogram")
axes[2].bar(np.arange(40), h_bottom, color="C0")
axes[2].set_title("striped bottom HSV histogram")
fig.tight_layout()
fig.savefig("color_descriptors.png", dpi=80)
print("wrote color_descriptors.png")
