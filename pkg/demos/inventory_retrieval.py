"""
Retrieving inventory items for a predicted descriptor
=====================================================

Index a random inventory, run one query under each distance, and merge the
lists produced for several diverse predictions.
"""

import numpy as np

from fashionrec.index import build, interleave

rng = np.random.default_rng(0)
inventory = rng.dirichlet(np.full(40, 0.3), size=2000)
index = {m: build(((f"item-{i:04d}", h) for i, h in enumerate(inventory)), metric=m) for m in ("l1", "l2", "kl")}

query = inventory[42] * 0.8 + rng.dirichlet(np.ones(40)) * 0.2
for metric, idx in index.items():
    ranked = idx.query(query, k=5, query_id="demo")
    print(metric, ranked.ids)

# %%
# Diverse recommendations return several descriptors; their result lists are
# merged round-robin, skipping items already taken.
lists = [index["l1"].query(q, k=5) for q in (inventory[1], inventory[2], query)]
print("merged:", interleave(lists, k=10).ids)
