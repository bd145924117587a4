"""
Scoring algorithms from noisy crowd ratings
===========================================

Simulate five raters per query, one of whom answers at random, and compare
the plain mean rating with the agreement-filtered score.
"""

import numpy as np

from fashionrec.evaluation import RatingRecord, score

rng = np.random.default_rng(0)
algorithms = ("PR", "CNNC", "GMM", "MCL", "TAR")
true_quality = np.array([0.2, 1.3, 0.9, 1.0, 0.4])

records = []
for q in range(100):
    for r in range(5):
        if r == 4:
            ratings = rng.integers(-1, 3, size=5)   # careless rater
        else:
            ratings = np.clip(np.rint(true_quality + rng.normal(0, 0.5, size=5)), -1, 2)
        records.append(RatingRecord(f"q{q:03d}", f"rater{r}", tuple(int(v) for v in ratings)))

stats = score(records, algorithms=algorithms)
plain = np.mean([r.ratings for r in records], axis=0)

print(f"agreement threshold {stats.threshold:.1f}; excluded queries {len(stats.excluded_queries)}")
careless = np.mean([g < stats.threshold for (q, r), g in stats.gamma.items() if r == "rater4"])
print(f"careless rater retained on {careless:.0%} of queries")
for a, m, s in zip(algorithms, plain, stats.mean_scores):
    print(f"{a:5s} plain mean {m:5.2f}   filtered {s:5.2f}   normalised {(s + 1) / 3:.3f}")
