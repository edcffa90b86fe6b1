"""
Label noise
===========

Corrupt a share of the observed labels in each class and watch the
classifiers degrade.  The labelled set stays fixed across noise rates,
so only the flips change.
"""

import numpy as np

from gsslnoise.algorithms import accuracy, gfhf, lgc, predict
from gsslnoise.datasets import make_dataset
from gsslnoise.graph import build_graph
from gsslnoise.noise import NoiseSpec, make_label_state

ds = make_dataset("digit1", seed=2, n=600, d=60)
g = build_graph(ds.features, k=15)

print("rate  flips  GFHF    LGC(0.1) LGC(0.9)")
for rate in (0.0, 0.05, 0.10, 0.20, 0.35):
    accs = {"gfhf": [], "lgc01": [], "lgc09": []}
    flips = 0
    for seed in range(10):
        s = make_label_state(NoiseSpec(seed, 0.10, rate), ds)
        flips += s.flip_record.size
        accs["gfhf"].append(accuracy(predict(gfhf(g, s), s, g), ds.truth, s))
        accs["lgc01"].append(accuracy(predict(lgc(g, s, 0.1), s, g), ds.truth, s))
        accs["lgc09"].append(accuracy(predict(lgc(g, s, 0.9), s, g), ds.truth, s))
    print(f"{rate:4.2f}  {flips / 10:5.1f}  " + "  ".join(f"{np.mean(v):.4f}" for v in accs.values()))
