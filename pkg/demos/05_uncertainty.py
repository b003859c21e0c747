"""
Uncertainty relations inside a perceptron
=========================================

Each gradient entry is an expectation of i[A, B] with A a generator and B the
perceptron's input state, so Robertson's inequality dA * dB >= |<[A, B]>| / 2
applies to it. The script compares the bounds before and after training.
"""

import numpy as np

from dqnn import QNN, TrainingConfig, gen_example_a, train, uncertainty_stream
from dqnn.network import entropic_stream, robertson_summary

rng = np.random.default_rng(3)
ds, _ = gen_example_a(1, (1, 0), rng)
net = QNN.random(rng)

for label, model in (("untrained", net), ("trained", train(net, ds, TrainingConfig(rounds=200))[0])):
    lo, mean, slack = robertson_summary(model, ds.train)
    print(f"{label}: min bound {lo:.2e}  mean bound {mean:.3e}  min slack {slack:.2e}")

recs = uncertainty_stream(net, ds.train[0], probes=[(1, 2)])
for r in recs[:4]:
    print(f"U{r.perceptron + 1} ({r.x},{r.y}) state {r.component}: "
          f"dA {r.record.delta_a:.3f} dB {r.record.delta_b:.3f} bound {r.record.lower_bound:.3e}")

ent = entropic_stream(net, ds.train[0], probes=[(1, 2)])
print("entropic slack range:", min(e.slack for e in ent), max(e.slack for e in ent))
