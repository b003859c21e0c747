"""
Learning an unknown two-qubit unitary
=====================================

Pairs (psi, V psi) for a hidden Haar-random V. Training uses 10 pairs and the
remaining 90 measure generalization.
"""

import numpy as np

from dqnn import QNN, TrainingConfig, gen_example_a, train

rng = np.random.default_rng(0)
ds, v = gen_example_a(100, (10, 90), rng)
net = QNN.random(rng)

trained, logs = train(net, ds, TrainingConfig(rounds=300))
for log in logs[::50] + [logs[-1]]:
    print(f"round {log.round:4d}  eps {log.epsilon_star:.4f}  train {log.cost_train:.4f}  val {log.cost_validation:.4f}")
