"""
Encoding entanglement and purity
================================

The desired output for an input psi carries its concurrence C and purity P in
the computational-basis probabilities: p(00) = C/2, p(11) = P/2. The
interchange test swaps inputs and outputs; a network that learned the
encoding should do poorly on the reversed task.
"""

import numpy as np

from dqnn import QNN, TrainingConfig, gen_example_b, train
from dqnn.network import cost
from dqnn.training import evaluate_example_b, interchange_test

rng = np.random.default_rng(0)
ds = gen_example_b(100, (70, 30), rng)
net = QNN.random(rng)

trained, logs = train(net, ds, TrainingConfig(rounds=150))
print("train cost:", logs[-1].cost_train)
print("validation cost:", logs[-1].cost_validation)
print("forward cost, all pairs:", cost(trained, ds.train + ds.validation))
print("interchange cost:", interchange_test(trained, ds))

diffs = np.array([r.diffs for r in evaluate_example_b(trained, ds)])
print("mean |p_out - p_desired| per outcome (00, 01, 10, 11):", np.abs(diffs).mean(axis=0).round(4))
