"""
Feed-forward and analytic gradients
===================================

A (2, 2, 2) network has four perceptrons. Each layer attaches fresh ancillas,
applies its perceptrons and traces out the previous layer, so the output is in
general a mixed state.
"""

import numpy as np

from dqnn import QNN, TrainingPair, cost, feed_forward, gradient
from dqnn.linalg import haar_pure_state, projector
from dqnn.training import grad_check

rng = np.random.default_rng(1)
net = QNN.random(rng)
print("parameters:", net.n_params)

psi = haar_pure_state(2, rng)
rho_out = feed_forward(net, projector(psi))
print("output trace:", np.trace(rho_out).real)
print("output purity Tr(rho^2):", np.trace(rho_out @ rho_out).real)

# the cost is the mean fidelity with the desired outputs
pairs = [TrainingPair(haar_pure_state(2, rng), haar_pure_state(2, rng)) for _ in range(3)]
print("cost:", cost(net, pairs))

# gradient per perceptron, checked against central differences
g = gradient(net, pairs)
print("gradient norms:", [round(float(np.linalg.norm(x)), 4) for x in g])
print("max deviation from finite differences:", grad_check(net, pairs))
