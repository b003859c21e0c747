"""
Building unitaries from a parameter matrix
==========================================

Every 8x8 unitary of a perceptron comes from a real 8x8 parameter matrix.
Diagonal entries set phases, the upper triangle sets rotation angles and the
lower triangle sets relative phases.
"""

import numpy as np

from dqnn.comp_param import build_unitary, generators, random_params, unitary_derivative

rng = np.random.default_rng(0)
lam = random_params(8, rng)
u = build_unitary(lam)
print("unitarity error:", np.abs(u.conj().T @ u - np.eye(8)).max())

# the all-zero matrix is the identity
print("identity from zeros:", np.allclose(build_unitary(np.zeros((8, 8))), np.eye(8)))

# dU/dlam_xy = i U Y_xy with Hermitian Y_xy; compare against a finite difference
_, y = generators(lam)
h = 1e-6
shift = np.zeros_like(lam)
shift[2, 5] = h
fd = (build_unitary(lam + shift) - build_unitary(lam - shift)) / (2 * h)
print("derivative error at (3, 6):", np.abs(fd - unitary_derivative(lam, 3, 6)).max())
print("generator Hermitian:", np.allclose(y[2, 5], y[2, 5].conj().T))
