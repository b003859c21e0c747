"""Density-matrix simulator and trainer for a minimal dissipative deep quantum
neural network built from composite-parameterized perceptron unitaries."""

from .comp_param import build_unitary, generator, generators, unitary_derivative
from .network import (
    QNN,
    TrainingPair,
    cost,
    effect_operator,
    feed_forward,
    gradient,
    stage_forward,
    uncertainty_stream,
)
from .training import (
    Dataset,
    TrainingConfig,
    epsilon_line_search,
    gen_example_a,
    gen_example_b,
    grad_check,
    train,
)

__version__ = "0.1.0"
