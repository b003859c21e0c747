"""Datasets, the epsilon-line-search training loop and evaluation helpers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import DomainError, haar_pure_state, haar_unitary, ket, projector
from .network import QNN, PairBatch, TrainingPair, as_batch, cost, costs_along, gradient, pair_costs
from .network import STRATEGIES, robertson_summary
from .qprops import concurrence_pure, purity

__all__ = [
    "TrainingPair",
    "Dataset",
    "TrainingConfig",
    "RoundLog",
    "TrainingError",
    "default_epsilon_grid",
    "gen_example_a",
    "gen_example_b",
    "example_b_target",
    "epsilon_line_search",
    "train",
    "grad_check",
    "evaluate_example_b",
    "interchange_test",
]

logger = logging.getLogger(__name__)

KINDS = ("example_a", "example_b", "custom")


class TrainingError(RuntimeError):
    """Numerical failure during training; ``round`` is the 1-based round index."""

    def __init__(self, message: str, round: int):
        super().__init__(f"round {round}: {message}")
        self.round = round


@dataclass
class Dataset:
    train: list[TrainingPair]
    validation: list[TrainingPair]
    seed: int | None = None
    kind: str = "custom"
    hidden_unitary: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")


def default_epsilon_grid(low: float = 1e-3, high: float = 2.0, num: int = 50) -> np.ndarray:
    """``0`` followed by ``num`` geometrically spaced step sizes in ``[low, high]``."""
    return np.concatenate([[0.0], np.geomspace(low, high, num)])


@dataclass
class TrainingConfig:
    rounds: int = 200
    epsilon_grid: np.ndarray = field(default_factory=default_epsilon_grid)
    gradient_strategy: str = "exact"
    probe_uncertainty: bool = False
    seed: int = 0
    probes: Sequence[tuple[int, int]] | None = None
    target_cost: float | None = None

    def __post_init__(self):
        grid = np.asarray(self.epsilon_grid, dtype=float)
        if not np.all(np.isfinite(grid)) or not np.any(grid == 0.0) or not np.any(grid > 0.0):
            raise ValueError("epsilon_grid must contain 0 and a positive value")
        if int(self.rounds) < 1:
            raise ValueError("rounds must be at least 1")
        if self.gradient_strategy not in STRATEGIES:
            raise ValueError(f"unknown gradient strategy {self.gradient_strategy!r}")
        self.epsilon_grid = np.unique(grid)
        self.rounds = int(self.rounds)


@dataclass(frozen=True)
class RoundLog:
    round: int
    epsilon_star: float
    cost_train: float
    cost_validation: float
    grad_norm_per_perceptron: tuple[float, ...]
    robertson_min_bound: float = math.nan
    robertson_mean_bound: float = math.nan


def _rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), int(rng)


def _check_split(n_pairs: int, split: Sequence[int]) -> tuple[int, int]:
    n_train, n_val = (int(s) for s in split)
    if n_train < 1 or n_val < 0 or n_train + n_val != n_pairs:
        raise ValueError(f"split {tuple(split)} does not partition {n_pairs} pairs")
    return n_train, n_val


def gen_example_a(n_pairs: int, split: Sequence[int], rng) -> tuple[Dataset, np.ndarray]:
    """Pairs ``(psi, V psi)`` for one Haar-random two-qubit unitary ``V``."""
    n_train, _ = _check_split(n_pairs, split)
    gen, seed = _rng(rng)
    v = haar_unitary(4, gen)
    pairs = []
    for _ in range(n_pairs):
        psi = haar_pure_state(2, gen)
        phi = v @ psi
        pairs.append(TrainingPair(psi, phi / np.linalg.norm(phi)))
    return Dataset(pairs[:n_train], pairs[n_train:], seed, "example_a", v), v


def example_b_target(psi: np.ndarray) -> np.ndarray:
    """Desired state encoding concurrence ``C`` and purity ``P`` of ``psi``:
    ``sqrt(C/2)|00> + sqrt(1 - (C+P)/2)(|01>+|10>)/sqrt 2 + sqrt(P/2)|11>``."""
    con = concurrence_pure(psi)
    pur = purity(projector(psi))
    mid = 1.0 - (con + pur) / 2.0
    if mid < -1e-12:
        raise DomainError(f"negative middle amplitude radicand {mid:.3e}")
    mid = max(mid, 0.0)
    phi = (
        math.sqrt(con / 2.0) * ket("00")
        + math.sqrt(mid / 2.0) * (ket("01") + ket("10"))
        + math.sqrt(max(pur, 0.0) / 2.0) * ket("11")
    )
    return phi / np.linalg.norm(phi)


def gen_example_b(n_pairs: int, split: Sequence[int], rng) -> Dataset:
    """Haar-random pure inputs mapped to states encoding their entanglement and purity."""
    n_train, _ = _check_split(n_pairs, split)
    gen, seed = _rng(rng)
    pairs = []
    for _ in range(n_pairs):
        psi = haar_pure_state(2, gen)
        pairs.append(TrainingPair(psi, example_b_target(psi)))
    return Dataset(pairs[:n_train], pairs[n_train:], seed, "example_b")


def epsilon_line_search(net: QNN, direction, pairs, grid) -> tuple[float, float]:
    """Best step along ``direction`` over ``grid``; ties go to the smallest step."""
    grid = np.unique(np.asarray(grid, dtype=float))
    if not np.any(grid == 0.0):
        raise ValueError("grid must contain 0")
    values = costs_along(net, direction, grid, pairs)
    k = int(np.argmax(values))
    return float(grid[k]), float(values[k])


def _cost_or_nan(net: QNN, pairs) -> float:
    return cost(net, pairs) if len(pairs) else math.nan


def train(net: QNN, dataset: Dataset, config: TrainingConfig) -> tuple[QNN, list[RoundLog]]:
    """Full-batch gradient ascent; every round picks one step for all perceptrons.

    Stops early once ``config.target_cost`` (if set) is reached.
    """
    batch = as_batch(dataset.train)
    val = as_batch(dataset.validation) if dataset.validation else None
    logs: list[RoundLog] = []
    logger.info("initial cost %.6f", cost(net, batch))
    for r in range(1, config.rounds + 1):
        grads = gradient(net, batch, config.gradient_strategy)
        if not all(np.all(np.isfinite(g)) for g in grads):
            raise TrainingError("non-finite gradient", r)
        r_min = r_mean = math.nan
        if config.probe_uncertainty:
            r_min, r_mean, slack = robertson_summary(net, batch, config.probes)
            if slack < -1e-10:
                raise TrainingError(f"Robertson relation violated (slack {slack:.3e})", r)
        eps, c = epsilon_line_search(net, grads, batch, config.epsilon_grid)
        if not math.isfinite(c):
            raise TrainingError("non-finite cost", r)
        net = net.shifted(grads, eps)
        c_val = cost(net, val) if val is not None else math.nan
        norms = tuple(float(np.linalg.norm(g)) for g in grads)
        logs.append(RoundLog(r, eps, c, c_val, norms, r_min, r_mean))
        logger.debug("round %d eps %.4g cost %.6f val %.6f", r, eps, c, c_val)
        if config.target_cost is not None and c >= config.target_cost:
            break
    return net, logs


def grad_check(net: QNN, pairs, step: float = 1e-5) -> float:
    """Largest deviation between analytic and central-difference gradients."""
    if step <= 0:
        raise ValueError("step must be positive")
    batch = as_batch(pairs)
    analytic = gradient(net, batch)
    err = 0.0
    for i, lam in enumerate(net.perceptrons):
        d = lam.shape[0]
        for x in range(d):
            for y in range(d):
                unit = [np.zeros_like(p) for p in net.perceptrons]
                unit[i][x, y] = 1.0
                fd = costs_along(net, unit, np.array([step, -step]), batch)
                err = max(err, abs((fd[0] - fd[1]) / (2 * step) - analytic[i][x, y]))
    return err


@dataclass(frozen=True)
class ProbabilityRecord:
    split: str
    index: int
    diffs: tuple[float, float, float, float]  # outcomes 00, 01, 10, 11


def evaluate_example_b(net: QNN, dataset: Dataset) -> list[ProbabilityRecord]:
    """Computational-basis outcome differences ``p_out(b) - p_desired(b)``."""
    from .network import feed_forward

    out = []
    for split, pairs in (("train", dataset.train), ("validation", dataset.validation)):
        if not pairs:
            continue
        b = as_batch(pairs)
        rho = feed_forward(net, b.rho_in)
        p_out = np.einsum("nii->ni", rho).real
        p_des = np.abs(b.targets) ** 2
        for n, row in enumerate(p_out - p_des):
            out.append(ProbabilityRecord(split, n, tuple(float(v) for v in row)))
    return out


def _swapped(pairs: Sequence[TrainingPair]) -> list[TrainingPair]:
    return [TrainingPair(p.phi_desired, p.psi_in) for p in pairs]


def interchange_test(net: QNN, dataset: Dataset) -> float:
    """Cost with the roles of input and desired state swapped, over all pairs."""
    return cost(net, _swapped(list(dataset.train) + list(dataset.validation)))


def interchange_costs(net: QNN, pairs) -> np.ndarray:
    return pair_costs(net, _swapped(pairs))
