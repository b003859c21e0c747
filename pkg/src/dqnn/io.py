"""JSON persistence for models, datasets and run configurations, plus CSV writers.

Floats go through :func:`json.dumps`, which emits the shortest decimal that
round-trips, so reloading reproduces every parameter bit for bit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .network import QNN, TrainingPair
from .training import KINDS, Dataset, RoundLog, TrainingConfig, default_epsilon_grid

FORMAT_VERSION = 1


class FileFormatError(ValueError):
    """A model, dataset or config file is unreadable or inconsistent."""


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise FileFormatError(f"{path}: no such file") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: top level must be an object")
    return doc


def _write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _check_version(doc: dict, path) -> None:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})")


def _encode_vector(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _decode_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


# models


@dataclass
class ModelFile:
    net: QNN
    rng_seed: int | None = None
    rounds_completed: int = 0


def save_model(net: QNN, path, rng_seed: int | None = None, rounds_completed: int = 0) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "topology": list(net.topology),
        "perceptrons": [p.tolist() for p in net.perceptrons],
        "rng_seed": rng_seed,
        "rounds_completed": int(rounds_completed),
    }
    _write_json(doc, path)


def read_model(path) -> ModelFile:
    doc = _read_json(path)
    _check_version(doc, path)
    try:
        net = QNN(tuple(doc["topology"]), tuple(np.asarray(p, dtype=float) for p in doc["perceptrons"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: invalid model ({exc})") from exc
    return ModelFile(net, doc.get("rng_seed"), int(doc.get("rounds_completed", 0)))


def load_model(path) -> QNN:
    return read_model(path).net


# datasets


def save_dataset(ds: Dataset, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": ds.kind,
        "seed": ds.seed,
        "train": [{"psi_in": _encode_vector(p.psi_in), "phi_desired": _encode_vector(p.phi_desired)} for p in ds.train],
        "validation": [
            {"psi_in": _encode_vector(p.psi_in), "phi_desired": _encode_vector(p.phi_desired)} for p in ds.validation
        ],
        "hidden_unitary": None if ds.hidden_unitary is None else [_encode_vector(row) for row in ds.hidden_unitary],
    }
    _write_json(doc, path)


def load_dataset(path) -> Dataset:
    doc = _read_json(path)
    _check_version(doc, path)
    try:
        def pairs(key):
            return [TrainingPair(_decode_vector(p["psi_in"]), _decode_vector(p["phi_desired"])) for p in doc[key]]

        hidden = doc.get("hidden_unitary")
        return Dataset(
            pairs("train"),
            pairs("validation"),
            doc.get("seed"),
            doc.get("kind", "custom"),
            None if hidden is None else np.stack([_decode_vector(row) for row in hidden]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: invalid dataset ({exc})") from exc


# run configuration


@dataclass
class RunConfig:
    kind: str = "example_a"
    n_pairs: int = 100
    split: tuple[int, int] = (10, 90)
    rounds: int = 200
    epsilon_grid: Any = field(default_factory=lambda: {"low": 1e-3, "high": 2.0, "num": 50})
    gradient_strategy: str = "exact"
    probe_uncertainty: bool = False
    seed: int = 0
    topology: tuple[int, ...] = (2, 2, 2)
    dataset: str | None = None
    model: str = "model.json"
    log: str = "rounds.csv"

    def validate(self) -> None:
        if self.kind not in KINDS[:2]:
            raise FileFormatError(f"kind must be example_a or example_b, got {self.kind!r}")
        if len(self.split) != 2 or sum(self.split) != self.n_pairs or self.split[0] < 1 or self.split[1] < 0:
            raise FileFormatError(f"split {self.split!r} does not partition n_pairs={self.n_pairs}")
        if self.rounds < 1:
            raise FileFormatError("rounds must be at least 1")
        if self.seed < 0:
            raise FileFormatError("seed must be non-negative")
        try:
            self.training_config()
        except ValueError as exc:
            raise FileFormatError(str(exc)) from exc

    def grid(self) -> np.ndarray:
        g_cfg = self.epsilon_grid
        if isinstance(g_cfg, dict):
            return default_epsilon_grid(float(g_cfg["low"]), float(g_cfg["high"]), int(g_cfg["num"]))
        return np.asarray(g_cfg, dtype=float)

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            rounds=self.rounds,
            epsilon_grid=self.grid(),
            gradient_strategy=self.gradient_strategy,
            probe_uncertainty=self.probe_uncertainty,
            seed=self.seed,
        )


def _normalise_kind(kind: str) -> str:
    return kind.replace("-", "_")


def load_run_config(path) -> RunConfig:
    doc = _read_json(path)
    known = set(RunConfig.__dataclass_fields__) | {"output"}
    unknown = set(doc) - known
    if unknown:
        raise FileFormatError(f"{path}: unknown config fields {sorted(unknown)}")
    out = doc.pop("output", {}) or {}
    try:
        cfg = RunConfig(**doc)
        cfg.kind = _normalise_kind(cfg.kind)
        cfg.gradient_strategy = _normalise_kind(cfg.gradient_strategy)
        cfg.split = tuple(int(s) for s in cfg.split)
        cfg.topology = tuple(int(w) for w in cfg.topology)
        cfg.n_pairs, cfg.rounds, cfg.seed = int(cfg.n_pairs), int(cfg.rounds), int(cfg.seed)
        cfg.model = out.get("model", cfg.model)
        cfg.log = out.get("log", cfg.log)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: invalid config ({exc})") from exc
    return cfg


# CSV


ROUND_COLUMNS_FIXED = ("round", "epsilon_star", "cost_train", "cost_validation")


def round_log_columns(n_perceptrons: int) -> list[str]:
    return (
        list(ROUND_COLUMNS_FIXED)
        + [f"grad_norm_u{i + 1}" for i in range(n_perceptrons)]
        + ["robertson_min", "robertson_mean"]
    )


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_round_log(logs: Sequence[RoundLog], path, n_perceptrons: int) -> None:
    rows = (
        [l.round, l.epsilon_star, l.cost_train, l.cost_validation, *l.grad_norm_per_perceptron,
         l.robertson_min_bound, l.robertson_mean_bound]
        for l in logs
    )
    write_csv(path, round_log_columns(n_perceptrons), rows)
