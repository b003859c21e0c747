"""Command-line driver: ``dqnn gen | train | eval | gradcheck | uncertainty``.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or file-format error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .linalg import haar_pure_state
from .network import QNN, TrainingPair, entropic_stream, pair_costs, uncertainty_stream
from .training import (
    TrainingError,
    evaluate_example_b,
    gen_example_a,
    gen_example_b,
    grad_check,
    interchange_costs,
    train,
)

logger = logging.getLogger("dqnn")


class UsageError(Exception):
    pass


def _split(text: str) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"split must look like 10,90, got {text!r}")
    return a, b


def _kind(text: str) -> str:
    kind = text.replace("-", "_")
    if kind not in ("example_a", "example_b"):
        raise argparse.ArgumentTypeError("kind must be example-a or example-b")
    return kind


def _strategy(text: str) -> str:
    s = text.replace("-", "_")
    if s not in ("exact", "paper_literal"):
        raise argparse.ArgumentTypeError("strategy must be exact or paper-literal")
    return s


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dqnn", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a dataset file")
    g.add_argument("--config")
    g.add_argument("--kind", type=_kind)
    g.add_argument("--n", type=int)
    g.add_argument("--split", type=_split)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train a network, write model and round log")
    t.add_argument("--config")
    t.add_argument("--dataset")
    t.add_argument("--model", help="start from this model instead of a random one")
    t.add_argument("--seed", type=int)
    t.add_argument("--rounds", type=int)
    t.add_argument("--strategy", type=_strategy)
    t.add_argument("--kind", type=_kind)
    t.add_argument("--n", type=int)
    t.add_argument("--split", type=_split)
    t.add_argument("--out", help="model output path")
    t.add_argument("--log", help="round log CSV path")

    e = sub.add_parser("eval", help="per-pair costs, outcome differences and interchange test")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--out", required=True)

    c = sub.add_parser("gradcheck", help="compare analytic and finite-difference gradients")
    c.add_argument("--model")
    c.add_argument("--dataset")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--n", type=int, default=3, help="random pairs when no dataset is given")
    c.add_argument("--step", type=float, default=1e-5)
    c.add_argument("--tol", type=float, default=1e-6)

    u = sub.add_parser("uncertainty", help="Robertson and entropic records per probe")
    u.add_argument("--model", required=True)
    u.add_argument("--dataset", required=True)
    u.add_argument("--out", required=True)
    u.add_argument("--max-pairs", type=int, default=None)
    return p


def _run_config(args) -> io.RunConfig:
    cfg = io.load_run_config(args.config) if args.config else io.RunConfig()
    for attr, key in (("kind", "kind"), ("n", "n_pairs"), ("split", "split"), ("seed", "seed")):
        if getattr(args, attr, None) is not None:
            setattr(cfg, key, getattr(args, attr))
    if getattr(args, "rounds", None) is not None:
        cfg.rounds = args.rounds
    if getattr(args, "strategy", None) is not None:
        cfg.gradient_strategy = args.strategy
    if args.n is not None and args.split is None and args.config is None:
        cfg.split = (args.n, 0)
    cfg.split = tuple(cfg.split)
    try:
        cfg.validate()
    except io.FileFormatError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _generate(cfg: io.RunConfig, rng):
    if cfg.kind == "example_a":
        return gen_example_a(cfg.n_pairs, cfg.split, rng)[0]
    return gen_example_b(cfg.n_pairs, cfg.split, rng)


def cmd_gen(args) -> int:
    cfg = _run_config(args)
    ds = _generate(cfg, cfg.seed)
    io.save_dataset(ds, args.out)
    print(f"wrote {len(ds.train)} train / {len(ds.validation)} validation pairs to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _run_config(args)
    rng = np.random.default_rng(cfg.seed)
    dataset_path = args.dataset or cfg.dataset
    ds = io.load_dataset(dataset_path) if dataset_path else _generate(cfg, rng)
    net = io.load_model(args.model) if args.model else QNN.random(rng, cfg.topology)
    trained, logs = train(net, ds, cfg.training_config())
    model_path = args.out or cfg.model
    log_path = args.log or cfg.log
    io.save_model(trained, model_path, rng_seed=cfg.seed, rounds_completed=len(logs))
    io.write_round_log(logs, log_path, len(trained.perceptrons))
    last = logs[-1]
    print(f"rounds {len(logs)} cost_train {last.cost_train:.6f} cost_validation {last.cost_validation:.6f}")
    return 0


def cmd_eval(args) -> int:
    net = io.load_model(args.model)
    ds = io.load_dataset(args.dataset)
    diffs = {(r.split, r.index): r.diffs for r in evaluate_example_b(net, ds)}
    rows = []
    for split, pairs in (("train", ds.train), ("validation", ds.validation)):
        if not pairs:
            continue
        fwd = pair_costs(net, pairs)
        inter = interchange_costs(net, pairs)
        for n in range(len(pairs)):
            rows.append([split, n, fwd[n], inter[n], *diffs[(split, n)]])
    cols = ["split", "index", "cost", "interchange_cost", "diff_00", "diff_01", "diff_10", "diff_11"]
    io.write_csv(args.out, cols, rows)
    for split in ("train", "validation"):
        sel = [r for r in rows if r[0] == split]
        if sel:
            c = np.array([r[2] for r in sel])
            ic = np.array([r[3] for r in sel])
            print(f"{split}: cost {c.mean():.6f} (sd {c.std():.4f}) interchange {ic.mean():.6f} (sd {ic.std():.4f})")
    return 0


def cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    net = io.load_model(args.model) if args.model else QNN.random(rng)
    if args.dataset:
        pairs = io.load_dataset(args.dataset).train
    else:
        pairs = [
            TrainingPair(haar_pure_state(net.topology[0], rng), haar_pure_state(net.topology[-1], rng))
            for _ in range(args.n)
        ]
    err = grad_check(net, pairs, args.step)
    print(f"max_abs_error {err:.3e} tol {args.tol:.1e}")
    return 0 if err <= args.tol else 1


def cmd_uncertainty(args) -> int:
    net = io.load_model(args.model)
    ds = io.load_dataset(args.dataset)
    cols = ["relation", "split", "pair", "perceptron", "x", "y", "component", "weight",
            "value_a", "value_b", "combined", "bound", "slack"]
    rows = []
    worst = np.inf
    for split, pairs in (("train", ds.train), ("validation", ds.validation)):
        for n, pair in enumerate(pairs[: args.max_pairs]):
            for r in uncertainty_stream(net, pair):
                rec = r.record
                rows.append(["robertson", split, n, r.perceptron + 1, r.x, r.y, r.component, rec.weight,
                             rec.delta_a, rec.delta_b, rec.product, rec.lower_bound, rec.slack])
                worst = min(worst, rec.slack)
            for r in entropic_stream(net, pair):
                rows.append(["entropic", split, n, r.perceptron + 1, r.x, r.y, r.component, r.weight,
                             r.entropy_a, r.entropy_b, r.entropy_a + r.entropy_b, r.bound, r.slack])
                worst = min(worst, r.slack)
    io.write_csv(args.out, cols, rows)
    print(f"wrote {len(rows)} records; minimum slack {worst:.3e}")
    return 0 if worst >= -1e-10 else 1


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "uncertainty": cmd_uncertainty,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, io.FileFormatError) as exc:
        print(f"dqnn {args.command}: {exc}", file=sys.stderr)
        return 2
    except (TrainingError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"dqnn {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
