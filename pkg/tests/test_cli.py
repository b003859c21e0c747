import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from dqnn import io
from dqnn.cli import main
from dqnn.network import QNN
from dqnn.training import gen_example_a, gen_example_b


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestModelFiles:
    def test_round_trip_bit_exact(self, tmp_path, random_net):
        path = tmp_path / "m.json"
        io.save_model(random_net, path, rng_seed=5, rounds_completed=12)
        mf = io.read_model(path)
        assert mf.rng_seed == 5 and mf.rounds_completed == 12
        assert mf.net.topology == random_net.topology
        for a, b in zip(mf.net.perceptrons, random_net.perceptrons):
            np.testing.assert_array_equal(a, b)

    def test_truncated(self, tmp_path, random_net):
        path = tmp_path / "m.json"
        io.save_model(random_net, path)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(io.FileFormatError):
            io.load_model(path)

    def test_version(self, tmp_path, random_net):
        path = tmp_path / "m.json"
        io.save_model(random_net, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(io.FileFormatError, match="format_version"):
            io.load_model(path)

    def test_wrong_shapes(self, tmp_path, random_net):
        path = tmp_path / "m.json"
        io.save_model(random_net, path)
        doc = json.loads(path.read_text())
        doc["perceptrons"] = doc["perceptrons"][:3]
        path.write_text(json.dumps(doc))
        with pytest.raises(io.FileFormatError):
            io.load_model(path)


class TestDatasetFiles:
    def test_round_trip(self, tmp_path):
        ds, v = gen_example_a(5, (2, 3), 4)
        path = tmp_path / "d.json"
        io.save_dataset(ds, path)
        back = io.load_dataset(path)
        assert back.kind == "example_a" and back.seed == 4
        np.testing.assert_array_equal(back.hidden_unitary, v)
        for p, q in zip(ds.train + ds.validation, back.train + back.validation):
            np.testing.assert_array_equal(p.psi_in, q.psi_in)
            np.testing.assert_array_equal(p.phi_desired, q.phi_desired)

    def test_example_b_round_trip(self, tmp_path):
        ds = gen_example_b(3, (3, 0), 1)
        path = tmp_path / "d.json"
        io.save_dataset(ds, path)
        back = io.load_dataset(path)
        assert back.hidden_unitary is None and back.validation == []

    def test_unnormalized_state_rejected(self, tmp_path):
        ds = gen_example_b(1, (1, 0), 1)
        path = tmp_path / "d.json"
        io.save_dataset(ds, path)
        doc = json.loads(path.read_text())
        doc["train"][0]["psi_in"][0][0] += 0.5
        path.write_text(json.dumps(doc))
        with pytest.raises(io.FileFormatError):
            io.load_dataset(path)


class TestRunConfig:
    def test_load(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "kind": "example-b", "n_pairs": 10, "split": [7, 3], "rounds": 5,
            "epsilon_grid": [0.0, 0.1, 0.5], "seed": 2, "output": {"model": "x.json", "log": "x.csv"},
        }))
        cfg = io.load_run_config(path)
        cfg.validate()
        assert cfg.kind == "example_b" and cfg.split == (7, 3) and cfg.model == "x.json"
        np.testing.assert_array_equal(cfg.training_config().epsilon_grid, [0.0, 0.1, 0.5])

    def test_unknown_field(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"learning_rate": 0.1}))
        with pytest.raises(io.FileFormatError, match="unknown"):
            io.load_run_config(path)

    @pytest.mark.parametrize("bad", [{"rounds": 0}, {"split": [3, 3]}, {"seed": -1}, {"epsilon_grid": [0.5]}])
    def test_invalid(self, bad):
        cfg = io.RunConfig(**{**{"n_pairs": 10, "split": (5, 5)}, **bad})
        with pytest.raises(io.FileFormatError):
            cfg.validate()


class TestCommands:
    def test_rounds_zero_is_usage_error(self, tmp_path, capsys):
        code = main(["train", "--rounds", "0", "--out", str(tmp_path / "m.json"), "--log", str(tmp_path / "l.csv")])
        assert code == 2
        assert "rounds" in capsys.readouterr().err

    def test_bad_model_file(self, tmp_path):
        bad = tmp_path / "m.json"
        bad.write_text("{")
        code = main(["gradcheck", "--model", str(bad)])
        assert code == 2

    def test_gradcheck(self, capsys):
        assert main(["gradcheck", "--seed", "3", "--n", "2"]) == 0
        assert "max_abs_error" in capsys.readouterr().out

    def test_gradcheck_failure_exit(self):
        # step far too large for the tolerance
        assert main(["gradcheck", "--seed", "3", "--n", "1", "--step", "0.5", "--tol", "1e-9"]) == 1

    def test_pipeline(self, tmp_path):
        d, m, log = tmp_path / "d.json", tmp_path / "m.json", tmp_path / "l.csv"
        assert main(["gen", "--kind", "example-b", "--n", "6", "--split", "4,2", "--seed", "1", "--out", str(d)]) == 0
        assert main(["train", "--dataset", str(d), "--rounds", "3", "--seed", "1", "--out", str(m), "--log", str(log)]) == 0
        rows = read_csv(log)
        assert rows[0] == io.round_log_columns(4)
        assert rows[0][:4] == ["round", "epsilon_star", "cost_train", "cost_validation"]
        assert [r[0] for r in rows[1:]] == ["1", "2", "3"]
        assert io.read_model(m).rounds_completed == 3

        ev = tmp_path / "e.csv"
        assert main(["eval", "--model", str(m), "--dataset", str(d), "--out", str(ev)]) == 0
        rows = read_csv(ev)
        assert rows[0] == ["split", "index", "cost", "interchange_cost", "diff_00", "diff_01", "diff_10", "diff_11"]
        assert [r[0] for r in rows[1:]] == ["train"] * 4 + ["validation"] * 2
        assert all(abs(sum(float(v) for v in r[4:])) < 1e-12 for r in rows[1:])

        un = tmp_path / "u.csv"
        assert main(["uncertainty", "--model", str(m), "--dataset", str(d), "--out", str(un), "--max-pairs", "1"]) == 0
        rows = read_csv(un)
        assert rows[0] == ["relation", "split", "pair", "perceptron", "x", "y", "component", "weight",
                           "value_a", "value_b", "combined", "bound", "slack"]
        relations = {r[0] for r in rows[1:]}
        assert relations == {"robertson", "entropic"}
        assert min(float(r[-1]) for r in rows[1:]) >= -1e-10

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        m, log = tmp_path / "m.json", tmp_path / "l.csv"
        cfg.write_text(json.dumps({"n_pairs": 3, "split": [2, 1], "rounds": 2, "seed": 4,
                                   "output": {"model": str(m), "log": str(log)}}))
        assert main(["train", "--config", str(cfg)]) == 0
        assert len(read_csv(log)) == 3

    def test_missing_dataset(self, tmp_path):
        assert main(["eval", "--model", str(tmp_path / "no.json"), "--dataset", "x", "--out", "y"]) == 2


def _train_subprocess(tmp_path, tag, env_extra):
    env = {**os.environ, **env_extra}
    m, log = tmp_path / f"m_{tag}.json", tmp_path / f"l_{tag}.csv"
    cmd = [sys.executable, "-m", "dqnn", "train", "--seed", "42", "--n", "4", "--split", "2,2",
           "--rounds", "4", "--out", str(m), "--log", str(log)]
    subprocess.run(cmd, check=True, env=env, capture_output=True)
    return m.read_bytes(), log.read_bytes()


def test_rerun_is_byte_identical(tmp_path):
    a = _train_subprocess(tmp_path, "a", {"OMP_NUM_THREADS": "1", "OPENBLAS_NUM_THREADS": "1"})
    b = _train_subprocess(tmp_path, "b", {"OMP_NUM_THREADS": "4", "OPENBLAS_NUM_THREADS": "4"})
    assert a == b
