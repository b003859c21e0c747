import math

import numpy as np
import pytest

from dqnn.linalg import haar_pure_state, ket
from dqnn.network import QNN, TrainingPair, cost
from dqnn.training import (
    Dataset,
    TrainingConfig,
    TrainingError,
    default_epsilon_grid,
    epsilon_line_search,
    evaluate_example_b,
    example_b_target,
    gen_example_a,
    gen_example_b,
    grad_check,
    interchange_costs,
    interchange_test,
    train,
)

from conftest import random_pairs

BELL = (ket("00") + ket("11")) / math.sqrt(2)


class TestExampleA:
    def test_pairs_follow_hidden_unitary(self):
        ds, v = gen_example_a(20, (5, 15), 3)
        assert len(ds.train) == 5 and len(ds.validation) == 15
        for p in ds.train + ds.validation:
            assert abs(abs(np.vdot(p.phi_desired, v @ p.psi_in)) - 1) < 1e-12
        np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-12)
        assert ds.kind == "example_a" and ds.seed == 3

    def test_deterministic(self):
        a, _ = gen_example_a(4, (2, 2), 11)
        b, _ = gen_example_a(4, (2, 2), 11)
        for p, q in zip(a.train + a.validation, b.train + b.validation):
            np.testing.assert_array_equal(p.psi_in, q.psi_in)
            np.testing.assert_array_equal(p.phi_desired, q.phi_desired)

    @pytest.mark.parametrize("split", [(5, 4), (0, 10), (11, -1)])
    def test_bad_split(self, split):
        with pytest.raises(ValueError):
            gen_example_a(10, split, 0)


class TestExampleB:
    def test_bell_input(self):
        # the middle amplitude is sqrt of a radicand that is zero up to roundoff
        np.testing.assert_allclose(example_b_target(BELL), BELL, atol=1e-7)

    def test_product_input(self):
        psi = np.kron(np.array([1, 1j]) / math.sqrt(2), np.array([0.6, 0.8]))
        expected = 0.5 * ket("01") + 0.5 * ket("10") + ket("11") / math.sqrt(2)
        np.testing.assert_allclose(example_b_target(psi), expected, atol=1e-12)

    def test_targets_normalized(self, rng):
        for _ in range(1000):
            phi = example_b_target(haar_pure_state(2, rng))
            assert abs(np.linalg.norm(phi) - 1) < 1e-12
            assert np.all(np.abs(phi.imag) == 0)

    def test_dataset(self):
        ds = gen_example_b(10, (7, 3), 0)
        assert len(ds.train) == 7 and ds.kind == "example_b" and ds.hidden_unitary is None


class TestLineSearch:
    def test_zero_direction_keeps_zero(self, rng, random_net):
        pairs = random_pairs(rng, 3)
        zero = [np.zeros_like(p) for p in random_net.perceptrons]
        eps, c = epsilon_line_search(random_net, zero, pairs, default_epsilon_grid())
        assert eps == 0.0
        assert c == cost(random_net, pairs)

    def test_picks_best_on_grid(self, rng, random_net):
        pairs = random_pairs(rng, 3)
        direction = [rng.normal(size=p.shape) for p in random_net.perceptrons]
        grid = np.array([0.0, 0.01, 0.1, 0.5])
        eps, c = epsilon_line_search(random_net, direction, pairs, grid)
        values = [cost(random_net.shifted(direction, e), pairs) for e in grid]
        assert c == pytest.approx(max(values), abs=1e-14)
        assert eps == grid[int(np.argmax(values))]

    def test_needs_zero(self, rng, random_net):
        with pytest.raises(ValueError):
            epsilon_line_search(random_net, random_net.perceptrons, random_pairs(rng, 1), [0.1, 0.2])


class TestConfig:
    def test_defaults(self):
        cfg = TrainingConfig()
        assert cfg.rounds == 200
        assert cfg.epsilon_grid[0] == 0.0 and len(cfg.epsilon_grid) == 51
        assert cfg.epsilon_grid[1] == pytest.approx(1e-3) and cfg.epsilon_grid[-1] == pytest.approx(2.0)

    @pytest.mark.parametrize(
        "kwargs",
        [{"rounds": 0}, {"epsilon_grid": [0.1, 0.2]}, {"epsilon_grid": [0.0]}, {"gradient_strategy": "sgd"},
         {"epsilon_grid": [0.0, np.nan]}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            TrainingConfig(**kwargs)


class TestTrain:
    def test_monotone_and_logged(self, rng):
        ds, _ = gen_example_a(6, (3, 3), rng)
        net = QNN.random(rng)
        start = cost(net, ds.train)
        out, logs = train(net, ds, TrainingConfig(rounds=15))
        assert len(logs) == 15
        costs = [start] + [l.cost_train for l in logs]
        assert all(b >= a for a, b in zip(costs, costs[1:]))
        assert logs[-1].cost_train == cost(out, ds.train)
        assert [l.round for l in logs] == list(range(1, 16))
        assert all(len(l.grad_norm_per_perceptron) == 4 for l in logs)
        assert all(math.isfinite(l.cost_validation) for l in logs)
        assert math.isnan(logs[0].robertson_min_bound)

    def test_single_pair_learns(self):
        rng = np.random.default_rng(1)
        ds, _ = gen_example_a(1, (1, 0), rng)
        net = QNN.random(rng)
        _, logs = train(net, ds, TrainingConfig(rounds=200))
        assert logs[-1].cost_train > 0.99
        assert math.isnan(logs[-1].cost_validation)

    def test_target_cost_stops_early(self):
        rng = np.random.default_rng(1)
        ds, _ = gen_example_a(1, (1, 0), rng)
        _, logs = train(QNN.random(rng), ds, TrainingConfig(rounds=200, target_cost=0.5))
        assert len(logs) < 200 and logs[-1].cost_train >= 0.5

    def test_probed_run(self, rng):
        ds, _ = gen_example_a(2, (2, 0), rng)
        _, logs = train(QNN.random(rng), ds, TrainingConfig(rounds=3, probe_uncertainty=True, probes=[(2, 3)]))
        assert all(l.robertson_min_bound >= 0 and l.robertson_mean_bound > 0 for l in logs)

    def test_paper_literal_strategy_runs(self, rng):
        ds, _ = gen_example_a(3, (3, 0), rng)
        net = QNN.random(rng)
        _, logs = train(net, ds, TrainingConfig(rounds=5, gradient_strategy="paper_literal"))
        assert logs[-1].cost_train >= cost(net, ds.train)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_raises(self, rng):
        ds, _ = gen_example_a(2, (2, 0), rng)
        p = [x.copy() for x in QNN.random(rng).perceptrons]
        p[1][0, 0] = np.inf
        with pytest.raises(TrainingError) as info:
            train(QNN((2, 2, 2), tuple(p)), ds, TrainingConfig(rounds=2))
        assert info.value.round == 1


class TestGradCheck:
    def test_identity_net(self, rng):
        assert grad_check(QNN.identity(), random_pairs(rng, 1)) < 1e-8

    def test_random_net(self, rng, random_net):
        assert grad_check(random_net, random_pairs(rng, 3)) < 1e-8

    def test_error_scales_with_step(self, rng):
        net = QNN.random(rng, (1, 1))
        pairs = random_pairs(rng, 2, 1, 1)
        small = grad_check(net, pairs, 1e-3)
        large = grad_check(net, pairs, 1e-2)
        # central differences: error ~ step**2
        assert 30 < large / small < 300

    def test_bad_step(self, rng, random_net):
        with pytest.raises(ValueError):
            grad_check(random_net, random_pairs(rng, 1), 0.0)


class TestEvaluation:
    def test_identity_net_bell_input(self):
        ds = Dataset([TrainingPair(BELL, example_b_target(BELL))], [], kind="example_b")
        (rec,) = evaluate_example_b(QNN.identity(), ds)
        np.testing.assert_allclose(rec.diffs, [0.5, 0.0, 0.0, -0.5], atol=1e-12)

    def test_rows_sum_to_zero(self, random_net):
        ds = gen_example_b(5, (3, 2), 0)
        recs = evaluate_example_b(random_net, ds)
        assert [r.split for r in recs] == ["train"] * 3 + ["validation"] * 2
        assert all(abs(sum(r.diffs)) < 1e-12 for r in recs)

    def test_interchange_symmetric_pairs(self, rng, random_net):
        psi = haar_pure_state(2, rng)
        ds = Dataset([TrainingPair(psi, psi)], [])
        assert interchange_test(random_net, ds) == pytest.approx(cost(random_net, ds.train), abs=1e-15)

    def test_interchange_swaps_roles(self, rng, random_net):
        pairs = random_pairs(rng, 3)
        swapped = [TrainingPair(p.phi_desired, p.psi_in) for p in pairs]
        ds = Dataset(pairs[:2], pairs[2:])
        assert interchange_test(random_net, ds) == pytest.approx(cost(random_net, swapped), abs=1e-15)
        np.testing.assert_allclose(interchange_costs(random_net, pairs), [cost(random_net, [q]) for q in swapped])
