import numpy as np
import pytest

from mdsearch.oracles import pi2_update_loops
from mdsearch.pi2 import (
    Pi2Config,
    Pi2RolloutEval,
    pi2_run,
    pi2_update,
    projection_matrix,
    softmin_weights,
    time_weights,
)
from mdsearch.tasks import PointViaTask


class TestProjection:
    def test_identity_metric(self):
        np.testing.assert_allclose(projection_matrix([1.0, 0.0]), [[1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_allclose(projection_matrix([1.0, 1.0]), np.full((2, 2), 0.5))

    def test_weighted_metric(self):
        # R^-1 g = [1, 0.5], g' R^-1 g = 1.5
        expected = np.array([[1.0, 1.0], [0.5, 0.5]]) / 1.5
        np.testing.assert_allclose(projection_matrix([1.0, 1.0], np.diag([1.0, 2.0])), expected, rtol=1e-15)

    def test_idempotent_and_fixes_direction(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(5, 5))
        R = A @ A.T + np.eye(5)
        g = rng.uniform(0.1, 1, 5)
        M = projection_matrix(g, R)
        np.testing.assert_allclose(M @ M, M, atol=1e-13)
        Rg = np.linalg.solve(R, g)
        np.testing.assert_allclose(M @ Rg, Rg, rtol=1e-12)
        assert np.linalg.matrix_rank(M) == 1

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            projection_matrix([0.0, 0.0])


class TestSoftmin:
    def test_worked_example(self):
        lam = 3.0
        np.testing.assert_allclose(softmin_weights([0.0, lam * np.log(4.0)], lam), [0.8, 0.2], rtol=1e-15)

    def test_equal_costs_uniform(self):
        np.testing.assert_allclose(softmin_weights(np.full(5, 7.0), 1.0), np.full(5, 0.2))

    def test_shift_invariance_for_huge_costs(self):
        S = np.array([1e10, 1e10 + 2.0, 1e10 + 5.0])
        np.testing.assert_allclose(softmin_weights(S, 2.0), softmin_weights(S - 1e10, 2.0), rtol=1e-12)

    def test_rows_independent(self):
        S = np.array([[0.0, 1.0], [5.0, 5.0]])
        P = softmin_weights(S, 1.0)
        np.testing.assert_allclose(P[1], [0.5, 0.5])
        np.testing.assert_allclose(P.sum(axis=1), 1.0)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            softmin_weights([0.0, 1.0], 0.0)
        with pytest.raises(ValueError):
            softmin_weights([0.0, np.nan], 1.0)


class TestTimeWeights:
    def test_values(self):
        np.testing.assert_allclose(time_weights(3), [0.5, 1 / 3, 1 / 6])
        np.testing.assert_allclose(time_weights(250).sum(), 1.0)


class TestUpdate:
    @pytest.mark.parametrize("with_R", [False, True])
    def test_matches_loops(self, with_R):
        rng = np.random.default_rng(1)
        m, T, D, B = 4, 7, 2, 3
        basis = rng.uniform(0.05, 1.0, (T, B))
        eps = rng.normal(size=(m, T, D, B))
        P = softmin_weights(rng.normal(size=(T, m)), 1.0)
        theta = rng.normal(size=(D, B))
        R = np.diag([1.0, 2.0, 0.5]) if with_R else None
        got = pi2_update(theta, Pi2RolloutEval(np.zeros((T, m)), P, eps), basis, R)
        np.testing.assert_allclose(got, pi2_update_loops(theta, eps, P, basis, R), rtol=1e-12, atol=1e-14)

    def test_zero_noise_keeps_theta(self):
        theta = np.ones((1, 3))
        P = np.full((4, 2), 0.5)
        got = pi2_update(theta, Pi2RolloutEval(np.zeros((4, 2)), P, np.zeros((2, 4, 1, 3))), np.ones((4, 3)))
        np.testing.assert_array_equal(got, theta)

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            pi2_update(np.zeros((1, 3)), Pi2RolloutEval(None, np.full((4, 2), 0.5), np.zeros((2, 5, 1, 3))),
                       np.ones((4, 3)))


class TestConfig:
    @pytest.mark.parametrize("kw", [{"temperature": 0.0}, {"m": 0}, {"explore": -1.0},
                                    {"R": np.array([[1.0, 2.0], [0.0, 1.0]])}, {"R": -np.eye(2)}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            Pi2Config(**kw)


class TestRun:
    def test_zero_exploration_is_flat(self):
        task = PointViaTask()
        res = pi2_run(task, Pi2Config(n_updates=5, explore=0.0), seed=0)
        np.testing.assert_array_equal(res.curve, task(task.initial_theta()))
        np.testing.assert_array_equal(res.theta, 0.0)

    def test_deterministic_across_workers(self):
        task = PointViaTask()
        cfg = Pi2Config(n_updates=3, m=4)
        a = pi2_run(task, cfg, seed=2)
        b = pi2_run(task, cfg, seed=2, workers=2)
        np.testing.assert_array_equal(a.costs, b.costs)
        np.testing.assert_array_equal(a.theta, b.theta)
        assert a.thetas.shape == (4, 40)

    def test_improves_point_task(self):
        task = PointViaTask()
        res = pi2_run(task, Pi2Config(n_updates=30, explore=20.0), seed=0)
        assert res.curve[-1] < res.curve[0]

    def test_per_step_noise_runs(self):
        task = PointViaTask()
        res = pi2_run(task, Pi2Config(n_updates=2, m=3, noise_per_step=True), seed=0)
        assert res.costs.shape == (2, 3) and np.all(np.isfinite(res.costs))
