import numpy as np
import pytest
from scipy.optimize import minimize

from mdsearch.divergences import BregmanSpec, bregman
from mdsearch.oracles import amd_step_oracle, mirror_step_oracle
from mdsearch.simplex import (
    AmdSchedule,
    DegenerateUpdateError,
    SolverError,
    amd_minimize,
    amd_mix,
    amd_step,
    check_simplex,
    generic_md_step,
    md_minimize,
    md_step_kl,
    project_simplex,
    prox_perturbed_kl,
)


def slsqp_mirror_step(spec, q_prev, j, eta):
    """Independent sanity oracle: a general constrained minimizer."""
    m = len(q_prev)

    def f(q):
        return float(j @ q) + eta * bregman(spec, np.maximum(q, 0.0), q_prev)

    res = minimize(f, np.full(m, 1.0 / m), method="SLSQP", bounds=[(0.0, 1.0)] * m,
                   constraints=[{"type": "eq", "fun": lambda q: q.sum() - 1.0}],
                   options={"ftol": 1e-14, "maxiter": 500})
    return res.x


class TestSchedule:
    def test_lambda(self):
        assert AmdSchedule(r=3, k=1).lam == 1.0
        assert AmdSchedule(r=3, k=4).lam == 0.5
        assert AmdSchedule(r=5).at(6).lam == 0.5

    @pytest.mark.parametrize("kw", [{"r": 2.5}, {"gamma": 0.0}, {"s": -1.0}, {"k": 0}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            AmdSchedule(**kw)


class TestCheckSimplex:
    def test_accepts_within_tolerance(self):
        check_simplex([0.5, 0.5 + 5e-10])

    @pytest.mark.parametrize("q", [[0.5, 0.6], [1.1, -0.1], [np.nan, 1.0], []])
    def test_rejects(self, q):
        with pytest.raises(ValueError):
            check_simplex(q)


class TestProjectSimplex:
    def test_known_projection(self):
        np.testing.assert_allclose(project_simplex([0.5, 0.5]), [0.5, 0.5])
        np.testing.assert_allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])
        np.testing.assert_allclose(project_simplex([0.6, 0.6]), [0.5, 0.5])

    def test_matches_qp(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.normal(size=6)
            res = minimize(lambda x: 0.5 * np.sum((x - v) ** 2), np.full(6, 1 / 6), method="SLSQP",
                           bounds=[(0, 1)] * 6, constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1}],
                           options={"ftol": 1e-14})
            np.testing.assert_allclose(project_simplex(v), res.x, atol=1e-6)


class TestMdStepKl:
    def test_constant_costs(self):
        np.testing.assert_allclose(md_step_kl([0.5, 0.5], [4.2, 4.2], 1.0), [0.5, 0.5])

    def test_worked_example(self):
        np.testing.assert_allclose(md_step_kl([0.5, 0.5], [0.0, np.log(4.0)], 1.0), [0.8, 0.2], rtol=1e-15)

    def test_single_atom(self):
        assert md_step_kl([1.0], [7.3], 2.0).tolist() == [1.0]

    def test_huge_costs_do_not_underflow(self):
        q = md_step_kl(np.full(3, 1 / 3), [3e10, 3e10 + 5.0, 3.1e10], 10.0)
        np.testing.assert_allclose(q.sum(), 1.0)
        assert q[0] > q[1] > q[2] >= 0

    def test_degenerate(self):
        with pytest.raises(DegenerateUpdateError):
            md_step_kl([0.0, 0.0, 1.0 + 0.0], [0.0, 0.0, 1e308], 1e-300)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            md_step_kl([0.5, 0.5], [0.0], 1.0)
        with pytest.raises(ValueError):
            md_step_kl([0.5, 0.5], [0.0, np.inf], 1.0)
        with pytest.raises(ValueError):
            md_step_kl([0.5, 0.5], [0.0, 1.0], 0.0)

    def test_matches_oracles(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            m = int(rng.integers(2, 8))
            q, j, eta = rng.dirichlet(np.ones(m)), rng.normal(size=m), rng.uniform(0.3, 3)
            np.testing.assert_allclose(md_step_kl(q, j, eta), mirror_step_oracle("kl", q, j, eta), atol=1e-12)
            np.testing.assert_allclose(md_step_kl(q, j, eta), slsqp_mirror_step(BregmanSpec.kl(), q, j, eta),
                                       atol=1e-5)


class TestProxPerturbedKl:
    def test_constant_costs_keep_anchor(self):
        np.testing.assert_allclose(prox_perturbed_kl(np.full(4, 0.25), [2.0] * 4, 3.0, 1.0), np.full(4, 0.25))
        q = np.array([0.1, 0.2, 0.7])
        np.testing.assert_allclose(prox_perturbed_kl(q, [5.0] * 3, 0.5, 0.2), q, atol=1e-15)

    def test_single_atom(self):
        assert prox_perturbed_kl([1.0], [3.0], 1.0, 1.0).tolist() == [1.0]

    def test_worked_example_matches_generic_solver(self):
        q = np.full(4, 0.25)
        j = np.array([0.0, 1.0, 2.0, 3.0])
        got = prox_perturbed_kl(q, j, 1.0, 1.0)
        ref = generic_md_step(BregmanSpec.perturbed_kl(1.0), q, j, 1.0, tol=1e-12)
        np.testing.assert_allclose(got, ref, atol=1e-6)
        np.testing.assert_allclose(got, [1.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_kkt_form(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            m = int(rng.integers(2, 10))
            a, j = rng.dirichlet(np.ones(m)), rng.normal(0, 2, m)
            step, eps = rng.uniform(0.1, 3), rng.uniform(0.05, 2)
            x = prox_perturbed_kl(a, j, step, eps)
            y = (a + eps) * np.exp(-step * j / eps)
            support = x > 0
            # one scale c for the whole support: x_i + eps = c * y_i
            c = (x[support] + eps) / y[support]
            np.testing.assert_allclose(c, c[0], rtol=1e-10)
            assert np.all(c[0] * y[~support] <= eps * (1 + 1e-10))

    def test_extreme_costs(self):
        x = prox_perturbed_kl(np.full(5, 0.2), [0, 1e10, 2e10, 3e10, 4e10], 0.1, 1.0)
        np.testing.assert_allclose(x, [1, 0, 0, 0, 0])

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            prox_perturbed_kl([0.5, 0.5], [0, 1], 0.0, 1.0)
        with pytest.raises(ValueError):
            prox_perturbed_kl([0.5, 0.5], [0, 1], 1.0, 0.0)


class TestAmdMixAndStep:
    def test_mix_first_update_returns_z(self):
        qz, qx = np.array([0.2, 0.8]), np.array([0.9, 0.1])
        assert amd_mix(qz, qx, AmdSchedule(r=7, k=1)).tolist() == qz.tolist()

    def test_mix_half(self):
        np.testing.assert_allclose(amd_mix([1.0, 0.0], [0.0, 1.0], AmdSchedule(r=3, k=4)), [0.5, 0.5])

    def test_mix_fixed_point(self):
        q = np.array([0.3, 0.3, 0.4])
        np.testing.assert_allclose(amd_mix(q, q, AmdSchedule(k=9)), q)

    def test_step_first_update_keeps_z(self):
        qz = np.array([0.1, 0.9])
        new_z, _ = amd_step(qz, qz, [1.0, 0.0], AmdSchedule(k=1), 1.0)
        assert new_z.tolist() == qz.tolist()

    def test_step_constant_costs(self):
        qz, qm = np.array([0.1, 0.6, 0.3]), np.array([0.4, 0.4, 0.2])
        z, x = amd_step(qz, qm, [2.0] * 3, AmdSchedule(k=5), 1.0)
        np.testing.assert_allclose(z, qz)
        np.testing.assert_allclose(x, qm, atol=1e-15)

    def test_step_matches_oracle_m5(self):
        rng = np.random.default_rng(4)
        qz, qm, j = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5)), rng.normal(size=5)
        for k in (1, 2, 10):
            got = amd_step(qz, qm, j, AmdSchedule(3, 1.0, 0.1, k), 0.5)
            ref = amd_step_oracle(qz, qm, j, k=k, r=3, gamma=1.0, s=0.1, epsilon=0.5)
            for a, b in zip(got, ref):
                np.testing.assert_allclose(a, b, atol=1e-6)


class TestGenericMdStep:
    def test_kl_delegates(self):
        q, j = np.array([0.2, 0.3, 0.5]), np.array([1.0, -1.0, 0.5])
        assert generic_md_step(BregmanSpec.kl(), q, j, 2.0).tolist() == md_step_kl(q, j, 2.0).tolist()

    def test_euclidean_example(self):
        # stationarity: q = P(q_prev - j / eta) for the Euclidean generator
        got = generic_md_step(BregmanSpec.euclidean(), [0.5, 0.5], [0.0, 1.0], 1.0)
        np.testing.assert_allclose(got, project_simplex(np.array([0.5, 0.5]) - np.array([0.0, 1.0])), atol=1e-8)
        np.testing.assert_allclose(got, [1.0, 0.0], atol=1e-8)
        got = generic_md_step(BregmanSpec.euclidean(), [0.5, 0.5], [0.0, 0.5], 2.0)
        np.testing.assert_allclose(got, [0.625, 0.375], atol=1e-8)

    @pytest.mark.parametrize("spec", [BregmanSpec.euclidean(), BregmanSpec.perturbed_kl(0.3),
                                      BregmanSpec.alpha_family(0.4)], ids=lambda s: s.kind)
    def test_constant_costs_return_anchor(self, spec):
        q = np.array([0.1, 0.2, 0.7])
        np.testing.assert_allclose(generic_md_step(spec, q, [1.0] * 3, 1.5), q, atol=1e-8)

    def test_matches_slsqp_alpha(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            q, j = rng.dirichlet(np.ones(4)), rng.normal(size=4)
            spec = BregmanSpec.alpha_family(rng.uniform(-0.8, 0.8))
            np.testing.assert_allclose(generic_md_step(spec, q, j, 1.0), slsqp_mirror_step(spec, q, j, 1.0),
                                       atol=1e-5)

    def test_iteration_cap_raises_solver_error(self):
        with pytest.raises(SolverError) as info:
            generic_md_step(BregmanSpec.alpha_family(0.3), [0.2, 0.3, 0.5], [1.0, -2.0, 0.5], 5.0,
                            tol=1e-30, max_iter=3)
        assert info.value.residual is not None


class TestMinimizers:
    def test_md_minimize_shape_and_descent(self):
        A = np.diag([1.0, 2.0, 3.0])
        xs = md_minimize(lambda x: 2 * A @ x, np.full(3, 1 / 3), 0.1, 50)
        assert xs.shape == (51, 3)
        f = np.einsum("ki,ij,kj->k", xs, A, xs)
        assert f[-1] < f[0]

    def test_amd_minimize_shapes(self):
        out = amd_minimize(lambda x: x, np.full(4, 0.25), AmdSchedule(), 1.0, 10)
        assert {k: v.shape for k, v in out.items()} == {"z": (11, 4), "x": (11, 4), "mixed": (11, 4)}
