"""Quick oracle checks of the numerical kernels, runnable from an installed package."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from . import oracles
from .divergences import BregmanSpec, alpha_limit_check
from .pi2 import Pi2RolloutEval, pi2_update, softmin_weights
from .search import MarkovChain, dp_exponentiated_update
from .simplex import AmdSchedule, amd_step, generic_md_step, md_step_kl, prox_perturbed_kl


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _mirror_steps(rng: np.random.Generator, n: int = 20) -> float:
    worst = 0.0
    for _ in range(n):
        m = int(rng.integers(2, 11))
        q = rng.dirichlet(np.ones(m))
        j = rng.normal(0.0, 3.0, m)
        eta = 10 ** rng.uniform(-1, 1)
        eps = 10 ** rng.uniform(-2, 1)
        alpha = rng.uniform(-0.9, 0.9)
        pairs = [
            (md_step_kl(q, j, eta), oracles.mirror_step_oracle("kl", q, j, eta)),
            (prox_perturbed_kl(q, j, 1.0 / eta, eps), oracles.mirror_step_oracle("perturbed_kl", q, j, eta, epsilon=eps)),
            (generic_md_step(BregmanSpec.alpha_family(alpha), q, j, eta),
             oracles.mirror_step_oracle("alpha", q, j, eta, alpha=alpha)),
        ]
        worst = max(worst, *(float(np.max(np.abs(a - b))) for a, b in pairs))
    return worst


def _amd_steps(rng: np.random.Generator, n: int = 10) -> float:
    worst = 0.0
    for _ in range(n):
        m = int(rng.integers(2, 11))
        qz, qm = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        j = rng.normal(0.0, 3.0, m)
        k = int(rng.integers(1, 20))
        sched = AmdSchedule(3.0, 1.0, 0.1, k)
        got = amd_step(qz, qm, j, sched, 1.0)
        ref = oracles.amd_step_oracle(qz, qm, j, k=k, r=3.0, gamma=1.0, s=0.1, epsilon=1.0)
        worst = max(worst, *(float(np.max(np.abs(a - b))) for a, b in zip(got, ref)))
    return worst


def _dp(rng: np.random.Generator, n: int = 10) -> float:
    worst = 0.0
    for _ in range(n):
        S, T = int(rng.integers(2, 5)), int(rng.integers(1, 5))
        chain = MarkovChain(rng.dirichlet(np.ones(S)), rng.dirichlet(np.ones(S), size=(T, S)))
        F = rng.normal(0.0, 1.0, (T + 1, S))
        new = dp_exponentiated_update(chain, F, 0.7)
        ref = oracles.path_space_update(chain.initial, chain.transitions, F, 0.7)
        got = oracles.path_distribution(new.initial, new.transitions)
        worst = max(worst, max(abs(got[h] - ref[h]) for h in ref))
    return worst


def _softmin(rng: np.random.Generator, n: int = 100) -> float:
    worst = 0.0
    for _ in range(n):
        m = int(rng.integers(1, 20))
        S = rng.normal(0.0, 10.0, m)
        lam = 10 ** rng.uniform(-1, 2)
        worst = max(worst, float(np.max(np.abs(softmin_weights(S, lam) - md_step_kl(np.full(m, 1 / m), S, lam)))))
    return worst


def _alpha_limits(rng: np.random.Generator, n: int = 20) -> float:
    worst = 0.0
    for _ in range(n):
        m = int(rng.integers(2, 8))
        p = rng.uniform(0.1, 1.0, m)
        q = rng.uniform(0.1, 1.0, m)
        p, q = p / p.sum(), q / q.sum()
        for a in (1 - 1e-4, -(1 - 1e-4)):
            got, ref = alpha_limit_check(p, q, a)
            worst = max(worst, abs(got - ref))
    return worst


def _pi2(rng: np.random.Generator) -> float:
    m, T, D, B = 3, 4, 2, 5
    basis = rng.uniform(0.01, 1.0, (T, B))
    eps = rng.normal(size=(m, T, D, B))
    P = softmin_weights(rng.normal(size=(T, m)), 1.0)
    theta = rng.normal(size=(D, B))
    R = np.diag(rng.uniform(0.5, 2.0, B))
    got = pi2_update(theta, Pi2RolloutEval(np.zeros((T, m)), P, eps), basis, R)
    return float(np.max(np.abs(got - oracles.pi2_update_loops(theta, eps, P, basis, R))))


CHECKS: list[tuple[str, Callable[[np.random.Generator], float], float]] = [
    ("mirror steps vs nested root finding", _mirror_steps, 1e-6),
    ("accelerated step vs variational oracle", _amd_steps, 1e-6),
    ("chain recursion vs path enumeration", _dp, 1e-8),
    ("softmin vs exponentiated gradient", _softmin, 1e-12),
    ("alpha family near +/-1 vs KL", _alpha_limits, 1e-3),
    ("PI2 update vs explicit loops", _pi2, 1e-12),
]


def run_selftest(seed: int = 0) -> list[CheckResult]:
    results = []
    for i, (name, check, tol) in enumerate(CHECKS):
        err = check(np.random.default_rng([seed, i]))
        results.append(CheckResult(name, err <= tol, f"max error {err:.2e} (tolerance {tol:.0e})"))
    return results
