"""Policy Improvement with Path Integrals (PI2), without cost normalization or annealing.

Per update, ``m`` noisy rollouts of ``theta + eps_i`` are scored with the
cost-to-go ``S(tau_{t,i})`` at every time step, turned into per-step softmin
probabilities, and the basis-projected noise is averaged with those
probabilities and then across time with weights ``T - t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from .search import substream
from .tasks import ViaPointTask

__all__ = [
    "Pi2Config",
    "Pi2RolloutEval",
    "Pi2Result",
    "projection_matrix",
    "softmin_weights",
    "time_weights",
    "pi2_update",
    "pi2_run",
]


@dataclass(frozen=True)
class Pi2Config:
    """Settings of a PI2 run.

    ``R`` is the control-cost matrix over one dimension's basis weights
    (``None`` means identity); ``explore`` the exploration standard deviation
    per parameter.  With ``noise_per_step`` the exploration noise is redrawn
    every time step instead of held for the whole episode.
    """

    temperature: float = 10.0
    m: int = 10
    n_updates: int = 100
    explore: float = 1.0
    R: np.ndarray | None = None
    noise_per_step: bool = False

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.m < 1 or self.n_updates < 1:
            raise ValueError("m and n_updates must be >= 1")
        if not self.explore >= 0:
            raise ValueError("explore must be nonnegative")
        if self.R is not None:
            R = np.asarray(self.R, dtype=np.float64)
            if R.ndim != 2 or R.shape[0] != R.shape[1] or not np.allclose(R, R.T):
                raise ValueError("R must be a symmetric square matrix")
            if np.linalg.eigvalsh(R).min() <= 0:
                raise ValueError("R must be positive definite")


@dataclass
class Pi2RolloutEval:
    """Scores of one batch of rollouts.

    ``S`` and ``P`` have shape ``(T, m)``; ``eps`` has shape
    ``(m, T, n_dims, n_basis)`` (a broadcast view when the noise is held for
    the episode).
    """

    S: np.ndarray
    P: np.ndarray
    eps: np.ndarray


@dataclass
class Pi2Result:
    theta: np.ndarray
    costs: np.ndarray
    thetas: np.ndarray

    @property
    def curve(self) -> np.ndarray:
        return self.costs.mean(axis=1)


def projection_matrix(g, R=None) -> np.ndarray:
    """``M = R^-1 g g' / (g' R^-1 g)``, the R-metric projector onto ``g``."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 1 or not np.any(g):
        raise ValueError("activation vector must be a nonzero vector")
    if R is None:
        rg = g
    else:
        try:
            rg = np.linalg.solve(np.asarray(R, dtype=np.float64), g)
        except np.linalg.LinAlgError as exc:
            raise ValueError("R is singular") from exc
    return np.outer(rg, g) / float(g @ rg)


def softmin_weights(S, temperature: float) -> np.ndarray:
    """``P_i = exp(-S_i / temperature) / Z``, shifted by ``min S`` first."""
    S = np.asarray(S, dtype=np.float64)
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    if not np.all(np.isfinite(S)):
        raise ValueError("costs must be finite")
    return softmax(-(S - S.min(axis=-1, keepdims=True)) / temperature, axis=-1)


def time_weights(T: int) -> np.ndarray:
    """Normalized aggregation weights ``(T - t) / sum_j (T - j)`` for ``t = 0..T-1``."""
    w = np.arange(T, 0, -1, dtype=np.float64)
    return w / w.sum()


def _projected_noise(basis: np.ndarray, eps: np.ndarray, R) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients ``a[t, i, d]`` with ``M_t eps_{t,i,d} = a[t, i, d] * R^-1 g_t``.

    Returns ``(a, Rg, gRg)`` where ``Rg[t] = R^-1 g_t`` and ``gRg[t] = g_t' R^-1 g_t``.
    """
    Rg = basis if R is None else np.linalg.solve(R, basis.T).T
    gRg = np.einsum("tb,tb->t", basis, Rg)
    a = np.einsum("tb,itdb->tid", basis, eps) / gRg[:, None, None]
    return a, Rg, gRg


def pi2_update(theta_prev, rollouts: Pi2RolloutEval, basis, R=None) -> np.ndarray:
    """Apply one PI2 parameter update.

    ``delta_t = sum_i P[t, i] M_t eps_{t,i}`` per output dimension, then
    ``delta = sum_t (T - t) delta_t / sum_t (T - t)``.  ``M_t`` is rank one,
    so it is applied as ``R^-1 g_t (g_t' eps) / (g_t' R^-1 g_t)``.
    """
    basis = np.asarray(basis, dtype=np.float64)
    T, B = basis.shape
    theta_prev = np.asarray(theta_prev, dtype=np.float64)
    eps = np.asarray(rollouts.eps, dtype=np.float64)
    P = np.asarray(rollouts.P, dtype=np.float64)
    if eps.ndim != 4 or eps.shape[1] != T or eps.shape[3] != B:
        raise ValueError(f"eps must have shape (m, {T}, n_dims, {B}), got {eps.shape}")
    if P.shape != (T, eps.shape[0]):
        raise ValueError(f"P must have shape ({T}, {eps.shape[0]}), got {P.shape}")
    if theta_prev.shape != (eps.shape[2], B):
        raise ValueError(f"theta_prev must have shape ({eps.shape[2]}, {B}), got {theta_prev.shape}")
    a, Rg, _ = _projected_noise(basis, eps, None if R is None else np.asarray(R, dtype=np.float64))
    # delta[d] = sum_t w_t * (sum_i P[t,i] a[t,i,d]) * Rg[t]
    coef = time_weights(T)[:, None] * np.einsum("ti,tid->td", P, a)
    return theta_prev + coef.T @ Rg


def _explore_noise(cfg: Pi2Config, rng: np.random.Generator, T: int, D: int, B: int) -> np.ndarray:
    if cfg.noise_per_step:
        return cfg.explore * rng.standard_normal((T, D, B))
    return np.broadcast_to(cfg.explore * rng.standard_normal((D, B)), (T, D, B))


def pi2_run(task: ViaPointTask, cfg: Pi2Config, seed: int, *, theta0=None, workers: int = 1) -> Pi2Result:
    """Run PI2 on a via-point task.

    The cost-to-go of rollout ``i`` from step ``t`` is

        S(tau_{t,i}) = phi + sum_{j >= t} [ q_{j,i} + 0.5 sum_d c_d (theta_d + M_j eps_{j,i,d})' R (theta_d + M_j eps_{j,i,d}) ]

    with ``q`` the task's state costs (via penalty included), ``phi = 0`` and
    ``c_d`` the task's control scales.  The learning curve records the task
    cost of every rollout.
    """
    policy = task.policy
    T, D, B = policy.n_steps, policy.n_dims, policy.n_basis
    basis = policy.basis
    R = None if cfg.R is None else np.asarray(cfg.R, dtype=np.float64)
    scale = task.control_scale()
    theta = policy.shape_theta(task.initial_theta() if theta0 is None else theta0).copy()
    all_costs, thetas = [], [theta.ravel().copy()]

    for k in range(1, cfg.n_updates + 1):
        eps = np.stack([_explore_noise(cfg, substream(seed, k, i), T, D, B) for i in range(cfg.m)])
        if cfg.noise_per_step:
            # time-varying parameters: forcing f_t = g_t . (theta + eps_t)
            def score(e, theta=theta):
                forcing = np.einsum("tb,tdb->td", basis, theta[None] + e)
                traj = task.dmp.from_forcing(forcing)
                ctrl = 0.5 * np.einsum("d,tdb->t", scale, (theta[None] + e) ** 2)
                q = task.state_costs(traj)
                return q, float(q.sum() + ctrl.sum())
        else:
            def score(e, theta=theta):
                noisy = theta + e[0]
                traj = task.trajectory(noisy)
                q = task.state_costs(traj)
                return q, float(q.sum() + T * task.control_cost(noisy))

        results = [score(e) for e in eps] if workers <= 1 else _threaded(score, eps, workers)
        q = np.array([r[0] for r in results]).T  # (T, m)
        totals = np.array([r[1] for r in results])

        a, Rg, gRg = _projected_noise(basis, eps, R)
        theta_R = theta if R is None else theta @ R
        quad = np.einsum("db,db->d", theta, theta_R)  # theta_d' R theta_d
        cross = basis @ theta.T  # g_t . theta_d, since theta' R M eps = (theta . g) a
        ctrl = 0.5 * np.einsum("d,tid->ti", scale, quad[None, None, :] + 2.0 * a * cross[:, None, :]
                               + a**2 * gRg[:, None, None])
        S = np.cumsum((q + ctrl)[::-1], axis=0)[::-1]
        P = softmin_weights(S, cfg.temperature)
        theta = pi2_update(theta, Pi2RolloutEval(S, P, eps), basis, R)
        all_costs.append(totals)
        thetas.append(theta.ravel().copy())
    return Pi2Result(theta.ravel(), np.array(all_costs), np.array(thetas))


def _threaded(fn, items, workers):
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
