"""Episode-level search algorithms built on the simplex kernels.

* :func:`mds_run` / :func:`amds_run` work on a fixed finite support, where
  re-estimating the density from the weights is the identity.
* :func:`gmds_run` / :func:`gamds_run` sample parameters from Gaussians,
  discretize them at the samples, take one mirror descent step on the
  weights and move the Gaussian means to the weighted sample means.  The
  covariances never change.
* :func:`online_mds_run` feeds a fresh noisy cost vector to every step.
* :func:`dp_exponentiated_update` applies the exponentiated-gradient update
  to a Markov chain over paths by a backward recursion.

Randomness comes from counter-based substreams keyed by
``(seed, update, rollout)`` so rollouts can be evaluated in any order, or in
parallel, without changing the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .simplex import (
    AmdSchedule,
    DegenerateUpdateError,
    amd_mix,
    amd_step,
    check_simplex,
    md_step_kl,
)

__all__ = [
    "GaussianState",
    "AmdGaussianState",
    "SearchTrace",
    "MarkovChain",
    "substream",
    "evaluate",
    "gaussian_mean_update",
    "mds_run",
    "amds_run",
    "gmds_run",
    "gamds_run",
    "online_mds_run",
    "dp_exponentiated_update",
]

Objective = Callable[[np.ndarray], float]


def substream(seed: int, update: int, rollout: int) -> np.random.Generator:
    """Independent generator for one rollout of one update."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(update), int(rollout))))


def evaluate(objective: Objective, thetas: np.ndarray, workers: int = 1) -> np.ndarray:
    """Evaluate ``objective`` on each row of ``thetas``, in row order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(objective, thetas))
    else:
        costs = [objective(t) for t in thetas]
    costs = np.asarray(costs, dtype=np.float64)
    if not np.all(np.isfinite(costs)):
        raise ValueError("objective returned a non-finite cost")
    return costs


@dataclass(frozen=True)
class GaussianState:
    """Gaussian search distribution.

    ``cov`` is either a vector (diagonal covariance) or a full PSD matrix.
    """

    mean: np.ndarray
    cov: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        l = mean.size
        if cov.shape == (l,):
            if np.any(cov <= 0):
                raise ValueError("diagonal covariance entries must be positive")
            chol = np.sqrt(cov)
        elif cov.shape == (l, l):
            if not np.allclose(cov, cov.T):
                raise ValueError("covariance must be symmetric")
            if np.any(np.diag(cov) <= 0):
                raise ValueError("covariance diagonal must be positive")
            chol = np.linalg.cholesky(cov)
        else:
            raise ValueError(f"covariance shape {cov.shape} does not match mean of length {l}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @classmethod
    def isotropic(cls, mean, scale: float = 1.0) -> GaussianState:
        mean = np.asarray(mean, dtype=np.float64)
        return cls(mean, np.full(mean.size, float(scale)))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def diagonal(self) -> bool:
        return self.cov.ndim == 1

    def with_mean(self, mean) -> GaussianState:
        # reuse the covariance object untouched
        return replace(self, mean=np.asarray(mean, dtype=np.float64))

    def transform(self, xi: np.ndarray) -> np.ndarray:
        """Map standard normal draws ``xi`` to samples of this distribution."""
        if self.diagonal:
            return self.mean + xi * self._chol
        return self.mean + xi @ self._chol.T

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.transform(rng.standard_normal(self.dim))

    def logpdf(self, thetas: np.ndarray) -> np.ndarray:
        """Exact log density at each row of ``thetas``."""
        d = np.atleast_2d(thetas) - self.mean
        l = self.dim
        if self.diagonal:
            maha = np.sum(d * d / self.cov, axis=1)
            logdet = np.sum(np.log(self.cov))
        else:
            from scipy.linalg import solve_triangular

            sol = solve_triangular(self._chol, d.T, lower=True)
            maha = np.sum(sol * sol, axis=0)
            logdet = 2.0 * np.sum(np.log(np.diag(self._chol)))
        return -0.5 * (maha + logdet + l * np.log(2.0 * np.pi))


@dataclass(frozen=True)
class AmdGaussianState:
    """The two Gaussians of the accelerated search plus its schedule."""

    z: GaussianState
    x: GaussianState
    sched: AmdSchedule = AmdSchedule()
    epsilon: float = 1.0

    def __post_init__(self):
        if self.z.dim != self.x.dim:
            raise ValueError("z and x states must share a dimension")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass
class SearchTrace:
    """Final state of a run plus what happened along the way.

    ``costs[k]`` holds the rollout costs of update ``k + 1`` in rollout order
    and ``means[k]`` the mean used to sample them (for the accelerated search,
    the mixture mean).
    """

    state: object
    costs: np.ndarray
    means: np.ndarray

    @property
    def curve(self) -> np.ndarray:
        """Batch-mean rollout cost per update."""
        return self.costs.mean(axis=1)


def _discretize(logdens: np.ndarray) -> np.ndarray:
    return np.exp(logdens - logsumexp(logdens))


def gaussian_mean_update(mean_prev, samples, weights) -> np.ndarray:
    """Weighted Monte Carlo mean ``mean_prev + sum_j w_j (theta_j - mean_prev)``.

    Algebraically equal to ``sum_j w_j theta_j`` because the weights sum to
    one; the offset form keeps precision when samples sit far from the origin.
    """
    mean_prev = np.asarray(mean_prev, dtype=np.float64)
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    w = check_simplex(weights, "weights")
    if samples.shape != (w.size, mean_prev.size):
        raise ValueError(f"samples have shape {samples.shape}, expected ({w.size}, {mean_prev.size})")
    return mean_prev + w @ (samples - mean_prev)


def mds_run(costs, q0, eta: float, n_updates: int, *, return_path: bool = False):
    """Mirror descent search on a finite support with fixed costs.

    Returns ``q_K``, or the whole path ``(K + 1, m)`` if ``return_path``.
    """
    costs = np.asarray(costs, dtype=np.float64)
    q = check_simplex(q0, "q0")
    if n_updates < 1:
        raise ValueError("n_updates must be >= 1")
    path = [q]
    for _ in range(n_updates):
        q = md_step_kl(q, costs, eta)
        path.append(q)
    return np.array(path) if return_path else q


def amds_run(costs, qz0, qx0, *, r: float = 3.0, gamma: float = 1.0, s: float = 0.1, epsilon: float = 1.0,
             n_updates: int, return_path: bool = False):
    """Accelerated mirror descent search on a finite support.

    Returns the mixed distribution of the last update (``q_K``); with
    ``return_path`` the mixed distributions of every update, shape ``(K, m)``.
    """
    costs = np.asarray(costs, dtype=np.float64)
    qz = check_simplex(qz0, "qz0")
    qx = check_simplex(qx0, "qx0")
    if qz.shape != qx.shape:
        raise ValueError("qz0 and qx0 must have the same length")
    if n_updates < 1:
        raise ValueError("n_updates must be >= 1")
    base = AmdSchedule(r, gamma, s)
    path = []
    for k in range(1, n_updates + 1):
        sched = base.at(k)
        q = amd_mix(qz, qx, sched)
        path.append(q)
        qz, qx = amd_step(qz, q, costs, sched, epsilon)
    return np.array(path) if return_path else path[-1]


def gmds_run(objective: Objective, init: GaussianState, eta: float, m: int, n_updates: int, seed: int,
             *, workers: int = 1) -> SearchTrace:
    """Gaussian mirror descent search.

    Each update draws ``m`` samples from the current Gaussian, takes an
    exponentiated-gradient step from uniform weights and moves the mean to
    the weighted sample mean.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if not eta > 0:
        raise ValueError("eta must be positive")
    state = init
    uniform = np.full(m, 1.0 / m)
    all_costs, means = [], [state.mean]
    for k in range(1, n_updates + 1):
        thetas = np.array([state.sample(substream(seed, k, i)) for i in range(m)])
        costs = evaluate(objective, thetas, workers)
        weights = md_step_kl(uniform, costs, eta)
        state = state.with_mean(gaussian_mean_update(state.mean, thetas, weights))
        all_costs.append(costs)
        means.append(state.mean)
    return SearchTrace(state, np.array(all_costs), np.array(means))


def _mixture_draw(state: AmdGaussianState, lam: float, rng: np.random.Generator) -> np.ndarray:
    # noise first, component second: with lam == 1 this matches sampling z alone
    xi = rng.standard_normal(state.z.dim)
    if lam >= 1.0 or rng.random() < lam:
        return state.z.transform(xi)
    return state.x.transform(xi)


def gamds_run(objective: Objective, init: AmdGaussianState, m: int, n_updates: int, seed: int,
              *, workers: int = 1) -> SearchTrace:
    """Gaussian accelerated mirror descent search.

    Samples come from the mixture ``lam * p_z + (1 - lam) * p_x``.  Both
    Gaussians are discretized by their normalized densities at the shared
    samples; the ``z`` weights take an exponentiated-gradient step, the
    mixed weights a perturbed-KL prox step, and the two means are re-estimated
    from the resulting weights.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    state = init
    all_costs, means = [], []
    for k in range(1, n_updates + 1):
        sched = state.sched.at(k)
        lam = sched.lam
        means.append(lam * state.z.mean + (1.0 - lam) * state.x.mean)
        thetas = np.array([_mixture_draw(state, lam, substream(seed, k, i)) for i in range(m)])
        qz = _discretize(state.z.logpdf(thetas))
        qx = _discretize(state.x.logpdf(thetas))
        costs = evaluate(objective, thetas, workers)
        q = amd_mix(qz, qx, sched)
        qz_hat, qx_hat = amd_step(qz, q, costs, sched, state.epsilon)
        state = replace(
            state,
            z=state.z.with_mean(gaussian_mean_update(state.z.mean, thetas, qz_hat)),
            x=state.x.with_mean(gaussian_mean_update(state.x.mean, thetas, qx_hat)),
        )
        all_costs.append(costs)
    lam = state.sched.at(n_updates + 1).lam
    means.append(lam * state.z.mean + (1.0 - lam) * state.x.mean)
    return SearchTrace(state, np.array(all_costs), np.array(means))


def online_mds_run(sample_costs: Callable[[np.random.Generator], np.ndarray], q0, eta: float, n_updates: int,
                   seed: int = 0, *, return_path: bool = False):
    """Mirror descent driven by a fresh stochastic cost vector every update.

    ``sample_costs(rng)`` returns one noisy cost vector; its expectation is
    the true cost.  The generator passed at update ``k`` is
    ``substream(seed, k, 0)``.
    """
    q = check_simplex(q0, "q0")
    if n_updates < 1:
        raise ValueError("n_updates must be >= 1")
    path = [q]
    for k in range(1, n_updates + 1):
        q = md_step_kl(q, sample_costs(substream(seed, k, 0)), eta)
        path.append(q)
    return np.array(path) if return_path else q


@dataclass(frozen=True)
class MarkovChain:
    """Distribution over paths ``h_0, ..., h_T`` on a finite state space.

    ``initial`` has shape ``(S,)``; ``transitions[t - 1][a, b]`` is
    ``p(h_t = b | h_{t-1} = a)`` for ``t = 1..T``.
    """

    initial: np.ndarray
    transitions: np.ndarray

    def __post_init__(self):
        init = np.asarray(self.initial, dtype=np.float64)
        trans = np.asarray(self.transitions, dtype=np.float64)
        if trans.ndim != 3 or trans.shape[1:] != (init.size, init.size):
            raise ValueError(f"transitions must have shape (T, {init.size}, {init.size}), got {trans.shape}")
        check_simplex(init, "initial")
        if np.any(trans < 0) or not np.allclose(trans.sum(axis=2), 1.0, atol=1e-9):
            raise ValueError("every transition row must be a distribution")
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "transitions", trans)

    @property
    def horizon(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_states(self) -> int:
        return self.initial.size


def dp_exponentiated_update(chain: MarkovChain, step_costs, eta: float) -> MarkovChain:
    """Exponentiated-gradient update of a path distribution by backward recursion.

    With ``J(h) = sum_t F_t(h_t)`` the path-space update
    ``p'(h) ∝ exp(-J(h) / eta) p(h)`` stays Markov.  Writing
    ``W_t(a) = exp(-V_t(a) / eta)``,

        W_T(a) = exp(-F_T(a) / eta)
        W_t(a) = exp(-F_t(a) / eta) * sum_b p(b | a) W_{t+1}(b)

    and the new transitions are ``p'(b | a) ∝ p(b | a) W_{t+1}(b)``, the new
    initial law ``p'(a) ∝ p(a) W_0(a)``.  ``step_costs`` is ``(S,)`` for a
    time-invariant cost or ``(T + 1, S)``.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    T, S = chain.horizon, chain.n_states
    F = np.asarray(step_costs, dtype=np.float64)
    if F.shape == (S,):
        F = np.broadcast_to(F, (T + 1, S))
    if F.shape != (T + 1, S):
        raise ValueError(f"step_costs must have shape ({S},) or ({T + 1}, {S}), got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("step costs must be finite")

    with np.errstate(divide="ignore"):
        log_p = np.log(chain.transitions)
        log_init = np.log(chain.initial)
    log_w = -F[T] / eta
    new_trans = np.empty_like(chain.transitions)
    for t in range(T, 0, -1):
        logits = log_p[t - 1] + log_w[None, :]
        norm = logsumexp(logits, axis=1)
        if not np.all(np.isfinite(norm)):
            raise DegenerateUpdateError(f"transition row at step {t} cannot be normalized")
        new_trans[t - 1] = np.exp(logits - norm[:, None])
        log_w = -F[t - 1] / eta + norm
    logits0 = log_init + log_w
    new_init = np.exp(logits0 - logsumexp(logits0))
    return MarkovChain(new_init, new_trans)
