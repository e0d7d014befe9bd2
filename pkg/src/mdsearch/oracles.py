"""Slow, independent reference implementations used to check the fast kernels.

Nothing here imports the kernels it checks.  The simplex oracle solves the
optimality conditions of a separable mirror step by nested root finding, taking
derivatives of the generator by the complex step, so it shares no code with
the closed forms or the projected-gradient solver.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import brentq


# --- scalar generators, written out independently --------------------------


def scalar_generator(kind: str, *, epsilon: float = 1.0, alpha: float = 0.0):
    """Elementwise generator ``phi_i`` of a separable Bregman divergence (complex-safe)."""
    if kind == "kl":
        return lambda x: x * np.log(x)
    if kind == "perturbed_kl":
        return lambda x: epsilon * (x + epsilon) * np.log(x + epsilon)
    if kind == "euclidean":
        return lambda x: 0.5 * x * x
    if kind == "alpha":
        p = 2.0 / (1.0 - alpha)
        return lambda x: 2.0 / (1.0 + alpha) * (1.0 + (1.0 - alpha) * x / 2.0) ** p
    raise ValueError(kind)


def complex_step_derivative(f, x, h: float = 1e-30):
    x = np.asarray(x, dtype=np.float64)
    return np.imag(f(x + 1j * h)) / h


def mirror_step_oracle(kind: str, q_prev, j, eta: float, *, epsilon: float = 1.0, alpha: float = 0.0,
                       iters: int = 200) -> np.ndarray:
    """``argmin_q <j, q> + eta * B_phi(q, q_prev)`` over the simplex by nested root finding.

    Stationarity gives ``phi'(q_i) = phi'(q_prev_i) - (j_i + nu) / eta`` with
    ``q_i`` clipped to ``[0, 1]``; a bisection inverts ``phi'`` per coordinate
    and Brent's method picks ``nu`` so the entries sum to one.
    """
    q_prev = np.asarray(q_prev, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    phi = scalar_generator(kind, epsilon=epsilon, alpha=alpha)

    def dphi(x):
        return complex_step_derivative(phi, x)

    tiny = 1e-300 if kind == "kl" else 0.0
    anchor = dphi(np.maximum(q_prev, tiny))
    lo0, hi0 = np.full_like(q_prev, tiny), np.ones_like(q_prev)
    d_lo, d_hi = dphi(lo0), dphi(hi0)

    def weights(nu):
        target = anchor - (j + nu) / eta
        clipped = (d_lo >= target) | (d_hi <= target)
        lo, hi = lo0.copy(), hi0.copy()
        for _ in range(iters):
            # geometric midpoints while the bracket spans orders of magnitude
            wide = (lo > 0) & (hi > 4.0 * lo)
            mid = np.where(wide, np.sqrt(lo * hi), 0.5 * (lo + hi))
            up = dphi(mid) < target
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
            if np.all(clipped | (hi - lo <= 1e-15 * hi)):
                break
        x = 0.5 * (lo + hi)
        x = np.where(d_lo >= target, 0.0, x)
        return np.where(d_hi <= target, 1.0, x)

    def excess(nu):
        return weights(nu).sum() - 1.0

    nu_lo, nu_hi = -1.0, 1.0
    while excess(nu_lo) < 0:
        nu_lo *= 2.0
    while excess(nu_hi) > 0:
        nu_hi *= 2.0
    nu = brentq(excess, nu_lo, nu_hi, xtol=1e-15, rtol=1e-15, maxiter=iters)
    x = weights(nu)
    return x / x.sum()


def amd_step_oracle(qz_prev, q_mixed, j, *, k: int, r: float, gamma: float, s: float,
                    epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Both halves of one accelerated step from their variational definitions."""
    if k == 1:
        qz = np.asarray(qz_prev, dtype=np.float64).copy()
    else:
        qz = mirror_step_oracle("kl", qz_prev, j, r / ((k - 1) * s))
    qx = mirror_step_oracle("perturbed_kl", q_mixed, j, 1.0 / (gamma * s), epsilon=epsilon)
    return qz, qx


# --- path space ------------------------------------------------------------


def path_distribution(initial, transitions) -> dict[tuple[int, ...], float]:
    """Probability of every path ``(h_0, ..., h_T)`` by exhaustive enumeration."""
    initial = np.asarray(initial)
    transitions = np.asarray(transitions)
    S, T = initial.size, transitions.shape[0]
    out = {}
    for path in itertools.product(range(S), repeat=T + 1):
        p = initial[path[0]]
        for t in range(1, T + 1):
            p *= transitions[t - 1][path[t - 1], path[t]]
        out[path] = float(p)
    return out


def path_space_update(initial, transitions, step_costs, eta: float) -> dict[tuple[int, ...], float]:
    """``p'(h) ∝ p(h) exp(-sum_t F_t(h_t) / eta)`` over all paths."""
    base = path_distribution(initial, transitions)
    F = np.asarray(step_costs, dtype=np.float64)
    T = np.asarray(transitions).shape[0]
    if F.ndim == 1:
        F = np.tile(F, (T + 1, 1))
    costs = {h: sum(F[t, s] for t, s in enumerate(h)) for h in base}
    shift = min(costs.values())
    raw = {h: p * np.exp(-(costs[h] - shift) / eta) for h, p in base.items()}
    z = sum(raw.values())
    return {h: v / z for h, v in raw.items()}


# --- PI2 ---------------------------------------------------------------------


def pi2_update_loops(theta_prev, eps, P, basis, R=None) -> np.ndarray:
    """PI2 parameter update with explicit loops and dense projection matrices.

    ``theta_prev`` is ``(D, B)``, ``eps`` ``(m, T, D, B)``, ``P`` ``(T, m)``,
    ``basis`` ``(T, B)``.
    """
    theta_prev = np.asarray(theta_prev, dtype=np.float64)
    m, T, D, B = np.shape(eps)
    Rinv = np.eye(B) if R is None else np.linalg.inv(R)
    num = np.zeros((D, B))
    den = 0.0
    for t in range(T):
        g = basis[t]
        M = Rinv @ np.outer(g, g) / (g @ Rinv @ g)
        for d in range(D):
            step = np.zeros(B)
            for i in range(m):
                step += P[t, i] * (M @ eps[i][t][d])
            num[d] += (T - t) * step
        den += T - t
    return theta_prev + num / den


# --- dynamics ----------------------------------------------------------------


def dmp_euler_fine(y0: float, goal: float, forcing, duration: float, dt: float, *, refine: int = 10,
                   alpha_z: float = 25.0, beta_z: float = 6.25) -> np.ndarray:
    """1-D DMP transformation system by explicit Euler at ``dt / refine``.

    ``forcing(t)`` is the forcing term as a function of time.  Returns the
    position at every coarse step ``0, dt, 2 dt, ...`` up to ``duration``.
    """
    h = dt / refine
    n = int(round(duration / dt))
    tau = duration
    y, v = float(y0), 0.0
    out = [y]
    for step in range(n * refine):
        t = step * h
        vdot = (alpha_z * (beta_z * (goal - y) - v) + forcing(t)) / tau
        y += h * v / tau
        v += h * vdot
        if (step + 1) % refine == 0:
            out.append(y)
    return np.array(out)
