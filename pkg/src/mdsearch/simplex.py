"""Mirror descent update kernels over discrete distributions on the simplex.

All kernels take the previous weights and a cost vector and return new
weights on the simplex.  The closed-form KL step (exponentiated gradient) is
the workhorse; :func:`prox_perturbed_kl` solves the proximal step for the
perturbed entropy ``psi(x) = eps * sum (x_i + eps) log(x_i + eps)`` in
O(m log m); :func:`generic_md_step` handles any :class:`BregmanSpec` with a
projected-gradient loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .divergences import BregmanSpec, generator, in_domain

__all__ = [
    "DegenerateUpdateError",
    "SolverError",
    "AmdSchedule",
    "check_simplex",
    "project_simplex",
    "md_step_kl",
    "prox_perturbed_kl",
    "amd_mix",
    "amd_step",
    "generic_md_step",
    "md_minimize",
    "amd_minimize",
]

SIMPLEX_TOL = 1e-9


class DegenerateUpdateError(ArithmeticError):
    """The updated weights cannot be normalized (every weight vanished)."""


class SolverError(RuntimeError):
    """An iterative inner solver failed to converge."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class AmdSchedule:
    """Hyperparameters of one accelerated mirror descent update.

    ``k`` is the 1-based update index; the mixing weight used at update ``k``
    is ``r / (r + k - 1)``.
    """

    r: float = 3.0
    gamma: float = 1.0
    s: float = 0.1
    k: int = 1

    def __post_init__(self):
        if self.r < 3:
            raise ValueError(f"r must be >= 3, got {self.r}")
        if not (self.gamma > 0 and self.s > 0):
            raise ValueError("gamma and s must be positive")
        if self.k < 1:
            raise ValueError(f"update index k must be >= 1, got {self.k}")

    @property
    def lam(self) -> float:
        return self.r / (self.r + (self.k - 1))

    def at(self, k: int) -> AmdSchedule:
        return AmdSchedule(self.r, self.gamma, self.s, k)


def check_simplex(q, name: str = "q") -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.size == 0:
        raise ValueError(f"{name} must be a non-empty vector")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise ValueError(f"{name} must have finite nonnegative entries")
    if abs(q.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{name} must sum to 1 (sum is {q.sum():.12g})")
    return q


def _check_costs(j, m: int) -> np.ndarray:
    j = np.asarray(j, dtype=np.float64)
    if j.shape != (m,):
        raise ValueError(f"cost vector has shape {j.shape}, expected ({m},)")
    if not np.all(np.isfinite(j)):
        raise ValueError("cost vector must be finite")
    return j


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex (sort based)."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def md_step_kl(q_prev, j, eta: float) -> np.ndarray:
    """Exponentiated-gradient step ``q_i ∝ q_prev_i * exp(-j_i / eta)``.

    This is the minimizer over the simplex of ``<j, q> + eta * KL(q, q_prev)``.
    Computed in the log domain, so cost gaps of 1e10 are harmless.
    """
    q_prev = check_simplex(q_prev, "q_prev")
    j = _check_costs(j, q_prev.size)
    if not eta > 0:
        raise ValueError("eta must be positive")
    with np.errstate(divide="ignore", over="ignore"):
        logits = np.log(q_prev) - (j - j.min()) / eta
    top = logits.max()
    if not np.isfinite(top):
        raise DegenerateUpdateError("all weights vanished in the exponentiated-gradient step")
    w = np.exp(logits - top)
    return w / w.sum()


def prox_perturbed_kl(q_anchor, j, step: float, epsilon: float) -> np.ndarray:
    """Minimize ``step * <j, x> + B_psi(x, q_anchor)`` over the simplex.

    ``psi`` is the perturbed entropy with offset ``epsilon``.  The solution has
    the form ``x_i = max(0, c * y_i - epsilon)`` with
    ``y_i = (q_anchor_i + epsilon) * exp(-step * j_i / epsilon)``; the scale
    ``c`` is found by scanning support sizes over the sorted ``y``.
    """
    a = check_simplex(q_anchor, "q_anchor")
    j = _check_costs(j, a.size)
    if not (step > 0 and epsilon > 0):
        raise ValueError("step and epsilon must be positive")
    m = a.size
    if m == 1:
        return np.ones(1)

    log_y = np.log(a + epsilon) - step * (j - j.min()) / epsilon
    log_y -= log_y.max()
    y = np.exp(log_y)
    order = np.argsort(-y, kind="stable")
    ys = y[order]
    csum = np.cumsum(ys)
    sizes = np.arange(1, m + 1)
    # c_k solves sum_{i<k} (c * y_i - eps) = 1 on the k largest entries
    scale = (1.0 + sizes * epsilon) / csum
    valid = ys * scale > epsilon
    k = int(np.nonzero(valid)[0].max()) + 1
    c = scale[k - 1]
    x = np.maximum(c * y - epsilon, 0.0)

    total = x.sum()
    if abs(total - 1.0) > 1e-12:
        # refine log c; the mass is monotone in c
        def excess(log_c):
            return np.maximum(np.exp(log_c) * y - epsilon, 0.0).sum() - 1.0

        lo, hi = np.log(c) - 1e-6, np.log(c) + 1e-6
        if excess(lo) > 0 or excess(hi) < 0:
            lo, hi = np.log(epsilon), np.log((1.0 + m * epsilon) / y.min())
        try:
            log_c = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        except ValueError as exc:
            raise SolverError("could not bracket the simplex multiplier", abs(total - 1.0)) from exc
        x = np.maximum(np.exp(log_c) * y - epsilon, 0.0)
    return x / x.sum()


def amd_mix(qz, qx, sched: AmdSchedule) -> np.ndarray:
    """Convex combination ``lam * qz + (1 - lam) * qx`` with ``lam = r / (r + k - 1)``."""
    qz = check_simplex(qz, "qz")
    qx = check_simplex(qx, "qx")
    if qz.shape != qx.shape:
        raise ValueError("qz and qx must have the same length")
    lam = sched.lam
    if lam == 1.0:
        return qz.copy()
    return lam * qz + (1.0 - lam) * qx


def amd_step(qz_prev, q_mixed, j, sched: AmdSchedule, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """One accelerated update of the two coupled sequences.

    The dual-averaging sequence takes an exponentiated-gradient step with
    linear coefficient ``(k - 1) s / r`` (identity at ``k = 1``); the primal
    sequence takes a perturbed-KL prox step of size ``gamma * s`` anchored at
    the mixed distribution.
    """
    qz_prev = check_simplex(qz_prev, "qz_prev")
    if sched.k == 1:
        qz = qz_prev.copy()
        _check_costs(j, qz.size)
    else:
        qz = md_step_kl(qz_prev, j, sched.r / ((sched.k - 1) * sched.s))
    qx = prox_perturbed_kl(q_mixed, j, sched.gamma * sched.s, epsilon)
    return qz, qx


def generic_md_step(spec: BregmanSpec, q_prev, j, eta: float, *, tol: float = 1e-8,
                    max_iter: int = 10_000) -> np.ndarray:
    """Minimize ``<j, q> + eta * B_phi(q, q_prev)`` over the simplex.

    Closed form for KL; otherwise projected gradient with Barzilai-Borwein
    trial steps and curvature backtracking, started from ``q_prev``.  Stops when
    the projected-gradient residual ``||q - P(q - grad)||_inf`` is below
    ``tol``.
    """
    q_prev = check_simplex(q_prev, "q_prev")
    j = _check_costs(j, q_prev.size)
    if not eta > 0:
        raise ValueError("eta must be positive")
    if spec.kind == "kl":
        return md_step_kl(q_prev, j, eta)
    if q_prev.size == 1:
        return np.ones(1)
    if not in_domain(spec, q_prev):
        raise ValueError("q_prev lies outside the generator's domain")

    _, grad_phi = generator(spec)
    g_anchor = grad_phi(q_prev)

    def gradient(q):
        return j + eta * (grad_phi(q) - g_anchor)

    q = q_prev.copy()
    g = gradient(q)
    t = 1.0 / eta
    residual = np.inf
    for _ in range(max_iter):
        residual = float(np.max(np.abs(q - project_simplex(q - g))))
        if residual < tol:
            return q
        # backtrack until the step is inside the domain and the curvature
        # along it is at most 1/t; comparing gradients instead of objective
        # values keeps the test meaningful when decreases fall below rounding
        while True:
            cand = project_simplex(q - t * g)
            if in_domain(spec, cand):
                g_new = gradient(cand)
                d = cand - q
                if float((g_new - g) @ d) <= float(d @ d) / t:
                    break
            t *= 0.5
            if t < 1e-20:
                raise SolverError("line search collapsed", residual)
        s_vec, y_vec = cand - q, g_new - g
        q, g = cand, g_new
        sy = float(s_vec @ y_vec)
        t = float(s_vec @ s_vec) / sy if sy > 0 else t * 2.0
    raise SolverError(f"projected gradient did not converge in {max_iter} iterations", residual)


def md_minimize(grad: Callable[[np.ndarray], np.ndarray], x0, step: float, n_iter: int) -> np.ndarray:
    """Plain entropic mirror descent on a smooth function over the simplex.

    Returns the iterates, shape ``(n_iter + 1, m)``, starting with ``x0``.
    """
    x = check_simplex(x0, "x0")
    out = [x]
    for _ in range(n_iter):
        x = md_step_kl(x, grad(x), 1.0 / step)
        out.append(x)
    return np.array(out)


def amd_minimize(grad: Callable[[np.ndarray], np.ndarray], x0, sched: AmdSchedule, epsilon: float,
                 n_iter: int) -> dict[str, np.ndarray]:
    """Accelerated mirror descent on a smooth function over the simplex.

    Uses the same recursion as :func:`amd_mix` / :func:`amd_step` with the
    gradient evaluated at the mixed point.  Returns the ``z``, ``x`` and mixed
    iterates, each of shape ``(n_iter + 1, m)``.
    """
    z = xt = check_simplex(x0, "x0")
    zs, xs, mixed = [z], [xt], [z]
    for k in range(1, n_iter + 1):
        sk = sched.at(k)
        q = amd_mix(z, xt, sk)
        z, xt = amd_step(z, q, grad(q), sk, epsilon)
        zs.append(z)
        xs.append(xt)
        mixed.append(q)
    return {"z": np.array(zs), "x": np.array(xs), "mixed": np.array(mixed)}
