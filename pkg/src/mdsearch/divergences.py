"""Bregman divergences on the positive orthant and the probability simplex.

Each generator ``phi`` is exposed together with its gradient so that the
divergence

    B_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>

can be evaluated for any of the supported kinds.  The alpha family

    phi_alpha(x) = 2 / (1 + alpha) * sum_i (1 + (1 - alpha) / 2 * x_i) ** (2 / (1 - alpha))

interpolates between the forward and reverse KL divergences in the limits
alpha -> +1 and alpha -> -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "BregmanSpec",
    "DomainError",
    "KL_FLOOR",
    "kl_divergence",
    "generator",
    "bregman",
    "alpha_bregman",
    "alpha_limit_check",
]

KL_FLOOR = 1e-300

KINDS = ("kl", "perturbed_kl", "euclidean", "alpha")


class DomainError(ValueError):
    """An argument lies outside the domain of a divergence generator."""


@dataclass(frozen=True)
class BregmanSpec:
    """Selects the convex generator of a Bregman divergence.

    Use the constructors :meth:`kl`, :meth:`perturbed_kl`, :meth:`euclidean`
    and :meth:`alpha` rather than filling the fields by hand.
    """

    kind: str
    epsilon: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown divergence kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "perturbed_kl":
            if self.epsilon is None or not self.epsilon > 0:
                raise ValueError("perturbed_kl requires epsilon > 0")
        if self.kind == "alpha":
            if self.alpha is None or not np.isfinite(self.alpha):
                raise ValueError("alpha divergence requires a finite alpha")
            if self.alpha in (1.0, -1.0):
                raise ValueError("alpha = +/-1 are limit cases; use the KL divergences instead")

    @classmethod
    def kl(cls) -> BregmanSpec:
        return cls("kl")

    @classmethod
    def perturbed_kl(cls, epsilon: float) -> BregmanSpec:
        return cls("perturbed_kl", epsilon=float(epsilon))

    @classmethod
    def euclidean(cls) -> BregmanSpec:
        return cls("euclidean")

    @classmethod
    def alpha_family(cls, alpha: float) -> BregmanSpec:
        return cls("alpha", alpha=float(alpha))


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise ValueError(f"expected two non-empty vectors of equal length, got {x.shape} and {y.shape}")
    return x, y


def kl_divergence(x, y) -> float:
    """Return ``sum_j x_j * log(x_j / y_j)``.

    Zero entries are clamped to :data:`KL_FLOOR` before taking logs; negative
    entries raise :class:`DomainError`.
    """
    x, y = _as_pair(x, y)
    if np.any(x < 0) or np.any(y < 0):
        raise DomainError("KL divergence requires nonnegative entries")
    xs = np.maximum(x, KL_FLOOR)
    ys = np.maximum(y, KL_FLOOR)
    return float(np.sum(xs * (np.log(xs) - np.log(ys))))


# --- generators -------------------------------------------------------------


def _alpha_base(x: np.ndarray, alpha: float) -> np.ndarray:
    return 1.0 + 0.5 * (1.0 - alpha) * x


def _alpha_phi(x: np.ndarray, alpha: float) -> float:
    return 2.0 / (1.0 + alpha) * float(np.sum(_alpha_base(x, alpha) ** (2.0 / (1.0 - alpha))))


def _alpha_grad(x: np.ndarray, alpha: float) -> np.ndarray:
    # d/dx of the summand collapses to 2/(1+alpha) * base**((1+alpha)/(1-alpha))
    return 2.0 / (1.0 + alpha) * _alpha_base(x, alpha) ** ((1.0 + alpha) / (1.0 - alpha))


def generator(spec: BregmanSpec) -> tuple[Callable[[np.ndarray], float], Callable[[np.ndarray], np.ndarray]]:
    """Return ``(phi, grad_phi)`` for ``spec``.

    The returned callables do not validate their domain; :func:`bregman` does.
    """
    if spec.kind == "kl":
        def phi(x):
            xs = np.maximum(x, KL_FLOOR)
            return float(np.sum(xs * np.log(xs)))

        def grad(x):
            return np.log(np.maximum(x, KL_FLOOR)) + 1.0

    elif spec.kind == "perturbed_kl":
        eps = spec.epsilon

        def phi(x):
            return float(eps * np.sum((x + eps) * np.log(x + eps)))

        def grad(x):
            return eps * (np.log(x + eps) + 1.0)

    elif spec.kind == "euclidean":
        def phi(x):
            return 0.5 * float(x @ x)

        def grad(x):
            return np.array(x, dtype=np.float64)

    else:
        a = spec.alpha

        def phi(x):
            return _alpha_phi(x, a)

        def grad(x):
            return _alpha_grad(x, a)

    return phi, grad


def in_domain(spec: BregmanSpec, x: np.ndarray) -> bool:
    """Whether every entry of ``x`` is inside the generator's domain."""
    if spec.kind == "kl":
        return bool(np.all(x >= 0))
    if spec.kind == "perturbed_kl":
        return bool(np.all(x > -spec.epsilon))
    if spec.kind == "euclidean":
        return bool(np.all(np.isfinite(x)))
    return bool(np.all(x >= 0) and np.all(_alpha_base(x, spec.alpha) > 0))


def bregman(spec: BregmanSpec, x, y) -> float:
    """Bregman divergence ``B_phi(x, y)`` for the generator selected by ``spec``."""
    x, y = _as_pair(x, y)
    for name, v in (("x", x), ("y", y)):
        if not in_domain(spec, v):
            raise DomainError(f"{name} is outside the domain of the {spec.kind} generator")
    if spec.kind == "kl":
        # generalized KL; the direct form avoids cancellation between phi terms
        xs = np.maximum(x, KL_FLOOR)
        ys = np.maximum(y, KL_FLOOR)
        return float(np.sum(xs * (np.log(xs) - np.log(ys)) - xs + ys))
    if spec.kind == "perturbed_kl":
        eps = spec.epsilon
        xe, ye = x + eps, y + eps
        return float(eps * np.sum(xe * (np.log(xe) - np.log(ye)) - xe + ye))
    if spec.kind == "euclidean":
        d = x - y
        return 0.5 * float(d @ d)
    return alpha_bregman(x, y, spec.alpha)


def alpha_bregman(x, y, alpha: float) -> float:
    """``B_alpha(x, y)`` from the alpha generator with no positivity check.

    Only the base ``1 + (1 - alpha) x / 2`` must stay positive; this is what
    the limit substitutions ``x = log p`` and ``x = p - 1`` rely on.
    """
    x, y = _as_pair(x, y)
    if alpha in (1.0, -1.0):
        raise ValueError("alpha must differ from +/-1")
    if np.any(_alpha_base(x, alpha) <= 0) or np.any(_alpha_base(y, alpha) <= 0):
        raise DomainError("alpha generator base must be positive")
    return _alpha_phi(x, alpha) - _alpha_phi(y, alpha) - float(_alpha_grad(y, alpha) @ (x - y))


def alpha_limit_check(p, q, alpha_near: float) -> tuple[float, float]:
    """Compare ``B_alpha`` near ``alpha = +/-1`` with its KL limit.

    For ``alpha_near > 0`` the pair is ``(B_alpha(log p, log q), KL(q, p))``;
    for ``alpha_near < 0`` it is ``(B_alpha(p - 1, q - 1), KL(p, q))``.
    """
    p, q = _as_pair(p, q)
    if alpha_near in (1.0, -1.0):
        raise ValueError("alpha_near must not equal +/-1")
    if np.any(p <= 0) or np.any(q <= 0):
        raise DomainError("p and q must be strictly positive")
    if alpha_near > 0:
        return alpha_bregman(np.log(p), np.log(q), alpha_near), kl_divergence(q, p)
    return alpha_bregman(p - 1.0, q - 1.0, alpha_near), kl_divergence(p, q)
