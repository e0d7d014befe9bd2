"""Via-point benchmark tasks with DMP-parameterized trajectories.

A :class:`DmpPolicy` maps a weight matrix ``theta`` of shape
``(n_dims, n_basis)`` to a trajectory by explicit Euler integration of

    tau * v' = alpha_z * (beta_z * (g - y) - v) + f(x)
    tau * y' = v
    tau * x' = -alpha_x * x
    f(x)     = sum_b psi_b(x) theta_b x / sum_b psi_b(x)

with ``tau`` equal to the movement duration.  Because the integration is
linear in ``theta``, :class:`LinearDmp` caches the response matrices and
produces the same trajectories with two matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

__all__ = [
    "IntegrationError",
    "DmpPolicy",
    "Trajectory",
    "LinearDmp",
    "dmp_rollout",
    "Rollout",
    "point_task_cost",
    "arm_forward_kinematics",
    "arm_task_cost",
    "MinJerk",
    "min_jerk",
    "fit_dmp_weights",
    "min_jerk_init",
    "ViaPointTask",
    "PointViaTask",
    "ArmViaTask",
    "SphereTask",
]


class IntegrationError(ArithmeticError):
    """The DMP state became non-finite."""


@dataclass(frozen=True)
class DmpPolicy:
    n_basis: int
    y0: np.ndarray
    goal: np.ndarray
    duration: float = 0.5
    dt: float = 0.002
    alpha_z: float = 25.0
    beta_z: float = 25.0 / 4.0
    alpha_x: float = float(np.log(100.0))

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.y0, dtype=np.float64))
        goal = np.atleast_1d(np.asarray(self.goal, dtype=np.float64))
        if y0.shape != goal.shape or y0.ndim != 1:
            raise ValueError("y0 and goal must be vectors of equal length")
        if self.n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        steps = self.duration / self.dt
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ValueError(f"duration {self.duration} is not a whole number of dt={self.dt} steps")
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "goal", goal)

    @property
    def n_dims(self) -> int:
        return self.y0.size

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def n_params(self) -> int:
        return self.n_dims * self.n_basis

    @cached_property
    def phase(self) -> np.ndarray:
        """Canonical variable ``x`` at every step, starting from 1."""
        decay = 1.0 - self.dt * self.alpha_x / self.duration
        return decay ** np.arange(self.n_steps)

    @cached_property
    def centers(self) -> np.ndarray:
        # equally spaced in normalized time, so log-spaced in x
        if self.n_basis == 1:
            return np.ones(1)
        return np.exp(-self.alpha_x * np.linspace(0.0, 1.0, self.n_basis))

    @cached_property
    def widths(self) -> np.ndarray:
        if self.n_basis == 1:
            return np.ones(1)
        h = 1.0 / (np.diff(self.centers) * 0.55) ** 2
        return np.append(h, h[-1])

    def activations(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)[..., None]
        return np.exp(-0.5 * self.widths * (x - self.centers) ** 2)

    @cached_property
    def basis(self) -> np.ndarray:
        """Normalized, phase-gated basis ``g_t``, shape ``(n_steps, n_basis)``."""
        psi = self.activations(self.phase)
        return psi * self.phase[:, None] / psi.sum(axis=1, keepdims=True)

    def shape_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.size != self.n_params:
            raise ValueError(f"theta has {theta.size} entries, expected {self.n_dims} x {self.n_basis}")
        return theta.reshape(self.n_dims, self.n_basis)


class Trajectory(NamedTuple):
    y: np.ndarray
    yd: np.ndarray
    ydd: np.ndarray


def _euler(policy: DmpPolicy, forcing: np.ndarray, y0, goal) -> Trajectory:
    """Integrate the transformation system for a forcing array ``(n_steps, ...)``."""
    tau, dt = policy.duration, policy.dt
    az, bz = policy.alpha_z, policy.beta_z
    y = np.array(np.broadcast_to(y0, forcing.shape[1:]), dtype=np.float64)
    v = np.zeros_like(y)
    goal = np.broadcast_to(goal, y.shape)
    ys = np.empty_like(forcing)
    yds = np.empty_like(forcing)
    ydds = np.empty_like(forcing)
    # a blowup is reported once, after the loop
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(forcing.shape[0]):
            vdot = (az * (bz * (goal - y) - v) + forcing[n]) / tau
            ys[n] = y
            yds[n] = v / tau
            ydds[n] = vdot / tau
            y = y + dt * v / tau
            v = v + dt * vdot
    if not (np.all(np.isfinite(ys)) and np.all(np.isfinite(ydds))):
        raise IntegrationError("DMP integration produced non-finite values")
    return Trajectory(ys, yds, ydds)


def dmp_rollout(policy: DmpPolicy, theta) -> Trajectory:
    """Integrate the DMP for weights ``theta``; arrays have shape ``(n_steps, n_dims)``."""
    w = policy.shape_theta(theta)
    forcing = policy.basis @ w.T
    return _euler(policy, forcing, policy.y0, policy.goal)


class LinearDmp:
    """Response-matrix form of :func:`dmp_rollout`.

    ``y = y_free + Y @ theta_d`` per output dimension, and likewise for
    velocity and acceleration.
    """

    def __init__(self, policy: DmpPolicy):
        self.policy = policy
        self.free = _euler(policy, np.zeros((policy.n_steps, policy.n_dims)), policy.y0, policy.goal)
        self.response = _euler(policy, policy.basis, 0.0, 0.0)
        self._impulse = None

    def __call__(self, theta) -> Trajectory:
        w = self.policy.shape_theta(theta)
        return Trajectory(*(free + resp @ w.T for free, resp in zip(self.free, self.response)))

    def from_forcing(self, forcing) -> Trajectory:
        """Trajectory for an arbitrary forcing sequence ``(n_steps, n_dims)``."""
        if self._impulse is None:
            self._impulse = _euler(self.policy, np.eye(self.policy.n_steps), 0.0, 0.0)
        forcing = np.asarray(forcing, dtype=np.float64)
        return Trajectory(*(free + h @ forcing for free, h in zip(self.free, self._impulse)))


class Rollout(NamedTuple):
    theta: np.ndarray
    trajectory: Trajectory
    step_costs: np.ndarray
    via_penalty: float
    total: float


def _via_index(via_time: float, dt: float, n_steps: int) -> int:
    idx = int(round(via_time / dt))
    if idx >= n_steps:
        raise ValueError(f"trajectory of {n_steps} steps does not reach the via time {via_time}s")
    return idx


def point_task_cost(traj: Trajectory, theta, *, dt: float = 0.002, via_point=(0.5, 0.2), via_time: float = 0.25,
                    accel_weight: float = 5000.0, param_weight: float = 0.5,
                    via_weight: float = 1.0e10) -> Rollout:
    """Cost of a 2-D point trajectory.

    ``r_t = 5000 |f_t|^2 + 0.5 theta'theta`` at every step plus
    ``1e10 * |via_point - y(via_time)|^2``, where ``f_t`` is the acceleration.
    """
    theta = np.asarray(theta, dtype=np.float64).ravel()
    idx = _via_index(via_time, dt, traj.y.shape[0])
    steps = accel_weight * np.sum(traj.ydd**2, axis=1) + param_weight * float(theta @ theta)
    miss = np.asarray(via_point) - traj.y[idx]
    penalty = via_weight * float(miss @ miss)
    return Rollout(theta, traj, steps, penalty, float(steps.sum()) + penalty)


def arm_forward_kinematics(joint_angles) -> np.ndarray:
    """End-effector ``(x, y)`` of a planar chain of equal links with total length 1.

    Accepts a vector of D angles or an array ``(..., D)``.
    """
    q = np.asarray(joint_angles, dtype=np.float64)
    D = q.shape[-1]
    if D < 1:
        raise ValueError("need at least one joint")
    absolute = np.cumsum(q, axis=-1)
    return np.stack([np.cos(absolute).sum(axis=-1), np.sin(absolute).sum(axis=-1)], axis=-1) / D


def arm_task_cost(traj: Trajectory, theta, *, dt: float = 0.002, via_point=(0.5, 0.5), via_time: float = 0.3,
                  accel_weight: float = 0.1, param_weight: float = 0.5, via_weight: float = 1.0e8) -> Rollout:
    """Cost of a D-joint arm trajectory.

    ``r_t = sum_i w_i (0.1 f_{i,t}^2 + 0.5 theta_i'theta_i) / sum_i w_i`` with
    ``w_i = D + 1 - i`` (proximal joints weigh more), plus
    ``1e8 * |via_point - ee(via_time)|^2``.
    """
    D = traj.y.shape[1]
    theta = np.asarray(theta, dtype=np.float64).reshape(D, -1)
    w = np.arange(D, 0, -1, dtype=np.float64)
    idx = _via_index(via_time, dt, traj.y.shape[0])
    per_joint = accel_weight * traj.ydd**2 + param_weight * np.sum(theta**2, axis=1)
    steps = per_joint @ w / w.sum()
    miss = np.asarray(via_point) - arm_forward_kinematics(traj.y[idx])
    penalty = via_weight * float(miss @ miss)
    return Rollout(theta.ravel(), traj, steps, penalty, float(steps.sum()) + penalty)


class MinJerk(NamedTuple):
    s: np.ndarray
    y: np.ndarray
    dy: np.ndarray


def min_jerk(start, goal, steps: int) -> MinJerk:
    """Quintic minimum-jerk profile sampled at ``steps`` points of ``s in [0, 1]``.

    ``dy`` is the derivative with respect to ``s``.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    start = np.atleast_1d(np.asarray(start, dtype=np.float64))
    goal = np.atleast_1d(np.asarray(goal, dtype=np.float64))
    s = np.linspace(0.0, 1.0, steps)
    return _min_jerk_at(start, goal, s)


def _min_jerk_at(start, goal, s) -> MinJerk:
    s = np.clip(s, 0.0, 1.0)
    shape = 10 * s**3 - 15 * s**4 + 6 * s**5
    dshape = 30 * s**2 - 60 * s**3 + 30 * s**4
    amp = goal - start
    return MinJerk(s, start + np.outer(shape, amp), np.outer(dshape, amp))


def fit_dmp_weights(policy: DmpPolicy, positions: np.ndarray) -> np.ndarray:
    """Locally weighted regression of DMP weights on a demonstrated trajectory.

    ``positions`` has shape ``(n_steps + 2, n_dims)`` (two samples past the
    horizon are needed to difference twice).  The target forcing term
    is recovered by inverting the Euler recursion, so a perfect fit reproduces
    the samples exactly; each basis weight is then fit independently.
    """
    n = policy.n_steps
    y = np.asarray(positions, dtype=np.float64)
    if y.shape != (n + 2, policy.n_dims):
        raise ValueError(f"positions must have shape ({n + 2}, {policy.n_dims})")
    tau, dt = policy.duration, policy.dt
    v = tau * np.diff(y, axis=0) / dt  # v_0 .. v_{n}
    vdot = np.diff(v, axis=0) / dt  # vdot_0 .. vdot_{n-1}
    target = tau * vdot - policy.alpha_z * (policy.beta_z * (policy.goal - y[:n]) - v[:n])
    x = policy.phase
    psi = policy.activations(x)  # (n, B)
    num = (psi * x[:, None]).T @ target  # (B, D)
    den = (psi * (x**2)[:, None]).sum(axis=0)  # (B,)
    return (num / den[:, None]).T


def min_jerk_init(policy: DmpPolicy) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-jerk demonstration from ``policy.y0`` to ``policy.goal`` and its fitted weights.

    Returns ``(positions, theta)`` with positions of shape ``(n_steps, n_dims)``.
    """
    n = policy.n_steps
    s = np.arange(n + 2) * policy.dt / policy.duration
    demo = _min_jerk_at(policy.y0, policy.goal, s).y
    theta = fit_dmp_weights(policy, demo)
    return demo[:n], theta


class ViaPointTask:
    """Shared machinery: a DMP, its cost, and the split PI2 needs.

    The per-step cost of every via-point task is a state part (weighted
    squared accelerations) plus a parameter part ``0.5 * sum_d c_d |theta_d|^2``
    with task-specific scales ``c_d``; the via-point penalty lands on the via
    step.
    """

    name = "via"

    def __init__(self, policy: DmpPolicy, via_point, via_time: float, via_weight: float):
        self.policy = policy
        self.via_point = np.asarray(via_point, dtype=np.float64)
        self.via_time = float(via_time)
        self.via_weight = float(via_weight)
        self.via_index = _via_index(self.via_time, policy.dt, policy.n_steps)
        self.dmp = LinearDmp(policy)

    @property
    def dim(self) -> int:
        return self.policy.n_params

    @property
    def basis(self) -> np.ndarray:
        return self.policy.basis

    def initial_theta(self) -> np.ndarray:
        return np.zeros(self.dim)

    def trajectory(self, theta) -> Trajectory:
        return self.dmp(theta)

    def control_scale(self) -> np.ndarray:
        """Per-dimension scale ``c_d`` of the parameter cost."""
        raise NotImplementedError

    def accel_costs(self, traj: Trajectory) -> np.ndarray:
        raise NotImplementedError

    def endpoint(self, traj: Trajectory) -> np.ndarray:
        """Task-space position at the via step."""
        return traj.y[self.via_index]

    def control_cost(self, theta) -> float:
        w = self.policy.shape_theta(theta)
        return 0.5 * float(self.control_scale() @ np.sum(w**2, axis=1))

    def state_costs(self, traj: Trajectory) -> np.ndarray:
        """Per-step costs without the parameter term; the via penalty sits on its step."""
        q = self.accel_costs(traj)
        miss = self.via_point - self.endpoint(traj)
        q[self.via_index] += self.via_weight * float(miss @ miss)
        return q

    def rollout(self, theta) -> Rollout:
        raise NotImplementedError

    def __call__(self, theta) -> float:
        return self.rollout(theta).total


class PointViaTask(ViaPointTask):
    """2-D point passing through ``(0.5, 0.2)`` at 250 ms, from (0, 0) toward (1, 1)."""

    name = "point"

    def __init__(self, n_basis: int = 20, *, dt: float = 0.002, duration: float = 0.5, via_point=(0.5, 0.2),
                 via_time: float = 0.25, start=(0.0, 0.0), goal=(1.0, 1.0)):
        super().__init__(DmpPolicy(n_basis, start, goal, duration=duration, dt=dt), via_point, via_time, 1.0e10)

    def control_scale(self) -> np.ndarray:
        return np.ones(self.policy.n_dims)

    def accel_costs(self, traj: Trajectory) -> np.ndarray:
        return 5000.0 * np.sum(traj.ydd**2, axis=1)

    def rollout(self, theta) -> Rollout:
        return point_task_cost(self.trajectory(theta), theta, dt=self.policy.dt, via_point=self.via_point,
                               via_time=self.via_time)


class ArmViaTask(ViaPointTask):
    """D-joint planar arm whose end-effector passes through ``(0.5, 0.5)`` at 300 ms.

    Joints start at the straight pose and are initialized to the minimum-jerk
    motion toward ``goal`` (default: first joint at pi/2, end-effector at
    (0, 1)).
    """

    name = "arm"

    def __init__(self, dof: int = 10, n_basis: int = 100, *, dt: float = 0.002, duration: float = 0.6,
                 via_point=(0.5, 0.5), via_time: float = 0.3, goal=None):
        if goal is None:
            goal = np.zeros(dof)
            goal[0] = np.pi / 2
        policy = DmpPolicy(n_basis, np.zeros(dof), goal, duration=duration, dt=dt)
        super().__init__(policy, via_point, via_time, 1.0e8)
        self.dof = dof
        self._weights = np.arange(dof, 0, -1, dtype=np.float64)

    @cached_property
    def _init(self) -> np.ndarray:
        return min_jerk_init(self.policy)[1].ravel()

    def initial_theta(self) -> np.ndarray:
        return self._init.copy()

    def control_scale(self) -> np.ndarray:
        return self._weights / self._weights.sum()

    def accel_costs(self, traj: Trajectory) -> np.ndarray:
        return 0.1 * traj.ydd**2 @ self._weights / self._weights.sum()

    def endpoint(self, traj: Trajectory) -> np.ndarray:
        return arm_forward_kinematics(traj.y[self.via_index])

    def rollout(self, theta) -> Rollout:
        return arm_task_cost(self.trajectory(theta), theta, dt=self.policy.dt, via_point=self.via_point,
                             via_time=self.via_time)


@dataclass
class SphereTask:
    """``J(theta) = |theta|^2``; a smoke test for the Gaussian searches."""

    dim: int = 2
    start: float = 5.0
    name: str = field(default="sphere", init=False)

    def initial_theta(self) -> np.ndarray:
        return np.full(self.dim, self.start)

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=np.float64)
        return float(theta @ theta)
