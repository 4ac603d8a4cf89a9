"""Per-agent-type kinematic models: how actions become motion.

Three models share one interface: ``bicycle`` (action = [steering,
acceleration]), ``unconstrained`` (action = state delta) and ``teleporting``
(action = next state). States are length-4 vectors [x, y, psi, v]; batches
stack them as (N, 4) float64 arrays.

The bicycle discretization is semi-implicit (speed first, pose with the new
speed) with the front axle at the vehicle center, so the slip angle equals
the steering angle and the yaw rate is v'*sin(delta)/l_r:

    v'   = v + a*dt
    psi' = psi + (v'*sin(delta)/l_r)*dt
    x'   = x + v'*cos(psi + delta)*dt
    y'   = y + v'*sin(psi + delta)*dt

``fit_action`` inverts a step in closed form; ``jacobian`` implements the
analytic derivative of the update, valid in the interior of the action box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput
from .geometry import normalize_angle, normalize_angles, shortest_angle_diff

STATE_DIM = 4


@dataclass(frozen=True)
class AgentAttributes:
    """Static per-agent properties used by kinematics and collision."""

    length: float = 4.6
    width: float = 2.0
    rear_axis_offset: float = 1.4

    def __post_init__(self) -> None:
        if not (self.length > 0 and self.width > 0):
            raise ValueError("agent dimensions must be positive")
        if not (0.0 < self.rear_axis_offset < 0.5 * self.length):
            raise ValueError("rear_axis_offset must lie in (0, length/2)")


def _check_inputs(state: np.ndarray, action: np.ndarray, action_dim: int) -> None:
    if action.shape[-1] != action_dim:
        raise DimensionMismatch(
            f"expected action of length {action_dim}, got {action.shape[-1]}"
        )
    if state.shape[-1] != STATE_DIM:
        raise DimensionMismatch(
            f"expected state of length {STATE_DIM}, got {state.shape[-1]}"
        )
    if not (np.isfinite(state).all() and np.isfinite(action).all()):
        raise NonFiniteInput("state and action must be finite")


@dataclass(frozen=True)
class BicycleModel:
    """Kinematic bicycle; action = [steering delta (rad), acceleration a]."""

    max_steering: float = 0.3
    accel_bounds: tuple[float, float] = (-1.0, 1.0)

    action_dim = 2

    def __post_init__(self) -> None:
        lo, hi = self.accel_bounds
        if not (math.isfinite(self.max_steering) and self.max_steering > 0):
            raise ValueError("max_steering must be positive and finite")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError("accel_bounds must be finite and ordered")

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        a = np.asarray(action, dtype=np.float64)
        out = np.empty_like(a)
        out[..., 0] = np.clip(a[..., 0], -self.max_steering, self.max_steering)
        out[..., 1] = np.clip(a[..., 1], *self.accel_bounds)
        return out

    def step_batch(self, states: np.ndarray, actions: np.ndarray,
                   rear_axis_offset: np.ndarray, dt: float) -> np.ndarray:
        states = np.asarray(states, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        _check_inputs(states, actions, self.action_dim)
        act = self.clip_action(actions)
        delta, accel = act[..., 0], act[..., 1]
        v1 = states[..., 3] + accel * dt
        heading = states[..., 2] + delta
        out = np.empty_like(states)
        out[..., 0] = states[..., 0] + v1 * np.cos(heading) * dt
        out[..., 1] = states[..., 1] + v1 * np.sin(heading) * dt
        out[..., 2] = normalize_angles(
            states[..., 2] + v1 * np.sin(delta) / rear_axis_offset * dt
        )
        out[..., 3] = v1
        return out

    def step(self, state: np.ndarray, action: np.ndarray,
             rear_axis_offset: float, dt: float) -> np.ndarray:
        return self.step_batch(state, action, np.float64(rear_axis_offset), dt)

    def fit_action(self, current: np.ndarray, future: np.ndarray,
                   rear_axis_offset: float, dt: float) -> np.ndarray:
        """Closed-form inverse of step: recover [delta, a] from a transition.

        Exact for transitions produced by step with in-bounds actions; for
        arbitrary transitions the asin clamp returns the nearest reachable
        heading change.
        """
        current = np.asarray(current, dtype=np.float64)
        future = np.asarray(future, dtype=np.float64)
        accel = (future[3] - current[3]) / dt
        v1 = current[3] + accel * dt
        dpsi = shortest_angle_diff(future[2], current[2])
        if v1 == 0.0:
            delta = 0.0
        else:
            s = dpsi * rear_axis_offset / (v1 * dt)
            delta = math.asin(min(1.0, max(-1.0, s)))
        return self.clip_action(np.array([delta, accel]))

    def jacobian(self, state: np.ndarray, action: np.ndarray,
                 rear_axis_offset: float, dt: float) -> np.ndarray:
        """d(next state)/d(x, y, psi, v, delta, a), shape (4, 6).

        Valid where the action lies strictly inside the clip bounds and the
        heading update does not cross the +-pi wrap.
        """
        state = np.asarray(state, dtype=np.float64)
        action = np.asarray(action, dtype=np.float64)
        delta, accel = action
        psi, v = state[2], state[3]
        v1 = v + accel * dt
        h = psi + delta
        ch, sh = math.cos(h), math.sin(h)
        cd, sd = math.cos(delta), math.sin(delta)
        lr = rear_axis_offset
        jac = np.zeros((4, 6))
        jac[0] = [1, 0, -v1 * sh * dt, ch * dt, -v1 * sh * dt, ch * dt * dt]
        jac[1] = [0, 1, v1 * ch * dt, sh * dt, v1 * ch * dt, sh * dt * dt]
        jac[2] = [0, 0, 1, sd / lr * dt, v1 * cd / lr * dt, sd / lr * dt * dt]
        jac[3] = [0, 0, 0, 1, 0, dt]
        return jac


@dataclass(frozen=True)
class UnconstrainedModel:
    """Action is added to the state componentwise: [dx, dy, dpsi, dv]."""

    action_dim = 4

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        return np.asarray(action, dtype=np.float64)

    def step_batch(self, states: np.ndarray, actions: np.ndarray,
                   rear_axis_offset: np.ndarray, dt: float) -> np.ndarray:
        states = np.asarray(states, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        _check_inputs(states, actions, self.action_dim)
        out = states + actions
        out[..., 2] = normalize_angles(out[..., 2])
        return out

    def step(self, state, action, rear_axis_offset: float, dt: float) -> np.ndarray:
        return self.step_batch(state, action, np.float64(rear_axis_offset), dt)

    def fit_action(self, current, future, rear_axis_offset: float, dt: float) -> np.ndarray:
        current = np.asarray(current, dtype=np.float64)
        future = np.asarray(future, dtype=np.float64)
        out = future - current
        out[2] = shortest_angle_diff(future[2], current[2])
        return out

    def jacobian(self, state, action, rear_axis_offset: float, dt: float) -> np.ndarray:
        return np.hstack([np.eye(4), np.eye(4)])


@dataclass(frozen=True)
class TeleportingModel:
    """Action is the next state verbatim: [x, y, psi, v]."""

    action_dim = 4

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        return np.asarray(action, dtype=np.float64)

    def step_batch(self, states: np.ndarray, actions: np.ndarray,
                   rear_axis_offset: np.ndarray, dt: float) -> np.ndarray:
        states = np.asarray(states, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        _check_inputs(states, actions, self.action_dim)
        out = actions.astype(np.float64).copy()
        out[..., 2] = normalize_angles(out[..., 2])
        return out

    def step(self, state, action, rear_axis_offset: float, dt: float) -> np.ndarray:
        return self.step_batch(state, action, np.float64(rear_axis_offset), dt)

    def fit_action(self, current, future, rear_axis_offset: float, dt: float) -> np.ndarray:
        return np.asarray(future, dtype=np.float64).copy()

    def jacobian(self, state, action, rear_axis_offset: float, dt: float) -> np.ndarray:
        return np.hstack([np.zeros((4, 4)), np.eye(4)])


KinematicModel = BicycleModel | UnconstrainedModel | TeleportingModel

MODEL_KINDS = {
    "bicycle": BicycleModel,
    "unconstrained": UnconstrainedModel,
    "teleporting": TeleportingModel,
}


def model_from_config(cfg: dict | str) -> KinematicModel:
    """Build a model from a kind name or {"kind": ..., **params} mapping."""
    if isinstance(cfg, str):
        return MODEL_KINDS[cfg]()
    params = {k: v for k, v in cfg.items() if k != "kind"}
    if "accel_bounds" in params:
        params["accel_bounds"] = tuple(params["accel_bounds"])
    return MODEL_KINDS[cfg["kind"]](**params)


def finite_difference_jacobian(model: KinematicModel, state: np.ndarray,
                               action: np.ndarray, rear_axis_offset: float,
                               dt: float, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of step w.r.t. (state, action)."""
    state = np.asarray(state, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    cols = []
    for which, base in (("s", state), ("a", action)):
        for k in range(base.shape[0]):
            hi, lo = base.copy(), base.copy()
            hi[k] += h
            lo[k] -= h
            if which == "s":
                f_hi = model.step(hi, action, rear_axis_offset, dt)
                f_lo = model.step(lo, action, rear_axis_offset, dt)
            else:
                f_hi = model.step(state, hi, rear_axis_offset, dt)
                f_lo = model.step(state, lo, rear_axis_offset, dt)
            cols.append((f_hi - f_lo) / (2.0 * h))
    return np.stack(cols, axis=1)


def jacobian_check(model: KinematicModel, state: np.ndarray, action: np.ndarray,
                   rear_axis_offset: float, dt: float) -> float:
    """Max elementwise deviation between analytic and finite-difference Jacobians."""
    analytic = model.jacobian(state, action, rear_axis_offset, dt)
    numeric = finite_difference_jacobian(model, state, action, rear_axis_offset, dt)
    return float(np.abs(analytic - numeric).max())
