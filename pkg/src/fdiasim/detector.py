"""Adaptive attack detector fed only channel-delivered signals.

The observer tracks the end-effector pose reconstructed from the (possibly
compromised) measurements and adapts a scalar gain estimate beta_hat for the
command channel:

    r_hat_dot    = beta_hat * J(q~) u - k1 (r_hat - f(q~))
    beta_hat_dot = -k2 u^T J(q~)^T (r_hat - f(q~)) - s (beta_hat - P(beta_hat))

where P clamps beta_hat to [epsilon, 1]. A hard clamp after each Euler step
makes that range invariant exactly, not just asymptotically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import DHParams, fk_pose_jacobian, forward_kinematics


@dataclass(frozen=True)
class DetectorGains:
    """k1: observer pull-in (1/s); k2: adaptation gain; s_gain: projection
    pull-back; epsilon: lower bound of the admissible beta_hat range."""

    k1: float = 10.0
    k2: float = 200.0
    s_gain: float = 50.0
    epsilon: float = 0.01

    def __post_init__(self):
        if not (self.k1 > 0.0 and self.k2 > 0.0 and self.s_gain > 0.0):
            raise ValueError("k1, k2 and s_gain must be positive")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class DetectorState:
    """Observer pose estimate and scalar command-gain estimate."""

    r_hat: np.ndarray
    beta_hat: float

    def __post_init__(self):
        r_hat = np.asarray(self.r_hat, dtype=float)
        if r_hat.shape != (6,):
            raise ValueError("r_hat must be a 6-pose")
        object.__setattr__(self, "r_hat", r_hat)
        object.__setattr__(self, "beta_hat", float(self.beta_hat))


def projection_gamma(beta_hat: float, epsilon: float) -> float:
    """Clamp beta_hat to the admissible interval [epsilon, 1]."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    return min(max(beta_hat, epsilon), 1.0)


def initial_state(q_tilde0, model: DHParams) -> DetectorState:
    """Innocent-until-proven start: beta_hat = 1, r_hat at the observed pose
    (zero initial residual, no startup transient)."""
    return DetectorState(r_hat=forward_kinematics(q_tilde0, model), beta_hat=1.0)


def detector_step_from(
    state: DetectorState,
    pose_obs: np.ndarray,
    J_obs: np.ndarray,
    u: np.ndarray,
    gains: DetectorGains,
    dt: float,
) -> DetectorState:
    """One explicit-Euler update from precomputed observed pose and Jacobian."""
    r_tilde = state.r_hat - pose_obs
    Ju = J_obs @ u
    r_hat = state.r_hat + dt * (state.beta_hat * Ju - gains.k1 * r_tilde)
    pull = gains.s_gain * (
        state.beta_hat - projection_gamma(state.beta_hat, gains.epsilon)
    )
    beta_hat = state.beta_hat + dt * (-gains.k2 * float(Ju @ r_tilde) - pull)
    beta_hat = projection_gamma(beta_hat, gains.epsilon)
    return DetectorState(r_hat=r_hat, beta_hat=beta_hat)


def detector_step(
    state: DetectorState,
    q_tilde,
    u,
    gains: DetectorGains,
    dt: float,
    model: DHParams,
) -> DetectorState:
    """One explicit-Euler update driven by channel-delivered (q~, u)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    q_tilde = np.asarray(q_tilde, dtype=float)
    u = np.asarray(u, dtype=float)
    if not (
        np.all(np.isfinite(q_tilde))
        and np.all(np.isfinite(u))
        and np.all(np.isfinite(state.r_hat))
        and math.isfinite(state.beta_hat)
    ):
        raise ValueError("non-finite detector input")
    pose_obs, J_obs = fk_pose_jacobian(q_tilde, model)
    return detector_step_from(state, pose_obs, J_obs, u, gains, dt)


def residual_dynamics_check(log, gains: DetectorGains, model: DHParams) -> float:
    """Numerically certify the observer-residual identity on a logged run.

    For a coordinated attack whose channel gains cancel, the residual
    r~ = r_hat - f(q~) obeys r~_dot = (beta_hat - 1) J(q~) u - k1 r~. Returns
    the max over steps of the infinity-norm gap between the finite-differenced
    residual and that expression; first-order integration leaves an O(dt) gap.
    """
    n_rows = log.t.size
    if n_rows < 2:
        raise ValueError("log too short: need at least 2 samples")
    dt = float(log.t[1] - log.t[0])
    r_tilde = log.r_hat - log.r_prime
    worst = 0.0
    for k in range(n_rows - 1):
        _, J_obs = fk_pose_jacobian(log.q_tilde[k], model)
        predicted = (log.beta_hat[k] - 1.0) * (J_obs @ log.u[k]) - gains.k1 * r_tilde[k]
        gap = (r_tilde[k + 1] - r_tilde[k]) / dt - predicted
        worst = max(worst, float(np.abs(gap).max()))
    return worst
