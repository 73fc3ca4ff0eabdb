"""Operator-side control: transpose-Jacobian velocity law, joint-limit
projection, and reference trajectories (including the built-in smiley path).

The control law never inverts the Jacobian, so it stays well defined at
singular configurations; orientation errors are wrapped per component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import (
    DHParams,
    JointLimits,
    fk_pose_jacobian,
    wrap_angle,
)


@dataclass(frozen=True)
class ControllerGains:
    """Proportional gain mapping task error to joint velocity (1/s).

    Scalar, or a 6-vector weighting the task-error components before the
    transpose map.
    """

    kp: float | np.ndarray = 5.0

    def __post_init__(self):
        kp = np.asarray(self.kp, dtype=float)
        if kp.ndim == 0:
            kp = float(kp)
            if not (kp > 0.0 and math.isfinite(kp)):
                raise ValueError("kp must be positive and finite")
        else:
            if kp.shape != (6,):
                raise ValueError("vector kp must have 6 entries")
            if not np.all(np.isfinite(kp)) or not np.all(kp > 0.0):
                raise ValueError("kp entries must be positive and finite")
        object.__setattr__(self, "kp", kp)


def task_error(r_d, pose) -> np.ndarray:
    """Desired-minus-actual pose error with wrapped orientation components."""
    e = np.asarray(r_d, dtype=float) - np.asarray(pose, dtype=float)
    e[3:] = wrap_angle(e[3:])
    return e


def control_law_from(pose_obs, J_obs, r_d, gains: ControllerGains) -> np.ndarray:
    """Transpose-Jacobian law from precomputed observed pose and Jacobian."""
    return J_obs.T @ (gains.kp * task_error(r_d, pose_obs))


def control_law(q_obs, r_d, gains: ControllerGains, model: DHParams) -> np.ndarray:
    """Joint-velocity command u = J(q_obs)^T (kp * (r_d - f(q_obs))).

    ``q_obs`` is whatever the measurement channel delivered; the law has no
    way to know whether it is ground truth.
    """
    pose_obs, J_obs = fk_pose_jacobian(q_obs, model)
    return control_law_from(pose_obs, J_obs, r_d, gains)


def project_joint_limits(q, u, limits: JointLimits) -> np.ndarray:
    """Clamp u to velocity caps and zero outward motion at displacement bounds.

    Idempotent; inward motion at a bound passes through untouched.
    """
    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.clip(u, -limits.vel_max, limits.vel_max)
    out = np.where((q >= limits.disp_max) & (out > 0.0), 0.0, out)
    out = np.where((q <= limits.disp_min) & (out < 0.0), 0.0, out)
    return out


# --- reference trajectories --------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear pose reference: waypoint times (s) and 6-poses."""

    times: np.ndarray
    poses: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        poses = np.asarray(self.poses, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("need at least two waypoints")
        if poses.shape != (times.size, 6):
            raise ValueError("poses must be (len(times), 6)")
        if not np.all(np.diff(times) > 0.0):
            raise ValueError("waypoint times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(poses))):
            raise ValueError("non-finite trajectory data")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "poses", poses)

    @property
    def duration(self) -> float:
        return float(self.times[-1])


def sample_trajectory(traj: Trajectory, t: float) -> np.ndarray:
    """Linear interpolation at time t, clamped to the endpoints.

    Orientation components interpolate along the shortest arc.
    """
    times = traj.times
    if t <= times[0]:
        return traj.poses[0].copy()
    if t >= times[-1]:
        return traj.poses[-1].copy()
    j = int(np.searchsorted(times, t, side="right"))
    t0, t1 = times[j - 1], times[j]
    frac = (t - t0) / (t1 - t0)
    a, b = traj.poses[j - 1], traj.poses[j]
    out = a + frac * (b - a)
    out[3:] = a[3:] + frac * wrap_angle(b[3:] - a[3:])
    return out


def smiley_trajectory(
    center,
    radius: float,
    duration: float,
    *,
    eye_segments: int = 48,
    mouth_segments: int = 32,
    transit_speed_factor: float = 2.0,
    time_quantum: float | None = None,
) -> Trajectory:
    """Face-drawing path in the vertical (y, z) plane through ``center``.

    Left eye circle, transit, right eye circle, transit, lower mouth arc.
    Eyes have radius 0.15*radius at horizontal offsets +/-0.35*radius (and
    the same vertical offset); the mouth is a 120-degree arc of radius
    0.6*radius through the bottom of the face. Orientation is constant. Speed
    is uniform within each feature; transits run ``transit_speed_factor``
    times faster, which is what produces the tracking-error spikes between
    features. Waypoint times snap to a grid of ``time_quantum`` seconds
    (coarsest feasible value when None) so segment corners land on common
    simulation grids.
    """
    center = np.asarray(center, dtype=float)
    if center.shape != (6,):
        raise ValueError("center must be a 6-pose")
    if radius <= 0.0 or duration <= 0.0:
        raise ValueError("radius and duration must be positive")

    cx = center[:3]
    orient = center[3:]

    def in_plane(h, v):
        return cx + np.array([0.0, h, v])

    def arc(center2, r, a0, a1, segments):
        angles = np.linspace(a0, a1, segments + 1)
        return [
            in_plane(center2[0] + r * math.cos(a), center2[1] + r * math.sin(a))
            for a in angles
        ]

    eye_r = 0.15 * radius
    eye_off = 0.35 * radius
    mouth_r = 0.6 * radius
    # Each eye starts and ends at its top point; the mouth runs left to right
    # through the bottom of the face circle.
    left_eye = arc((-eye_off, eye_off), eye_r, math.pi / 2, 2.5 * math.pi, eye_segments)
    right_eye = arc((eye_off, eye_off), eye_r, math.pi / 2, 2.5 * math.pi, eye_segments)
    mouth = arc((0.0, 0.0), mouth_r, 7.0 * math.pi / 6.0, 11.0 * math.pi / 6.0, mouth_segments)

    points = np.array(left_eye + right_eye + mouth)
    seg_lengths = np.linalg.norm(np.diff(points, axis=0), axis=1)
    weights = seg_lengths.copy()
    transit_a = len(left_eye) - 1          # left eye end -> right eye start
    transit_b = transit_a + len(right_eye)  # right eye end -> mouth start
    weights[transit_a] /= transit_speed_factor
    weights[transit_b] /= transit_speed_factor
    if not np.all(weights > 0.0):
        raise ValueError("degenerate zero-length segment in smiley construction")

    times = np.concatenate([[0.0], np.cumsum(weights)])
    times *= duration / times[-1]
    if time_quantum is None:
        for quantum in (0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001):
            snapped = np.round(times / quantum) * quantum
            if np.all(np.diff(snapped) > 0.0):
                times = snapped
                break
    elif time_quantum > 0.0:
        times = np.round(times / time_quantum) * time_quantum
        if not np.all(np.diff(times) > 0.0):
            raise ValueError(
                "time_quantum too coarse for the requested duration/segments"
            )
    poses = np.hstack([points, np.tile(orient, (len(points), 1))])
    return Trajectory(times, poses)


def smiley_start_offset(radius: float) -> np.ndarray:
    """Offset of the path's first waypoint (top of the left eye) from the
    face center, in the (y, z) drawing plane."""
    return np.array([0.0, -0.35 * radius, 0.5 * radius])


# --- trajectory files --------------------------------------------------------

def load_trajectory(path) -> Trajectory:
    """Read waypoint rows: time x y z roll pitch yaw (``#`` comments allowed)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                rows.append([float(tok) for tok in line.split()])
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 7:
        raise ValueError("trajectory rows must be: time x y z roll pitch yaw")
    return Trajectory(times=data[:, 0], poses=data[:, 1:])


def save_trajectory(path, traj: Trajectory) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# time_s x_m y_m z_m roll_rad pitch_rad yaw_rad\n")
        for t, pose in zip(traj.times, traj.poses):
            fh.write(" ".join(f"{v:.17g}" for v in (t, *pose)) + "\n")
