"""Forward kinematics and Jacobians for serial revolute arms described by
Denavit-Hartenberg tables.

Conventions
-----------
* Classic DH rows ``(a, alpha, d, theta_offset)``; joint ``i`` contributes
  ``Rz(q_i + theta_offset_i) @ Tz(d_i) @ Tx(a_i) @ Rx(alpha_i)`` to the chain.
* A pose is a plain 6-vector ``[x, y, z, roll, pitch, yaw]`` in meters and
  radians, where ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
* Within ``GIMBAL_EPS`` of pitch = +/-pi/2 the angle extraction sets roll = 0
  and folds the remaining rotation into yaw; the Jacobian clamps the rate
  mapping the same way, so both stay finite and deterministic.

All functions are pure; models and limits are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

# |cos(pitch)| below this triggers the degenerate roll-pitch-yaw branch.
GIMBAL_EPS = 1e-8

BUILTIN_MODELS = ("planar2", "lrmate")


def wrap_angle(x):
    """Map angles to [-pi, pi) (shortest-arc representative)."""
    return np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi


def _as_vector(x, n, name):
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class JointLimits:
    """Per-joint displacement bounds (rad) and symmetric velocity caps (rad/s)."""

    disp_min: np.ndarray
    disp_max: np.ndarray
    vel_max: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.disp_min).size
        object.__setattr__(self, "disp_min", _as_vector(self.disp_min, n, "disp_min"))
        object.__setattr__(self, "disp_max", _as_vector(self.disp_max, n, "disp_max"))
        object.__setattr__(self, "vel_max", _as_vector(self.vel_max, n, "vel_max"))
        if not np.all(self.disp_min < self.disp_max):
            raise ValueError("disp_min must be strictly below disp_max")
        if not np.all(self.vel_max > 0.0):
            raise ValueError("vel_max must be positive")

    @property
    def n(self) -> int:
        return self.disp_min.size


@dataclass(frozen=True)
class DHParams:
    """DH table for an n-joint revolute chain: a (m), alpha (rad), d (m),
    theta_offset (rad), one entry per joint."""

    a: np.ndarray
    alpha: np.ndarray
    d: np.ndarray
    theta_offset: np.ndarray
    name: str = ""

    def __post_init__(self):
        n = np.asarray(self.a).size
        if n < 1:
            raise ValueError("a chain needs at least one joint")
        object.__setattr__(self, "a", _as_vector(self.a, n, "a"))
        object.__setattr__(self, "alpha", _as_vector(self.alpha, n, "alpha"))
        object.__setattr__(self, "d", _as_vector(self.d, n, "d"))
        object.__setattr__(
            self, "theta_offset", _as_vector(self.theta_offset, n, "theta_offset")
        )
        # Link twists are constants of the model; cache their trig once.
        object.__setattr__(self, "_cos_alpha", np.cos(self.alpha))
        object.__setattr__(self, "_sin_alpha", np.sin(self.alpha))

    @property
    def n(self) -> int:
        return self.a.size


def _check_joint_vector(q, n):
    q = np.asarray(q, dtype=float)
    if q.shape != (n,):
        raise ValueError(f"joint vector must have shape ({n},), got {q.shape}")
    if not np.isfinite(q.sum()):
        raise ValueError("joint vector contains non-finite entries")
    return q


def _chain_array(q, model: DHParams) -> np.ndarray:
    """Cumulative base->frame_i transforms stacked as an (n, 4, 4) array."""
    q = _check_joint_vector(q, model.n)
    n = model.n
    theta = q + model.theta_offset
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = model._cos_alpha, model._sin_alpha
    links = np.zeros((n, 4, 4))
    links[:, 0, 0] = ct
    links[:, 0, 1] = -st * ca
    links[:, 0, 2] = st * sa
    links[:, 0, 3] = model.a * ct
    links[:, 1, 0] = st
    links[:, 1, 1] = ct * ca
    links[:, 1, 2] = -ct * sa
    links[:, 1, 3] = model.a * st
    links[:, 2, 1] = sa
    links[:, 2, 2] = ca
    links[:, 2, 3] = model.d
    links[:, 3, 3] = 1.0
    cum = np.empty((n, 4, 4))
    cum[0] = links[0]
    for i in range(1, n):
        np.matmul(cum[i - 1], links[i], out=cum[i])
    return cum


def chain_transforms(q, model: DHParams) -> list[np.ndarray]:
    """Cumulative base->frame_i homogeneous transforms, one per joint."""
    return list(_chain_array(q, model))


def rpy_from_matrix(R) -> tuple[float, float, float]:
    """Extract (roll, pitch, yaw) with R = Rz(yaw) @ Ry(pitch) @ Rx(roll).

    Within GIMBAL_EPS of pitch = +/-pi/2, roll is set to 0 and the remaining
    rotation folded into yaw (deterministic degenerate branch).
    """
    R = np.asarray(R)
    cp = math.hypot(R[2, 1], R[2, 2])
    if cp < GIMBAL_EPS:
        pitch = math.copysign(math.pi / 2.0, -R[2, 0])
        if pitch > 0.0:
            yaw = math.atan2(R[1, 2], R[1, 1])
        else:
            yaw = math.atan2(-R[1, 2], R[1, 1])
        return 0.0, pitch, yaw
    roll = math.atan2(R[2, 1], R[2, 2])
    pitch = math.atan2(-R[2, 0], cp)
    yaw = math.atan2(R[1, 0], R[0, 0])
    return roll, pitch, yaw


def matrix_from_rpy(roll, pitch, yaw) -> np.ndarray:
    """Rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def _pose_from_transform(T) -> np.ndarray:
    roll, pitch, yaw = rpy_from_matrix(T[:3, :3])
    return np.array([T[0, 3], T[1, 3], T[2, 3], roll, pitch, yaw])


def forward_kinematics(q, model: DHParams) -> np.ndarray:
    """End-effector pose [x, y, z, roll, pitch, yaw] for joint angles q."""
    return _pose_from_transform(_chain_array(q, model)[-1])


def _rpy_rate_map_inv(pitch, yaw) -> np.ndarray:
    # Inverse of B in omega = B @ [roll_dot, pitch_dot, yaw_dot]; the clamp on
    # cos(pitch) keeps it finite at the degenerate pitch.
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    if abs(cp) < GIMBAL_EPS:
        cp = GIMBAL_EPS if cp >= 0.0 else -GIMBAL_EPS
    tp = sp / cp
    return np.array(
        [
            [cy / cp, sy / cp, 0.0],
            [-sy, cy, 0.0],
            [cy * tp, sy * tp, 1.0],
        ]
    )


def fk_pose_jacobian(q, model: DHParams) -> tuple[np.ndarray, np.ndarray]:
    """Pose and the 6xn Jacobian of the pose map, sharing one chain pass.

    Position rows come from the geometric Jacobian; angular-velocity rows are
    mapped into roll-pitch-yaw rates so the result is the derivative of
    :func:`forward_kinematics`.
    """
    cum = _chain_array(q, model)
    T_end = cum[-1]
    p_end = T_end[:3, 3]
    n = model.n

    # Joint i rotates about frame (i-1)'s z axis through frame (i-1)'s origin.
    axes = np.empty((n, 3))
    origins = np.empty((n, 3))
    axes[0] = (0.0, 0.0, 1.0)
    origins[0] = 0.0
    if n > 1:
        axes[1:] = cum[:-1, :3, 2]
        origins[1:] = cum[:-1, :3, 3]

    arms = p_end - origins
    J = np.empty((6, n))
    J[0] = axes[:, 1] * arms[:, 2] - axes[:, 2] * arms[:, 1]
    J[1] = axes[:, 2] * arms[:, 0] - axes[:, 0] * arms[:, 2]
    J[2] = axes[:, 0] * arms[:, 1] - axes[:, 1] * arms[:, 0]
    roll, pitch, yaw = rpy_from_matrix(T_end[:3, :3])
    J[3:] = _rpy_rate_map_inv(pitch, yaw) @ axes.T
    pose = np.array([p_end[0], p_end[1], p_end[2], roll, pitch, yaw])
    return pose, J


def jacobian(q, model: DHParams) -> np.ndarray:
    """6xn Jacobian d(pose)/dq of :func:`forward_kinematics`."""
    return fk_pose_jacobian(q, model)[1]


def numerical_jacobian(q, model: DHParams, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, column by column.

    Orientation rows are differenced by shortest arc so a +/-pi crossing does
    not produce a spurious 2*pi jump.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    q = _check_joint_vector(q, model.n)
    J = np.empty((6, model.n))
    for i in range(model.n):
        dq = np.zeros(model.n)
        dq[i] = h
        hi = forward_kinematics(q + dq, model)
        lo = forward_kinematics(q - dq, model)
        col = hi - lo
        col[3:] = wrap_angle(col[3:])
        J[:, i] = col / (2.0 * h)
    return J


# --- model files -----------------------------------------------------------

def load_model_file(path) -> tuple[DHParams, JointLimits]:
    """Parse a plain-text model file.

    Layout: optional ``#`` comment lines, a header with ``joints:``,
    ``disp_min_rad:``, ``disp_max_rad:``, ``vel_max_rad_s:``, then one
    ``a alpha d theta_offset`` row per joint.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_model(text, name=str(path))


def parse_model(text: str, name: str = "") -> tuple[DHParams, JointLimits]:
    header: dict[str, str] = {}
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            key, value = line.split(":", 1)
            header[key.strip()] = value.strip()
        else:
            rows.append([float(tok) for tok in line.split()])
    for key in ("joints", "disp_min_rad", "disp_max_rad", "vel_max_rad_s"):
        if key not in header:
            raise ValueError(f"model file missing header field '{key}'")
    n = int(header["joints"])
    if len(rows) != n:
        raise ValueError(f"expected {n} DH rows, found {len(rows)}")
    table = np.array(rows, dtype=float)
    if table.shape != (n, 4):
        raise ValueError("each DH row must be: a alpha d theta_offset")
    dh = DHParams(
        a=table[:, 0],
        alpha=table[:, 1],
        d=table[:, 2],
        theta_offset=table[:, 3],
        name=header.get("name", name),
    )
    limits = JointLimits(
        disp_min=[float(t) for t in header["disp_min_rad"].split()],
        disp_max=[float(t) for t in header["disp_max_rad"].split()],
        vel_max=[float(t) for t in header["vel_max_rad_s"].split()],
    )
    if limits.n != n:
        raise ValueError("joint-limit vectors must match the joint count")
    return dh, limits


def builtin_model(name: str) -> tuple[DHParams, JointLimits]:
    """Load a shipped model: 'planar2' (analytic test arm) or 'lrmate'
    (6-DOF chain with approximate catalog-style dimensions)."""
    if name not in BUILTIN_MODELS:
        raise ValueError(f"unknown builtin model '{name}' (have {BUILTIN_MODELS})")
    text = (
        resources.files("fdiasim") / "models" / f"{name}.txt"
    ).read_text("utf-8")
    return parse_model(text, name=name)
