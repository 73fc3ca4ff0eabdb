"""Fixed-step closed-loop engine: plant, attacked channels, controller,
detector.

Per step, in order: compromise the measurement, compute the control command
from it, update the detector with exactly what the controller saw, compromise
the command, project it through the joint limits, then integrate the plant
with explicit Euler. Ground truth and channel-visible series are both logged;
identical configurations produce bit-identical logs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .attacks import AttackPair, apply_command_attack, apply_observable_attack
from .controller import (
    ControllerGains,
    Trajectory,
    control_law_from,
    project_joint_limits,
    sample_trajectory,
)
from .detector import DetectorGains, DetectorState, detector_step_from, initial_state
from .kinematics import DHParams, JointLimits, fk_pose_jacobian, forward_kinematics


class SimulationError(RuntimeError):
    """Raised when the loop state stops being finite."""


@dataclass(frozen=True)
class SimConfig:
    """Everything one closed-loop run needs; immutable and reusable."""

    model: DHParams
    limits: JointLimits
    trajectory: Trajectory
    attack: AttackPair
    q0: np.ndarray
    controller_gains: ControllerGains = field(default_factory=ControllerGains)
    detector_gains: DetectorGains = field(default_factory=DetectorGains)
    dt: float = 0.01
    duration: float = 60.0

    def __post_init__(self):
        q0 = np.asarray(self.q0, dtype=float)
        if q0.shape != (self.model.n,):
            raise ValueError(f"q0 must have shape ({self.model.n},)")
        object.__setattr__(self, "q0", q0)
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must cover at least one step")
        if self.attack.n != self.model.n:
            raise ValueError("attack dimension does not match the model")
        if self.limits.n != self.model.n:
            raise ValueError("joint-limit dimension does not match the model")
        if np.any(q0 < self.limits.disp_min) or np.any(q0 > self.limits.disp_max):
            raise ValueError("q0 violates displacement limits")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass
class SimLog:
    """Time-indexed record of one run (uniform grid, one row per sample).

    Ground truth q and pose r sit next to the channel-visible q~, r' and the
    detector trace, so undetectability and impact can be read off one log.
    """

    t: np.ndarray
    q: np.ndarray
    q_tilde: np.ndarray
    u: np.ndarray
    u_tilde: np.ndarray
    r: np.ndarray
    r_prime: np.ndarray
    r_d: np.ndarray
    r_hat: np.ndarray
    beta_hat: np.ndarray
    clamped: np.ndarray
    label: str = ""

    @property
    def n(self) -> int:
        return self.q.shape[1]

    def __len__(self) -> int:
        return self.t.size

    def column_names(self) -> list[str]:
        n = self.n
        pose_units = ("x_m", "y_m", "z_m", "roll_rad", "pitch_rad", "yaw_rad")
        names = ["t_s"]
        names += [f"q{i + 1}_rad" for i in range(n)]
        names += [f"qtilde{i + 1}_rad" for i in range(n)]
        names += [f"u{i + 1}_radps" for i in range(n)]
        names += [f"utilde{i + 1}_radps" for i in range(n)]
        for prefix in ("r", "rprime", "rd", "rhat"):
            names += [f"{prefix}_{u}" for u in pose_units]
        names += ["beta_hat", "limit_clamped"]
        return names

    def to_csv(self, path) -> None:
        """Deterministic CSV: 17-significant-digit floats, RFC-4180 rows."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names())
            for k in range(len(self)):
                row = [f"{self.t[k]:.17g}"]
                for block in (self.q, self.q_tilde, self.u, self.u_tilde,
                              self.r, self.r_prime, self.r_d, self.r_hat):
                    row += [f"{v:.17g}" for v in block[k]]
                row.append(f"{self.beta_hat[k]:.17g}")
                row.append("1" if self.clamped[k] else "0")
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "SimLog":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(tok) for tok in row] for row in reader])
        n = sum(1 for name in header if name.startswith("q") and name.endswith("_rad")
                and not name.startswith("qtilde"))
        if data.ndim != 2 or data.shape[1] != 4 * n + 27:
            raise ValueError(f"malformed log CSV {path}")
        cols = iter(range(data.shape[1]))

        def take(count):
            return data[:, [next(cols) for _ in range(count)]]
        t = take(1).ravel()
        q, q_tilde, u, u_tilde = take(n), take(n), take(n), take(n)
        r, r_prime, r_d, r_hat = take(6), take(6), take(6), take(6)
        beta_hat = take(1).ravel()
        clamped = take(1).ravel().astype(bool)
        return cls(t=t, q=q, q_tilde=q_tilde, u=u, u_tilde=u_tilde, r=r,
                   r_prime=r_prime, r_d=r_d, r_hat=r_hat, beta_hat=beta_hat,
                   clamped=clamped)


@dataclass(frozen=True)
class ErrorMetrics:
    """Per-step task-space position errors (m) and their arithmetic means.

    Observed error compares the reference against the pose reconstructed from
    delivered measurements; actual error uses ground truth.
    """

    obs_errors: np.ndarray
    act_errors: np.ndarray
    mean_obs: float
    mean_act: float


def _require_finite(name: str, value: np.ndarray, t: float) -> None:
    # A non-finite entry poisons the sum, so one reduction suffices.
    if not np.isfinite(value.sum()):
        raise SimulationError(f"non-finite {name} at t={t:.6g} s")


def _control_quantities(q, t, cfg: SimConfig):
    """Channel, controller and projection evaluations for one instant."""
    q_tilde = apply_observable_attack(q, cfg.attack.observable)
    pose_obs, J_obs = fk_pose_jacobian(q_tilde, cfg.model)
    r_d = sample_trajectory(cfg.trajectory, t)
    u = control_law_from(pose_obs, J_obs, r_d, cfg.controller_gains)
    u_tilde_raw = apply_command_attack(u, cfg.attack.command)
    u_tilde = project_joint_limits(q, u_tilde_raw, cfg.limits)
    clamped = not np.array_equal(u_tilde, u_tilde_raw)
    return q_tilde, pose_obs, J_obs, r_d, u, u_tilde, clamped


def step(q, cfg: SimConfig, det: DetectorState, t: float):
    """One closed-loop step.

    Returns ``(q_next, row, det_next)`` where ``row`` is the log entry for
    time ``t`` (it carries the detector state *entering* the step, aligned
    with the signals the detector consumed).
    """
    q = np.asarray(q, dtype=float)
    _require_finite("q", q, t)
    q_tilde, pose_obs, J_obs, r_d, u, u_tilde, clamped = _control_quantities(q, t, cfg)
    _require_finite("q_tilde", q_tilde, t)
    _require_finite("u", u, t)
    if not np.isfinite(det.beta_hat):
        raise SimulationError(f"non-finite beta_hat at t={t:.6g} s")
    det_next = detector_step_from(
        det, pose_obs, J_obs, u, cfg.detector_gains, cfg.dt
    )
    row = (
        t, q, q_tilde, u, u_tilde, forward_kinematics(q, cfg.model), pose_obs,
        r_d, det.r_hat, det.beta_hat, clamped,
    )
    q_next = q + cfg.dt * u_tilde
    return q_next, row, det_next


def run_scenario(cfg: SimConfig) -> SimLog:
    """Full-horizon deterministic run; rows at t = 0, dt, ..., duration.

    Row k records the state entering step k, so the final row carries the
    detector estimate after the last update and the terminal ground truth.
    """
    n_steps = cfg.n_steps
    n = cfg.model.n
    rows = n_steps + 1
    log = SimLog(
        t=np.empty(rows),
        q=np.empty((rows, n)),
        q_tilde=np.empty((rows, n)),
        u=np.empty((rows, n)),
        u_tilde=np.empty((rows, n)),
        r=np.empty((rows, 6)),
        r_prime=np.empty((rows, 6)),
        r_d=np.empty((rows, 6)),
        r_hat=np.empty((rows, 6)),
        beta_hat=np.empty(rows),
        clamped=np.zeros(rows, dtype=bool),
        label=cfg.attack.label,
    )

    def record(k, row):
        (log.t[k], log.q[k], log.q_tilde[k], log.u[k], log.u_tilde[k],
         log.r[k], log.r_prime[k], log.r_d[k], log.r_hat[k], log.beta_hat[k],
         log.clamped[k]) = row

    q = cfg.q0.copy()
    det = initial_state(apply_observable_attack(q, cfg.attack.observable), cfg.model)
    for k in range(n_steps):
        q, row, det = step(q, cfg, det, k * cfg.dt)
        record(k, row)

    # Terminal row: evaluate without integrating further.
    t_end = n_steps * cfg.dt
    _require_finite("q", q, t_end)
    q_tilde, pose_obs, _, r_d, u, u_tilde, clamped = _control_quantities(q, t_end, cfg)
    record(
        n_steps,
        (t_end, q, q_tilde, u, u_tilde, forward_kinematics(q, cfg.model),
         pose_obs, r_d, det.r_hat, det.beta_hat, clamped),
    )
    return log


def compute_metrics(log: SimLog) -> ErrorMetrics:
    """Position-error series and means (observed vs actual)."""
    if len(log) == 0:
        raise ValueError("empty log")
    obs = np.linalg.norm(log.r_d[:, :3] - log.r_prime[:, :3], axis=1)
    act = np.linalg.norm(log.r_d[:, :3] - log.r[:, :3], axis=1)
    return ErrorMetrics(
        obs_errors=obs,
        act_errors=act,
        mean_obs=float(obs.mean()),
        mean_act=float(act.mean()),
    )


_COMPARE_GROUPS = ("q", "q_tilde", "u", "u_tilde", "r", "r_prime", "r_d", "beta_hat")


@dataclass(frozen=True)
class RunComparison:
    """Max/mean absolute discrepancies between two runs, per column group."""

    max_abs: dict[str, float]
    mean_abs: dict[str, float]

    def undetectable_consistent(self, tol: float = 1e-9) -> bool:
        """True when the channel-visible joint series agree within tol."""
        return self.max_abs["q_tilde"] <= tol


def compare_runs(a: SimLog, b: SimLog) -> RunComparison:
    """Column-group discrepancy report; requires identical time grids."""
    if a.t.shape != b.t.shape or not np.array_equal(a.t, b.t):
        raise ValueError("runs are not on the same time grid")
    if a.n != b.n:
        raise ValueError("runs have different joint counts")
    max_abs: dict[str, float] = {}
    mean_abs: dict[str, float] = {}
    for name in _COMPARE_GROUPS:
        diff = np.abs(getattr(a, name) - getattr(b, name))
        max_abs[name] = float(diff.max())
        mean_abs[name] = float(diff.mean())
    return RunComparison(max_abs=max_abs, mean_abs=mean_abs)
