"""Affine man-in-the-middle attacks on the measurement and command channels.

An attack on one channel is the map ``v -> S @ v + d``. A coordinated pair
(observable-side, command-side) is undetectable from the operator's side of
the loop exactly when three algebraic conditions hold:

1. ``S_x @ S_u = I`` (channel gains cancel),
2. ``S_x @ q0 + d_x = q0`` (the start posture is a fixed point), and
3. ``d_u = 0`` (no command offset).

``check_conditions`` scores a pair against these; ``synthesize_undetectable``
builds a passing pair from any invertible observable gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class SingularAttackError(ValueError):
    """Observable gain is not invertible, so no command gain can cancel it."""


def _as_float_array(x, name, shape=None):
    arr = np.asarray(x, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr.sum()):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class AffineAttack:
    """One channel's attack: gain matrix S (n x n) and offset vector d (n)."""

    S: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError(f"S must be square, got shape {S.shape}")
        object.__setattr__(self, "S", _as_float_array(S, "S"))
        object.__setattr__(self, "d", _as_float_array(self.d, "d", (S.shape[0],)))

    @property
    def n(self) -> int:
        return self.d.size

    @classmethod
    def identity(cls, n: int) -> "AffineAttack":
        return cls(np.eye(n), np.zeros(n))

    def is_identity(self) -> bool:
        return bool(
            np.array_equal(self.S, np.eye(self.n)) and not self.d.any()
        )


@dataclass(frozen=True)
class AttackPair:
    """Coordinated (observable, command) attack with a scenario label."""

    observable: AffineAttack
    command: AffineAttack
    label: str = ""

    def __post_init__(self):
        if self.observable.n != self.command.n:
            raise ValueError(
                f"channel dimensions differ: observable n={self.observable.n}, "
                f"command n={self.command.n}"
            )

    @property
    def n(self) -> int:
        return self.observable.n

    @classmethod
    def identity(cls, n: int, label: str = "nominal") -> "AttackPair":
        return cls(AffineAttack.identity(n), AffineAttack.identity(n), label)


@dataclass(frozen=True)
class ConditionReport:
    """Max-norm residuals of the three undetectability conditions.

    cond1: gain cancellation, cond2: start-posture fixed point (rad),
    cond3: command offset (rad/s).
    """

    cond1_residual: float
    cond2_residual: float
    cond3_residual: float
    tolerance: float

    @property
    def undetectable(self) -> bool:
        return (
            self.cond1_residual <= self.tolerance
            and self.cond2_residual <= self.tolerance
            and self.cond3_residual <= self.tolerance
        )

    @property
    def verdict(self) -> str:
        return "undetectable" if self.undetectable else "detectable"


def _apply(attack: AffineAttack, v, name) -> np.ndarray:
    v = _as_float_array(v, name, (attack.n,))
    return attack.S @ v + attack.d


def apply_observable_attack(q, attack: AffineAttack) -> np.ndarray:
    """Compromised measurement: S_x @ q + d_x."""
    return _apply(attack, q, "q")


def apply_command_attack(u, attack: AffineAttack) -> np.ndarray:
    """Compromised command: S_u @ u + d_u."""
    return _apply(attack, u, "u")


def to_homogeneous(attack: AffineAttack) -> np.ndarray:
    """(n+1) x (n+1) block form [[S, d], [0, 1]] of the affine map."""
    n = attack.n
    H = np.zeros((n + 1, n + 1))
    H[:n, :n] = attack.S
    H[:n, n] = attack.d
    H[n, n] = 1.0
    return H


def check_conditions(pair: AttackPair, q0, tol: float = 1e-9) -> ConditionReport:
    """Score an attack pair against the three undetectability conditions.

    The fixed-point residual is evaluated as ``(S_x - I) @ q0 + d_x`` so that
    exactly-constructed pairs report exactly zero.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = pair.n
    q0 = _as_float_array(q0, "q0", (n,))
    eye = np.eye(n)
    c1 = float(np.abs(pair.observable.S @ pair.command.S - eye).max())
    c2 = float(np.abs((pair.observable.S - eye) @ q0 + pair.observable.d).max())
    c3 = float(np.abs(pair.command.d).max()) if n else 0.0
    return ConditionReport(c1, c2, c3, tol)


def synthesize_undetectable(S_x, q0, *, cond_cap: float = 1e12) -> AttackPair:
    """Build an undetectable pair from an invertible observable gain.

    Sets S_u = S_x^-1 (with one Newton polish of the inverse), d_x so q0 is a
    fixed point of the observable map, and d_u = 0.
    """
    S_x = np.asarray(S_x, dtype=float)
    if S_x.ndim != 2 or S_x.shape[0] != S_x.shape[1]:
        raise ValueError(f"S_x must be square, got shape {S_x.shape}")
    n = S_x.shape[0]
    q0 = _as_float_array(q0, "q0", (n,))
    if not np.all(np.isfinite(S_x)):
        raise ValueError("S_x contains non-finite entries")
    cond = np.linalg.cond(S_x)
    if not math.isfinite(cond) or cond > cond_cap:
        raise SingularAttackError(
            f"S_x is singular or too ill-conditioned (cond={cond:.3g}); "
            "gain cancellation S_x @ S_u = I is unsatisfiable"
        )
    eye = np.eye(n)
    S_u = np.linalg.solve(S_x, eye)
    S_u = S_u + S_u @ (eye - S_x @ S_u)
    d_x = -((S_x - eye) @ q0)
    return AttackPair(
        observable=AffineAttack(S_x, d_x),
        command=AffineAttack(S_u, np.zeros(n)),
        label="synthesized",
    )


# --- scenario presets --------------------------------------------------------

PRESET_KINDS = ("nominal", "detectable", "scaling", "reflection", "shear")

# Detectable trial: plain command scaling with an observable offset; violates
# both the gain-cancellation and fixed-point conditions.
DETECTABLE_DX_DEG = np.array([0.0, 30.0, -30.0, 0.0, 0.0, 0.0])

_SHEAR_SX = np.eye(6) + np.diag(np.ones(5), k=1)
# Exact integer inverse of the unit upper-bidiagonal shear.
_SHEAR_SU = np.array(
    [
        [1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        [0.0, 1.0, -1.0, 1.0, -1.0, 1.0],
        [0.0, 0.0, 1.0, -1.0, 1.0, -1.0],
        [0.0, 0.0, 0.0, 1.0, -1.0, 1.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, -1.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ]
)


def preset_scenario(kind: str, q0) -> AttackPair:
    """Six-joint scenario presets.

    ``nominal`` is the identity pair and ``detectable`` a command-scaling
    attack that fails the conditions. ``scaling``, ``reflection`` and
    ``shear`` use the canonical gain matrices with the observable offset
    derived from the fixed-point condition at ``q0`` (radians), so all three
    pass ``check_conditions``.
    """
    q0 = _as_float_array(q0, "q0", (6,))
    eye = np.eye(6)
    if kind == "nominal":
        return AttackPair.identity(6, label="nominal")
    if kind == "detectable":
        return AttackPair(
            observable=AffineAttack(eye, np.radians(DETECTABLE_DX_DEG)),
            command=AffineAttack(0.25 * eye, np.zeros(6)),
            label="detectable",
        )
    if kind == "scaling":
        S_x, S_u = 0.25 * eye, 4.0 * eye
    elif kind == "reflection":
        S_x, S_u = -eye, -eye
    elif kind == "shear":
        S_x, S_u = _SHEAR_SX, _SHEAR_SU
    else:
        raise ValueError(f"unknown scenario kind '{kind}' (have {PRESET_KINDS})")
    d_x = -((S_x - eye) @ q0)
    return AttackPair(
        observable=AffineAttack(S_x, d_x),
        command=AffineAttack(S_u, np.zeros(6)),
        label=kind,
    )


# --- attack-pair files -------------------------------------------------------

def save_attack_pair(path, pair: AttackPair, *, units: str = "deg") -> None:
    """Write a pair as plain-text matrix blocks S_x, d_x, S_u, d_u.

    ``units`` applies to the offset vectors only (gains are dimensionless).
    """
    if units not in ("deg", "rad"):
        raise ValueError("units must be 'deg' or 'rad'")
    scale = 180.0 / math.pi if units == "deg" else 1.0

    def fmt_matrix(M):
        return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in M)

    def fmt_vector(v):
        return " ".join(f"{x * scale:.17g}" for x in v)

    lines = [
        f"units: {units}",
        f"label: {pair.label}",
        "S_x:",
        fmt_matrix(pair.observable.S),
        "d_x:",
        fmt_vector(pair.observable.d),
        "S_u:",
        fmt_matrix(pair.command.S),
        "d_u:",
        fmt_vector(pair.command.d),
        "",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def load_attack_pair(path) -> AttackPair:
    """Read a pair written by :func:`save_attack_pair` (blocks in order
    S_x, d_x, S_u, d_u; offsets converted per the units header)."""
    units = "rad"
    label = ""
    blocks: dict[str, list[list[float]]] = {}
    current: list[list[float]] | None = None
    order = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.endswith(":") and line[:-1] in ("S_x", "d_x", "S_u", "d_u"):
                name = line[:-1]
                current = blocks.setdefault(name, [])
                order.append(name)
                continue
            if ":" in line and current is None:
                key, value = line.split(":", 1)
                key, value = key.strip(), value.strip()
                if key == "units":
                    units = value
                elif key == "label":
                    label = value
                else:
                    raise ValueError(f"unknown attack-file header '{key}'")
                continue
            if current is None:
                raise ValueError(f"numeric data before any block header: '{line}'")
            current.append([float(tok) for tok in line.split()])
    if units not in ("deg", "rad"):
        raise ValueError(f"bad units '{units}' (want deg or rad)")
    missing = [k for k in ("S_x", "d_x", "S_u", "d_u") if k not in blocks]
    if missing:
        raise ValueError(f"attack file missing blocks: {missing}")
    scale = math.pi / 180.0 if units == "deg" else 1.0
    S_x = np.array(blocks["S_x"], dtype=float)
    S_u = np.array(blocks["S_u"], dtype=float)
    d_x = np.array(blocks["d_x"], dtype=float).ravel() * scale
    d_u = np.array(blocks["d_u"], dtype=float).ravel() * scale
    return AttackPair(AffineAttack(S_x, d_x), AffineAttack(S_u, d_u), label=label)


def load_matrix(path) -> np.ndarray:
    """Read a plain whitespace-separated matrix (``#`` comments allowed)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"no numeric rows in {path}")
    return np.array(rows, dtype=float)
