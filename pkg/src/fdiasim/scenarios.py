"""Ready-made closed-loop runs on the shipped 6-DOF arm.

Five named configurations: a no-attack baseline, a detectable command-scaling
attack, and three coordinated attacks (scaling, reflection, shear) that pass
the undetectability conditions. All draw the same smiley path starting at the
standard posture [0, -10, 10, 0, 0, 0] degrees.
"""

from __future__ import annotations

import numpy as np

from .attacks import PRESET_KINDS, preset_scenario
from .controller import ControllerGains, smiley_start_offset, smiley_trajectory
from .detector import DetectorGains
from .kinematics import builtin_model, forward_kinematics
from .simulator import SimConfig

SCENARIO_NAMES = PRESET_KINDS

DEFAULT_Q0_DEG = np.array([0.0, -10.0, 10.0, 0.0, 0.0, 0.0])
DEFAULT_SMILEY_RADIUS = 0.12


def scenario_config(
    name: str,
    *,
    dt: float = 0.01,
    duration: float = 60.0,
    kp: float = 5.0,
    detector_gains: DetectorGains | None = None,
    q0_deg=None,
    smiley_radius: float = DEFAULT_SMILEY_RADIUS,
) -> SimConfig:
    """Build the configuration for one named scenario.

    The smiley is anchored so its first waypoint coincides with the start
    posture's end-effector position: the nominal run begins with zero task
    error.
    """
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario '{name}' (have {SCENARIO_NAMES})")
    model, limits = builtin_model("lrmate")
    q0 = np.radians(DEFAULT_Q0_DEG if q0_deg is None else np.asarray(q0_deg, dtype=float))
    attack = preset_scenario(name, q0)
    start_pose = forward_kinematics(q0, model)
    center = start_pose.copy()
    center[:3] -= smiley_start_offset(smiley_radius)
    trajectory = smiley_trajectory(center, smiley_radius, duration)
    return SimConfig(
        model=model,
        limits=limits,
        trajectory=trajectory,
        attack=attack,
        q0=q0,
        controller_gains=ControllerGains(kp=kp),
        detector_gains=detector_gains or DetectorGains(),
        dt=dt,
        duration=duration,
    )
