"""Deterministic closed-loop simulator and attack-synthesis toolkit for
affine false-data injection on kinematic manipulator control."""

from .attacks import (
    AffineAttack,
    AttackPair,
    ConditionReport,
    SingularAttackError,
    apply_command_attack,
    apply_observable_attack,
    check_conditions,
    load_attack_pair,
    preset_scenario,
    save_attack_pair,
    synthesize_undetectable,
    to_homogeneous,
)
from .controller import (
    ControllerGains,
    Trajectory,
    control_law,
    load_trajectory,
    project_joint_limits,
    sample_trajectory,
    smiley_trajectory,
)
from .detector import (
    DetectorGains,
    DetectorState,
    detector_step,
    initial_state,
    projection_gamma,
    residual_dynamics_check,
)
from .kinematics import (
    DHParams,
    JointLimits,
    builtin_model,
    forward_kinematics,
    jacobian,
    load_model_file,
    numerical_jacobian,
)
from .scenarios import DEFAULT_Q0_DEG, SCENARIO_NAMES, scenario_config
from .simulator import (
    ErrorMetrics,
    SimConfig,
    SimLog,
    SimulationError,
    compare_runs,
    compute_metrics,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AffineAttack",
    "AttackPair",
    "ConditionReport",
    "ControllerGains",
    "DEFAULT_Q0_DEG",
    "DHParams",
    "DetectorGains",
    "DetectorState",
    "ErrorMetrics",
    "JointLimits",
    "SCENARIO_NAMES",
    "SimConfig",
    "SimLog",
    "SimulationError",
    "SingularAttackError",
    "Trajectory",
    "apply_command_attack",
    "apply_observable_attack",
    "builtin_model",
    "check_conditions",
    "compare_runs",
    "compute_metrics",
    "control_law",
    "detector_step",
    "forward_kinematics",
    "initial_state",
    "jacobian",
    "load_attack_pair",
    "load_model_file",
    "load_trajectory",
    "numerical_jacobian",
    "preset_scenario",
    "project_joint_limits",
    "projection_gamma",
    "residual_dynamics_check",
    "run_scenario",
    "sample_trajectory",
    "save_attack_pair",
    "scenario_config",
    "smiley_trajectory",
    "synthesize_undetectable",
    "to_homogeneous",
]
