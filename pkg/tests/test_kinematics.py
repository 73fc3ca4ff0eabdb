import math
from functools import reduce

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from fdiasim.kinematics import (
    DHParams,
    JointLimits,
    builtin_model,
    chain_transforms,
    forward_kinematics,
    fk_pose_jacobian,
    jacobian,
    matrix_from_rpy,
    numerical_jacobian,
    parse_model,
    rpy_from_matrix,
    wrap_angle,
)

# Independent oracle: a from-scratch DH chain (different construction than the
# library path) with scipy doing the angle extraction.


def oracle_dh_transform(a, alpha, d, theta):
    rz = np.array(
        [
            [math.cos(theta), -math.sin(theta), 0.0, 0.0],
            [math.sin(theta), math.cos(theta), 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    tz = np.eye(4)
    tz[2, 3] = d
    tx = np.eye(4)
    tx[0, 3] = a
    rx = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, math.cos(alpha), -math.sin(alpha), 0.0],
            [0.0, math.sin(alpha), math.cos(alpha), 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return rz @ tz @ tx @ rx


def oracle_pose(q, model):
    mats = [
        oracle_dh_transform(model.a[i], model.alpha[i], model.d[i], q[i] + model.theta_offset[i])
        for i in range(model.n)
    ]
    T = reduce(np.matmul, mats)
    rpy = Rotation.from_matrix(T[:3, :3]).as_euler("xyz")
    return np.concatenate([T[:3, 3], rpy])


def rel_jac_err(q, model, h=1e-6):
    Ja = jacobian(q, model)
    Jn = numerical_jacobian(q, model, h)
    return np.max(np.abs(Ja - Jn)) / (1.0 + np.max(np.abs(Ja)))


# --- forward kinematics ------------------------------------------------------

def test_planar_straight_arm(planar2):
    dh, _ = planar2
    pose = forward_kinematics([0.0, 0.0], dh)
    assert pose[:3] == pytest.approx([2.0, 0.0, 0.0], abs=1e-15)
    assert pose[3:] == pytest.approx([0.0, 0.0, 0.0], abs=1e-15)


def test_planar_rigid_rotation(planar2):
    dh, _ = planar2
    pose = forward_kinematics([math.pi / 2.0, 0.0], dh)
    assert pose[:3] == pytest.approx([0.0, 2.0, 0.0], abs=1e-15)
    assert pose[5] == pytest.approx(math.pi / 2.0, abs=1e-15)


def test_planar_closed_form(planar2):
    dh, lim = planar2
    rng = np.random.default_rng(11)
    for _ in range(200):
        q = rng.uniform(lim.disp_min, lim.disp_max)
        pose = forward_kinematics(q, dh)
        x = math.cos(q[0]) + math.cos(q[0] + q[1])
        y = math.sin(q[0]) + math.sin(q[0] + q[1])
        assert abs(pose[0] - x) <= 1e-12
        assert abs(pose[1] - y) <= 1e-12
        assert abs(pose[2]) <= 1e-12


def test_6dof_pose_matches_independent_chain(lrmate, q0_rad):
    dh, lim = lrmate
    rng = np.random.default_rng(7)
    samples = [q0_rad] + [rng.uniform(lim.disp_min, lim.disp_max) for _ in range(50)]
    for q in samples:
        pose = forward_kinematics(q, dh)
        expected = oracle_pose(q, dh)
        assert np.allclose(pose[:3], expected[:3], atol=1e-12)
        assert np.max(np.abs(wrap_angle(pose[3:] - expected[3:]))) <= 1e-9


def test_position_invariant_under_full_turn(lrmate):
    dh, lim = lrmate
    rng = np.random.default_rng(13)
    for _ in range(50):
        q = rng.uniform(lim.disp_min, lim.disp_max)
        j = rng.integers(0, dh.n)
        q2 = q.copy()
        q2[j] += 2.0 * math.pi
        p1 = forward_kinematics(q, dh)
        p2 = forward_kinematics(q2, dh)
        assert np.allclose(p1[:3], p2[:3], atol=1e-12)


def test_dimension_mismatch_rejected(lrmate):
    dh, _ = lrmate
    with pytest.raises(ValueError):
        forward_kinematics([0.0, 0.0], dh)
    with pytest.raises(ValueError):
        forward_kinematics([np.nan] * 6, dh)


# --- jacobians ---------------------------------------------------------------

def test_planar_jacobian_straight_pose(planar2):
    dh, _ = planar2
    J = jacobian([0.0, 0.0], dh)
    assert J[0, 0] == pytest.approx(0.0, abs=1e-15)   # dx/dq1
    assert J[1, 0] == pytest.approx(2.0, abs=1e-15)   # dy/dq1
    assert J[1, 1] == pytest.approx(1.0, abs=1e-15)   # dy/dq2


def test_jacobian_matches_finite_differences(lrmate, planar2):
    rng = np.random.default_rng(17)
    for dh, lim in (lrmate, planar2):
        for _ in range(300):
            q = rng.uniform(lim.disp_min, lim.disp_max)
            assert rel_jac_err(q, dh) <= 1e-6


def test_numerical_jacobian_planar_matches_analytic(planar2):
    dh, _ = planar2
    Ja = jacobian([0.0, 0.0], dh)
    Jn = numerical_jacobian([0.0, 0.0], dh, h=1e-6)
    assert np.max(np.abs(Ja - Jn)) <= 1e-8


def test_numerical_jacobian_converges_quadratically(lrmate):
    dh, _ = lrmate
    rng = np.random.default_rng(19)
    q = rng.uniform(-1.0, 1.0, 6)
    Ja = jacobian(q, dh)
    err = lambda h: np.max(np.abs(numerical_jacobian(q, dh, h) - Ja))
    # Coarse steps are truncation-dominated: quartering h cuts the error ~16x.
    assert err(4e-3) / err(1e-3) == pytest.approx(16.0, rel=0.5)
    # At h=1e-6 rounding dominates but the error is far below the coarse one.
    assert err(1e-6) <= err(1e-3) / 100.0


def test_zero_length_chain():
    # All-zero DH rows leave the origin fixed: position rows vanish. The yaw
    # row stays 1 because every joint still spins the end frame about z.
    dh = DHParams(a=np.zeros(3), alpha=np.zeros(3), d=np.zeros(3), theta_offset=np.zeros(3))
    Jn = numerical_jacobian([0.1, -0.2, 0.3], dh, h=1e-6)
    assert np.allclose(Jn[:3], 0.0, atol=1e-9)
    assert np.allclose(Jn[5], 1.0, atol=1e-9)
    assert np.allclose(jacobian([0.1, -0.2, 0.3], dh), Jn, atol=1e-9)


# --- degenerate orientation --------------------------------------------------

def gimbal_model():
    # q2 = +/-pi/2 drives the end frame exactly onto the degenerate pitch.
    return DHParams(
        a=np.array([0.3, 0.3]),
        alpha=np.array([-math.pi / 2.0, 0.0]),
        d=np.zeros(2),
        theta_offset=np.zeros(2),
    )


def test_rpy_roundtrip_including_degenerate():
    rng = np.random.default_rng(23)
    for _ in range(200):
        rpy = rng.uniform(-math.pi, math.pi, 3)
        R = matrix_from_rpy(*rpy)
        out = matrix_from_rpy(*rpy_from_matrix(R))
        assert np.allclose(out, R, atol=1e-12)
    for pitch in (math.pi / 2.0, -math.pi / 2.0):
        for _ in range(50):
            roll, yaw = rng.uniform(-math.pi, math.pi, 2)
            R = matrix_from_rpy(roll, pitch, yaw)
            r2, p2, y2 = rpy_from_matrix(R)
            assert r2 == 0.0
            assert p2 == pytest.approx(pitch, abs=1e-12)
            assert np.allclose(matrix_from_rpy(r2, p2, y2), R, atol=1e-8)


def test_jacobian_finite_at_degenerate_pitch():
    dh = gimbal_model()
    q_lock = np.array([0.0, math.pi / 2.0])
    pose, J = fk_pose_jacobian(q_lock, dh)
    assert abs(pose[4] - math.pi / 2.0) <= 1e-12
    assert np.all(np.isfinite(J))
    # Approaching the lock from a perturbed pose, analytic and finite
    # differences still agree.
    q_near = np.array([0.0, math.pi / 2.0 - 1e-4])
    assert rel_jac_err(q_near, dh, h=1e-8) <= 1e-4


# --- model plumbing ----------------------------------------------------------

def test_builtin_models_load():
    for name in ("planar2", "lrmate"):
        dh, lim = builtin_model(name)
        assert dh.n == lim.n
    with pytest.raises(ValueError):
        builtin_model("ur5")


def test_model_file_roundtrip(tmp_path, lrmate):
    dh, lim = lrmate
    path = tmp_path / "model.txt"
    rows = "\n".join(
        f"{dh.a[i]:.17g} {dh.alpha[i]:.17g} {dh.d[i]:.17g} {dh.theta_offset[i]:.17g}"
        for i in range(dh.n)
    )
    path.write_text(
        "joints: 6\n"
        f"disp_min_rad: {' '.join(f'{v:.17g}' for v in lim.disp_min)}\n"
        f"disp_max_rad: {' '.join(f'{v:.17g}' for v in lim.disp_max)}\n"
        f"vel_max_rad_s: {' '.join(f'{v:.17g}' for v in lim.vel_max)}\n"
        + rows + "\n"
    )
    from fdiasim.kinematics import load_model_file

    dh2, lim2 = load_model_file(path)
    assert np.array_equal(dh2.a, dh.a)
    assert np.array_equal(dh2.alpha, dh.alpha)
    assert np.array_equal(dh2.d, dh.d)
    assert np.array_equal(dh2.theta_offset, dh.theta_offset)
    assert np.array_equal(lim2.vel_max, lim.vel_max)


def test_model_validation():
    with pytest.raises(ValueError):
        JointLimits(disp_min=[1.0], disp_max=[0.0], vel_max=[1.0])
    with pytest.raises(ValueError):
        JointLimits(disp_min=[0.0], disp_max=[1.0], vel_max=[0.0])
    with pytest.raises(ValueError):
        parse_model("joints: 2\ndisp_min_rad: -1 -1\ndisp_max_rad: 1 1\n0 0 0 0\n")


def test_chain_transforms_are_cumulative(lrmate):
    dh, _ = lrmate
    q = np.radians([5.0, -20.0, 15.0, 30.0, -40.0, 60.0])
    transforms = chain_transforms(q, dh)
    assert len(transforms) == 6
    expected = reduce(
        np.matmul,
        [
            oracle_dh_transform(dh.a[i], dh.alpha[i], dh.d[i], q[i] + dh.theta_offset[i])
            for i in range(4)
        ],
    )
    assert np.allclose(transforms[3], expected, atol=1e-12)
