import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoest import liegroup as lg
from geoest.errors import NearPiSingularity, NonSkewInput
from geoest.liegroup import Pose

from conftest import random_rotvec

finite = st.floats(-10.0, 10.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def admissible(v, limit=math.pi - 1e-3):
    n = np.linalg.norm(v)
    return v if n < limit else v * (limit * 0.99 / n)


# hat / vex

def test_hat_zero():
    assert np.array_equal(lg.hat([0.0, 0.0, 0.0]), np.zeros((3, 3)))


def test_vex_hat_round_trip():
    assert np.allclose(lg.vex(lg.hat([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_hat_is_cross_product():
    assert np.allclose(lg.hat([1.0, 0.0, 0.0]) @ [0.0, 1.0, 0.0], [0.0, 0.0, 1.0])


def test_vex_rejects_asymmetric():
    with pytest.raises(NonSkewInput):
        lg.vex(np.eye(3))


@given(vec3, vec3)
def test_cross3_matches_numpy(a, b):
    assert np.allclose(lg.cross3(a, b), np.cross(a, b))


# exp / log on SO(3)

def test_exp_zero_is_identity():
    assert np.array_equal(lg.exp_so3(np.zeros(3)), np.eye(3))


def test_quarter_turn_about_x():
    assert np.allclose(lg.exp_so3([math.pi / 2, 0.0, 0.0]) @ [0.0, 1.0, 0.0], [0.0, 0.0, 1.0])


@given(vec3)
def test_rodrigues_trace(theta):
    r = lg.exp_so3(theta)
    assert np.trace(r) == pytest.approx(1.0 + 2.0 * math.cos(np.linalg.norm(theta)), abs=1e-12)
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


def test_exp_matches_scipy(rng):
    from scipy.spatial.transform import Rotation
    for _ in range(50):
        v = rng.normal(size=3) * 2
        assert np.allclose(lg.exp_so3(v), Rotation.from_rotvec(v).as_matrix(), atol=1e-13)


def test_log_identity():
    assert np.array_equal(lg.log_so3(np.eye(3)), np.zeros(3))


def test_log_round_trip_on_initial_attitude():
    assert np.allclose(lg.log_so3(lg.exp_so3([0.4, 0.2, 0.1])), [0.4, 0.2, 0.1], atol=1e-14)


def test_log_near_pi_raises():
    with pytest.raises(NearPiSingularity):
        lg.log_so3(lg.exp_so3([0.0, 0.0, math.pi]))


@given(vec3)
def test_log_exp_round_trip(v):
    v = admissible(v, math.pi - 2e-6)
    assert np.allclose(lg.log_so3(lg.exp_so3(v)), v, atol=1e-9)


def test_log_branch_near_pi_is_accurate(rng):
    # both sides of the axis-extraction switch at 3.0 rad
    for t in (2.99, 3.01, 3.1, math.pi - 1e-5):
        v = random_rotvec(rng) / 1.0
        v = v / np.linalg.norm(v) * t
        assert np.allclose(lg.log_so3(lg.exp_so3(v)), v, atol=1e-9)


def test_small_angle_series_continuity():
    for t in (lg.SMALL_ANGLE * (1 - 1e-9), lg.SMALL_ANGLE * (1 + 1e-9)):
        v = np.array([0.3, -0.5, 0.81]) / np.linalg.norm([0.3, -0.5, 0.81]) * t
        assert np.allclose(lg.log_so3(lg.exp_so3(v)), v, atol=1e-15)
        assert np.allclose(lg.a_matrix(v) @ lg.jr_so3(v), np.eye(3), atol=1e-14)


# principal angle

def test_principal_angle_basic():
    assert lg.principal_angle(np.eye(3)) == 0.0
    assert lg.principal_angle(lg.exp_so3([0.0, 0.0, 1.2])) == pytest.approx(1.2, abs=1e-14)


def test_principal_angle_initial_error_pair():
    axis = np.array([3, 6, 2]) / 7.0
    r0 = lg.exp_so3(math.pi / 4 * axis)
    rh0 = lg.exp_so3(math.pi / 2.5 * axis)
    # oracle: same axis, so the angle is the difference of the two angles
    assert lg.principal_angle(r0 @ rh0.T) == pytest.approx(abs(math.pi / 4 - math.pi / 2.5), abs=1e-14)


# Jacobians

def test_jr_finite_difference(rng):
    for _ in range(20):
        th = random_rotvec(rng, 2.5)
        d = rng.normal(size=3)
        eps = 1e-6
        lhs = lg.log_so3(lg.exp_so3(th).T @ lg.exp_so3(th + eps * d)) / eps
        assert np.allclose(lhs, lg.jr_so3(th) @ d, atol=1e-5)


def test_a_matrix_fixes_theta(rng):
    for _ in range(50):
        th = random_rotvec(rng, 3.0)
        assert np.allclose(lg.a_matrix(th) @ th, th, atol=1e-12)


def test_s_inverse_closed_form_matches_numeric(rng):
    for _ in range(50):
        th = random_rotvec(rng, 3.0)
        assert np.allclose(lg.s_inv_matrix(th), np.linalg.inv(lg.s_matrix(th)), atol=1e-10)


# SE(3)

def test_exp_se3_pure_translation():
    g = lg.exp_se3(np.array([0, 0, 0, 1.0, 2.0, 3.0]))
    assert np.array_equal(g.r, np.eye(3)) and np.allclose(g.b, [1, 2, 3])


def test_exp_se3_matches_matrix_exponential(rng):
    from scipy.linalg import expm
    for _ in range(20):
        eta = np.concatenate([random_rotvec(rng, 3.0), rng.normal(size=3)])
        x = np.zeros((4, 4))
        x[:3, :3] = lg.hat(eta[:3])
        x[:3, 3] = eta[3:]
        assert np.allclose(lg.to_matrix(lg.exp_se3(eta)), expm(x), atol=1e-12)


def test_log_se3_round_trip_theta_two(rng):
    for _ in range(50):
        th = rng.normal(size=3)
        th *= 2.0 / np.linalg.norm(th)
        eta = np.concatenate([th, rng.normal(size=3) * 5])
        assert np.allclose(lg.log_se3(lg.exp_se3(eta)), eta, atol=1e-9)


def test_exp_log_se3_on_initial_pose():
    g = Pose(lg.exp_so3([0.4, 0.2, 0.1]), np.array([1.0, 2.0, 3.0]))
    h = lg.exp_se3(lg.log_se3(g))
    assert np.allclose(h.r, g.r, atol=1e-12) and np.allclose(h.b, g.b, atol=1e-12)


def test_adjoint_identity_and_inverse(rng):
    assert np.array_equal(lg.adjoint_Ad(lg.identity_pose()), np.eye(6))
    for _ in range(20):
        g = lg.exp_se3(np.concatenate([random_rotvec(rng), rng.normal(size=3)]))
        assert np.allclose(lg.adjoint_Ad(g) @ lg.adjoint_Ad(lg.inverse(g)), np.eye(6), atol=1e-12)


def test_adjoint_is_homomorphism(rng):
    for _ in range(20):
        g1 = lg.exp_se3(np.concatenate([random_rotvec(rng), rng.normal(size=3)]))
        g2 = lg.exp_se3(np.concatenate([random_rotvec(rng), rng.normal(size=3)]))
        lhs = lg.adjoint_Ad(lg.compose(g1, g2))
        assert np.allclose(lhs, lg.adjoint_Ad(g1) @ lg.adjoint_Ad(g2), atol=1e-12)


def test_ad_pure_rotation_block():
    m = lg.ad(np.array([1.0, 0, 0, 0, 0, 0]))
    assert np.array_equal(m[3:, :3], np.zeros((3, 3)))
    assert np.array_equal(m[:3, :3], lg.hat([1.0, 0, 0]))


def test_ad_star_apply_matches_transpose(rng):
    for _ in range(20):
        xi, mu = rng.normal(size=6), rng.normal(size=6)
        assert np.allclose(lg.ad_star_apply(xi, mu), lg.ad(xi).T @ mu, atol=1e-13)


def test_g_matrix_zero_is_identity():
    assert np.allclose(lg.g_matrix(np.zeros(6)), np.eye(6), atol=1e-15)


def test_g_matrix_fixes_eta_example():
    eta = np.array([0.4, 0.2, 0.1, 1.0, 2.0, 3.0])
    assert np.allclose(lg.g_matrix(eta) @ eta, eta, atol=1e-12)


def test_g_matrix_block_equals_series(rng):
    for _ in range(500):
        eta = np.concatenate([random_rotvec(rng, 3.0), rng.normal(size=3) * 3])
        assert np.allclose(lg.g_matrix(eta), lg.g_matrix_series(eta), atol=1e-8)


def test_g_matrix_is_kinematics_jacobian(rng):
    """d/dt log(exp(eta) exp(t xi)) at t=0 equals G(eta) xi (central difference)."""
    for _ in range(30):
        eta = np.concatenate([random_rotvec(rng, 2.8), rng.normal(size=3)])
        xi = rng.normal(size=6)
        eps = 1e-5
        gp = lg.compose(lg.exp_se3(eta), lg.exp_se3(eps * xi))
        gm = lg.compose(lg.exp_se3(eta), lg.exp_se3(-eps * xi))
        fd = (lg.log_se3(gp) - lg.log_se3(gm)) / (2 * eps)
        ref = lg.g_matrix(eta) @ xi
        assert np.linalg.norm(fd - ref) <= 1e-5 * max(1.0, np.linalg.norm(ref))


@settings(max_examples=300)
@given(vec3, vec3)
def test_g_matrix_lemma_property(th, be):
    eta = np.concatenate([admissible(th), be])
    assert np.linalg.norm(lg.g_matrix(eta) @ eta - eta) <= 1e-9 * max(1.0, np.linalg.norm(eta))


def test_orthonormalize_projects(rng):
    r = lg.exp_so3(random_rotvec(rng)) + 1e-6 * rng.normal(size=(3, 3))
    q = lg.orthonormalize(r)
    assert np.allclose(q.T @ q, np.eye(3), atol=1e-14)
    assert np.linalg.det(q) == pytest.approx(1.0)
    assert np.linalg.norm(q - r) < 1e-5


def test_check_exp_coords_guard():
    with pytest.raises(NearPiSingularity):
        lg.check_exp_coords(np.array([math.pi, 0, 0, 0, 0, 0]))
