import math

import numpy as np
import pytest

from geoest import dynamics as dy
from geoest import liegroup as lg
from geoest import se3obs as so
from geoest.errors import NearPiSingularity
from geoest.liegroup import Pose

from conftest import random_rotvec

BODY = dy.RigidBodyParams(21.0, np.diag([2.56, 3.01, 2.98]))
FT_GAINS = so.FiniteTimeGains(50.0, 23, 21, 0.03)
FORCE_GAINS = so.ForceObserverGains(1.0, 2.0, 3.0)
GRAV_GAINS = so.GravityObserverGains((1.12, 1.0), 1.0, 0.2, (1.2, 1.0))
MU = 50.0


def wrench_truth(duration=3.0, h=0.005):
    force = dy.constant_wrench([0.01, -0.02, 0.015], [0.1, 0.05, -0.2])
    st = dy.TruthState(Pose(lg.exp_so3([0.4, 0.2, 0.1]), np.array([1.0, 2.0, 3.0])),
                       np.array([0.1, -0.3, 0.2, 0.5, 0.1, -0.2]), 0.0)
    return dy.DenseTruth(dy.integrate_truth(st, BODY, force, h, int(round(duration / h))), BODY, force)


def gravity_truth(duration=3.0, h=0.005):
    # normalized units: body about 10 length units from a body with mu = 50
    force = dy.SphericalGravity(MU)
    r = 10.0
    st = dy.TruthState(Pose(lg.exp_so3([0.4, 0.2, 0.1]), np.array([r, 0.0, 0.0])),
                       np.concatenate([[0.05, -0.02, 0.03], lg.exp_so3([0.4, 0.2, 0.1]).T @ [0, math.sqrt(MU / r), 0]]), 0.0)
    params = dy.RigidBodyParams(21.0, np.diag([2.56, 3.01, 2.98]), length_unit=1e3)
    return dy.DenseTruth(dy.integrate_truth(st, params, force, h, int(round(duration / h))), params, force), params


def perturbed_state(meas, rng, angle=None, mu0=0.0):
    """Random error with rotation angle up to 2.5 rad, or exactly ``angle``."""
    g, xi, _ = meas(0.0)
    rot = random_rotvec(rng, 2.5)
    if angle is not None:
        rot *= angle / np.linalg.norm(rot)
    ghat = lg.compose(g, lg.exp_se3(np.concatenate([rot, rng.normal(size=3)])))
    return so.initial_state(ghat, xi + rng.normal(size=6) * 0.3, g, 0.0, mu0)


def test_gain_validation():
    with pytest.raises(ValueError):
        so.FiniteTimeGains(50.0, 22, 21, 1.0)
    with pytest.raises(ValueError):
        so.FiniteTimeGains(50.0, 5, 1, 1.0)
    with pytest.raises(ValueError):
        so.ForceObserverGains(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        so.GravityObserverGains(-1.0, 1.0, 1.0, 1.0)


def test_initial_state_recovers_velocity(rng):
    g = lg.exp_se3(np.concatenate([random_rotvec(rng), rng.normal(size=3)]))
    ghat = lg.exp_se3(np.concatenate([random_rotvec(rng, 2.0), rng.normal(size=3)]))
    xihat = rng.normal(size=6)
    st = so.initial_state(ghat, xihat, g)
    assert np.allclose(st.xihat, xihat, atol=1e-12)
    back = lg.compose(g, lg.exp_se3(-st.eta))
    assert np.allclose(back.r, ghat.r, atol=1e-12) and np.allclose(back.b, ghat.b, atol=1e-12)


def test_zero_error_is_equilibrium():
    meas = wrench_truth(0.5)
    g, xi, phi = meas(0.0)
    z = np.zeros(6)
    for d in (so.force_rhs(z, xi, phi, xi, BODY, FORCE_GAINS), so.finite_time_rhs(z, xi, phi, xi, BODY, FT_GAINS)):
        assert np.allclose(d[0], 0) and np.allclose(d[1], np.linalg.solve(BODY.inertia6, lg.ad_star_apply(xi, BODY.inertia6 @ xi) + phi))
    gm, params = gravity_truth(0.5)
    g, xi, _ = gm(0.0)
    eta_dot, breve_dot, mu_dot = so.gravity_rhs(z, xi, MU, g, xi, params, GRAV_GAINS)
    assert np.allclose(eta_dot, 0) and mu_dot == 0.0


def test_finite_time_zero_error_stays_zero():
    # spin and drift along a principal axis: constant twist, exact g(t) = g0 exp(t xi)
    g0 = Pose(lg.exp_so3([0.4, 0.2, 0.1]), np.array([1.0, 2.0, 3.0]))
    xi0 = np.array([0.3, 0.0, 0.0, 0.5, 0.0, 0.0])

    def meas(t):
        return lg.compose(g0, lg.exp_se3(t * xi0)), xi0.copy(), np.zeros(6)

    g, xi, _ = meas(0.0)
    st = so.initial_state(g, xi, g)
    out = so.run_observer("finite_time", st, meas, BODY, FT_GAINS, 0.01, 20)
    assert np.max(np.abs(out[-1].eta)) < 1e-15


def test_lyapunov_positive_and_zero_only_at_origin(rng):
    xi = rng.normal(size=6)
    for kind, gains in (("force", FORCE_GAINS), ("finite_time", FT_GAINS), ("gravity", GRAV_GAINS)):
        st0 = so.ObserverState(np.zeros(6), xi, MU, 0.0, lg.identity_pose())
        assert so.lyapunov_value(kind, st0, xi, BODY, gains, MU) == 0.0
        for _ in range(10_000 // 3):
            eta = np.concatenate([random_rotvec(rng), rng.normal(size=3)])
            st = so.ObserverState(eta, xi + rng.normal(size=6), MU + rng.normal(), 0.0, lg.identity_pose())
            assert so.lyapunov_value(kind, st, xi, BODY, gains, MU) > 0.0
    with pytest.raises(ValueError):
        so.lyapunov_value("bogus", st0, xi, BODY, FORCE_GAINS)


def _fd_rate(kind, st, meas, params, gains, rhs, mu_true=None, eps=1e-5):
    def v_at(tau):
        g, xi, phi = meas(st.t + tau)
        ed, bd, md = rhs(st.t)
        shifted = so.ObserverState(st.eta + tau * ed, st.breve_xi + tau * bd, st.muhat + tau * md,
                                   st.t + tau, st.ghat)
        return so.lyapunov_value(kind, shifted, xi, params, gains, mu_true)
    return (v_at(eps) - v_at(-eps)) / (2 * eps)


def test_force_lyapunov_rate_fd(rng):
    meas = wrench_truth(1.0, 0.001)
    for _ in range(10):
        st = perturbed_state(meas, rng, angle=2.0)
        st = so.ObserverState(st.eta, st.breve_xi, 0.0, 0.5, st.ghat)
        g, xi, phi = meas(0.5)
        rhs = lambda t: so.force_rhs(st.eta, st.breve_xi, phi, xi, BODY, FORCE_GAINS)
        fd = _fd_rate("force", st, meas, BODY, FORCE_GAINS, rhs)
        assert fd == pytest.approx(so.lyapunov_rate("force", st, xi, BODY, FORCE_GAINS), rel=1e-5)


def test_gravity_lyapunov_rate_fd(rng):
    meas, params = gravity_truth(1.0, 0.001)
    for _ in range(10):
        st = perturbed_state(meas, rng, angle=2.0, mu0=MU * 3)
        st = so.ObserverState(st.eta, st.breve_xi, st.muhat, 0.5, st.ghat)
        g, xi, _ = meas(0.5)
        rhs = lambda t: so.gravity_rhs(st.eta, st.breve_xi, st.muhat, g, xi, params, GRAV_GAINS)
        fd = _fd_rate("gravity", st, meas, params, GRAV_GAINS, rhs, MU)
        assert fd == pytest.approx(so.lyapunov_rate("gravity", st, xi, params, GRAV_GAINS), rel=1e-5)


def test_finite_time_rate_bound_fd(rng):
    gains = so.FiniteTimeGains(50.0, 23, 21, 1.0)
    meas = wrench_truth(1.0, 0.001)
    for _ in range(10):
        st = perturbed_state(meas, rng, angle=2.0)
        st = so.ObserverState(st.eta, st.breve_xi, 0.0, 0.5, st.ghat)
        g, xi, phi = meas(0.5)
        rhs = lambda t: so.finite_time_rhs(st.eta, st.breve_xi, phi, xi, BODY, gains)
        fd = _fd_rate("finite_time", st, meas, BODY, gains, rhs)
        v = so.lyapunov_value("finite_time", st, xi, BODY, gains)
        assert fd == pytest.approx(so.lyapunov_rate("finite_time", st, xi, BODY, gains), rel=1e-5)
        assert fd <= -(2 ** gains.inv_p) * gains.k * v ** gains.inv_p * (1 - 0.05)


def chart_safe_starts(kind, meas, params, gains, rng, n=20, mu0=0.0, mu_true=None):
    """Random starts whose Lyapunov sublevel set keeps the rotation angle below pi.

    Both V's are bounded below by c/2 |rotation part of eta|^2 with c = min(1, k2), so V0 < c/2 (pi - 0.01)^2
    confines eta to the exponential chart for the whole run.
    """
    c = min(1.0, gains.k2)
    g, xi, _ = meas(0.0)
    out = []
    while len(out) < n:
        rot = random_rotvec(rng, math.pi - 0.1)
        ghat = lg.compose(g, lg.exp_se3(np.concatenate([rot, 0.1 * rng.normal(size=3)])))
        st = so.initial_state(ghat, xi + 0.05 * rng.normal(size=6), g, 0.0, mu0)
        if so.lyapunov_value(kind, st, xi, params, gains, mu_true) < 0.5 * c * (math.pi - 0.01) ** 2:
            out.append(st)
    return out


def _assert_monotone(kind, starts, meas, params, gains, h, steps, mu_true=None):
    for st0 in starts:
        states = so.run_observer(kind, st0, meas, params, gains, h, steps)
        v = [so.lyapunov_value(kind, s, meas(s.t)[1], params, gains, mu_true) for s in states]
        assert np.max(np.diff(v)) <= h * h
        r = states[-1].ghat.r
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-9)


def test_force_lyapunov_monotone(rng):
    meas = wrench_truth(1.0)
    starts = chart_safe_starts("force", meas, BODY, FORCE_GAINS, rng)
    _assert_monotone("force", starts, meas, BODY, FORCE_GAINS, 0.01, 100)


def test_finite_time_lyapunov_monotone(rng):
    meas = wrench_truth(1.0)
    starts = [perturbed_state(meas, rng) for _ in range(20)]
    _assert_monotone("finite_time", starts, meas, BODY, FT_GAINS, 0.01, 100)


def test_gravity_lyapunov_monotone(rng):
    meas, params = gravity_truth(2.0)
    starts = chart_safe_starts("gravity", meas, params, GRAV_GAINS, rng, mu0=1.05 * MU, mu_true=MU)
    _assert_monotone("gravity", starts, meas, params, GRAV_GAINS, 0.01, 200, MU)


def test_finite_time_faster_with_larger_k(rng):
    meas = wrench_truth(2.0)
    st0 = perturbed_state(meas, rng, angle=1.0)
    times = []
    for k in (10.0, 50.0, 100.0):
        gains = so.FiniteTimeGains(k, 23, 21, 1.0)
        st, t_hit = st0, None
        for _ in range(200):
            st = so.finite_time_observer_step(st, meas, BODY, gains, 0.01)
            if so.lyapunov_value("finite_time", st, meas(st.t)[1], BODY, gains) < 1e-10:
                t_hit = st.t
                break
        assert t_hit is not None
        times.append(t_hit)
    assert times[0] > times[1] > times[2]


def test_near_pi_guard():
    meas = wrench_truth(0.5)
    g, xi, _ = meas(0.0)
    ghat = lg.compose(g, Pose(lg.exp_so3([0, 0, math.pi - 1e-9]), np.zeros(3)))
    with pytest.raises(NearPiSingularity):
        so.initial_state(ghat, xi, g)
