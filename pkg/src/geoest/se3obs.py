"""Model-based pose and velocity observers on SE(3).

Three observers share one error-state integrator:

* ``gravity``: asymptotic observer that also estimates the gravity parameter
  of a spherical central body;
* ``force``: asymptotic observer using measured forces and torques;
* ``finite_time``: finite-time convergent observer with fractional-power
  feedback.

The configuration error is h = g_hat^-1 g with exponential coordinates
eta = log(h), and breve_xi = Ad_{h^-1} xi_hat. Each observer integrates
(eta, breve_xi[, mu_hat]) with RK4 using eta_dot = G(eta)(xi - breve_xi);
the pose estimate is recovered as g_hat = g exp(-eta) and the velocity
estimate as xi_hat = Ad_h breve_xi.

Measurements are supplied by a callable ``meas(t) -> (g, xi, phi)`` so that
RK4 stages see measurements at their own times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import liegroup as lg
from .dynamics import RigidBodyParams, psi_g
from .liegroup import Pose

EPS_FT = 1e-9
MAX_SUBSTEPS = 4000


def _as6(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        return float(k) * np.eye(6)
    if k.shape == (2,):
        return np.diag([k[0]] * 3 + [k[1]] * 3)
    if k.shape == (6,):
        return np.diag(k)
    if k.shape != (6, 6):
        raise ValueError(f"gain of shape {k.shape} is not a 6 x 6 matrix")
    return k


def _check_pd(k, name):
    if np.any(np.linalg.eigvalsh(0.5 * (k + k.T)) <= 0.0):
        raise ValueError(f"{name} must be positive definite")


@dataclass(frozen=True)
class GravityObserverGains:
    """k1, k4 accept a scalar, a pair (rotational, translational) or a 6 x 6 matrix."""

    k1: np.ndarray
    k2: float
    k3: float
    k4: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k1", _as6(self.k1))
        object.__setattr__(self, "k4", _as6(self.k4))
        _check_pd(self.k1, "k1")
        _check_pd(self.k4, "k4")
        if self.k2 <= 0.0 or self.k3 <= 0.0:
            raise ValueError("k2 and k3 must be positive")


@dataclass(frozen=True)
class ForceObserverGains:
    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) <= 0.0:
            raise ValueError("gains must be positive")

    @property
    def kmat(self) -> np.ndarray:
        return np.diag([1.0] * 3 + [self.k2] * 3)


@dataclass(frozen=True)
class FiniteTimeGains:
    """p = p_num / p_den with odd integers and 1 < p < 2.

    The decay bound -2^(1/p) k V^(1/p) needs gamma >= 1; smaller gamma still
    converges in finite time but with a rate scaled by gamma^(1 - 1/p).
    """

    k: float
    p_num: int
    p_den: int
    gamma: float

    def __post_init__(self):
        if self.k <= 0.0 or self.gamma <= 0.0:
            raise ValueError("k and gamma must be positive")
        if self.p_num % 2 == 0 or self.p_den % 2 == 0:
            raise ValueError("p must be a ratio of odd integers")
        if not 1 < Fraction(self.p_num, self.p_den) < 2:
            raise ValueError("p must lie in (1, 2)")

    @property
    def inv_p(self) -> float:
        return self.p_den / self.p_num

    @property
    def rate_bound_factor(self) -> float:
        """Coefficient c in V_dot <= -c k V^(1/p)."""
        return 2.0 ** self.inv_p * min(1.0, self.gamma ** (1.0 - self.inv_p))


@dataclass(frozen=True)
class ObserverState:
    """Error-state of an SE(3) observer.

    ``eta``: exponential coordinates of g_hat^-1 g; ``breve_xi``: Ad_{h^-1} xi_hat;
    ``muhat``: gravity parameter estimate (gravity observer only); ``ghat``:
    pose estimate at time ``t``.
    """

    eta: np.ndarray
    breve_xi: np.ndarray
    muhat: float
    t: float
    ghat: Pose

    @property
    def xihat(self) -> np.ndarray:
        return lg.adjoint_Ad(lg.exp_se3(self.eta)) @ self.breve_xi


GravityObserverState = FiniteTimeState = ForceObserverState = ObserverState


def initial_state(ghat0: Pose, xihat0, g0: Pose, t0: float = 0.0, muhat0: float = 0.0) -> ObserverState:
    h = lg.compose(lg.inverse(ghat0), g0)
    eta = lg.log_se3(h)
    breve = lg.adjoint_Ad(lg.inverse(h)) @ np.asarray(xihat0, dtype=float)
    return ObserverState(eta, breve, float(muhat0), float(t0), ghat0)


# ---------------------------------------------------------------------------
# right-hand sides; each returns (eta_dot, breve_xi_dot, muhat_dot)


def gravity_rhs(eta, breve, muhat, g, xi, params: RigidBodyParams, gains: GravityObserverGains):
    ii = params.inertia6
    gm = lg.g_matrix(eta)
    xt = xi - breve
    eta_dot = gm @ xt
    psi = psi_g(g, params)
    mom = ii @ xi
    k1eta = gains.k1 @ eta
    ell = xt + k1eta
    s = (-lg.ad_star_apply(k1eta, mom) + gains.k2 * (gm.T @ eta)
         + ii @ (gains.k1 @ eta_dot) + gains.k4 @ ell)
    breve_dot = params.inertia6_inv @ (lg.ad_star_apply(breve, mom) + muhat * psi + s)
    return eta_dot, breve_dot, float(ell @ psi) / gains.k3


def force_rhs(eta, breve, phi, xi, params: RigidBodyParams, gains: ForceObserverGains):
    ii = params.inertia6
    kmat = gains.kmat
    gm = lg.g_matrix(eta)
    xt = xi - breve
    eta_dot = gm @ xt
    u = gains.k1 * eta + xt
    rhs = (lg.ad_star_apply(-kmat @ (gains.k1 * eta - breve), ii @ xi) + phi
           + gains.k1 * (ii @ eta_dot) + lg.g_matrix(kmat @ eta).T @ eta + gains.k3 * u)
    return eta_dot, params.inertia6_inv @ rhs, 0.0


def _ft_terms(eta, xt, ii, gains: FiniteTimeGains):
    """(a, u, q) with a = (eta^T eta)^(1/p-1) (0 inside the guard), u, q = u^T II u."""
    n2 = float(eta @ eta)
    a = math.exp((gains.inv_p - 1.0) * math.log(n2)) if n2 > EPS_FT**2 else 0.0
    u = xt + gains.k * a * eta
    return a, u, float(u @ ii @ u)


def finite_time_rhs(eta, breve, phi, xi, params: RigidBodyParams, gains: FiniteTimeGains):
    ii = params.inertia6
    gm = lg.g_matrix(eta)
    xt = xi - breve
    eta_dot = gm @ xt
    a, u, q = _ft_terms(eta, xt, ii, gains)
    rhs = lg.ad_star_apply(breve - gains.k * a * eta, ii @ xi) + phi + gains.gamma * (gm.T @ eta)
    if a > 0.0:
        n2 = float(eta @ eta)
        hmat = a * (np.eye(6) - 2.0 * (1.0 - gains.inv_p) * np.outer(eta, eta) / n2)
        rhs = rhs + gains.k * (ii @ (hmat @ eta_dot))
    if lg._norm3(u[:3]) ** 2 + lg._norm3(u[3:]) ** 2 > EPS_FT**2:
        rhs = rhs + gains.k * math.exp((gains.inv_p - 1.0) * math.log(q)) * (ii @ u)
    return eta_dot, params.inertia6_inv @ rhs, 0.0


def finite_time_rate(state: ObserverState, xi, params: RigidBodyParams, gains: FiniteTimeGains) -> float:
    """Largest local decay rate of the fractional feedback (1/s)."""
    a, _, q = _ft_terms(state.eta, xi - state.breve_xi, params.inertia6, gains)
    rq = math.exp((gains.inv_p - 1.0) * math.log(q)) if q > EPS_FT**2 else 0.0
    return gains.k * max(a, rq)


# ---------------------------------------------------------------------------
# integration


def _rk4(state: ObserverState, h: float, f):
    t = state.t
    y0 = (state.eta, state.breve_xi, state.muhat)

    def add(y, k, c):
        return (y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2])

    k1 = f(t, *y0)
    k2 = f(t + 0.5 * h, *add(y0, k1, 0.5 * h))
    k3 = f(t + 0.5 * h, *add(y0, k2, 0.5 * h))
    k4 = f(t + h, *add(y0, k3, h))
    eta = y0[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    breve = y0[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    mu = y0[2] + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return eta, breve, mu


def _finish(state, eta, breve, mu, t1, meas):
    lg.check_exp_coords(eta)
    g1 = meas(t1)[0]
    ghat = lg.compose(g1, lg.exp_se3(-eta))
    return ObserverState(eta, breve, mu, t1, ghat)


def gravity_observer_step(state: ObserverState, meas, params: RigidBodyParams,
                          gains: GravityObserverGains, h: float) -> ObserverState:
    def f(t, eta, breve, mu):
        g, xi, _ = meas(t)
        return gravity_rhs(eta, breve, mu, g, xi, params, gains)

    return _finish(state, *_rk4(state, h, f), state.t + h, meas)


def force_observer_step(state: ObserverState, meas, params: RigidBodyParams,
                        gains: ForceObserverGains, h: float) -> ObserverState:
    def f(t, eta, breve, mu):
        _, xi, phi = meas(t)
        return force_rhs(eta, breve, phi, xi, params, gains)

    return _finish(state, *_rk4(state, h, f), state.t + h, meas)


def finite_time_observer_step(state: ObserverState, meas, params: RigidBodyParams,
                              gains: FiniteTimeGains, h: float, substep_cfl: float = 0.5
                              ) -> ObserverState:
    """One sampling period; RK4 substeps shrink while the fractional feedback is stiff."""

    def f(t, eta, breve, mu):
        _, xi, phi = meas(t)
        return finite_time_rhs(eta, breve, phi, xi, params, gains)

    t_end = state.t + h
    st = state
    while t_end - st.t > 1e-12 * max(1.0, abs(t_end)):
        rate = finite_time_rate(st, meas(st.t)[1], params, gains)
        remaining = t_end - st.t
        n = min(MAX_SUBSTEPS, max(1, math.ceil(remaining * rate / substep_cfl)))
        dt = remaining / n
        eta, breve, mu = _rk4(st, dt, f)
        st = replace(st, eta=eta, breve_xi=breve, muhat=mu, t=st.t + dt)
    return _finish(st, st.eta, st.breve_xi, st.muhat, t_end, meas)


# ---------------------------------------------------------------------------
# Lyapunov functions


def lyapunov_value(kind: str, state: ObserverState, xi, params: RigidBodyParams, gains,
                   mu_true: float | None = None) -> float:
    """V of the chosen observer evaluated at ``state`` with true twist ``xi``."""
    ii = params.inertia6
    eta = state.eta
    xt = np.asarray(xi, dtype=float) - state.breve_xi
    if kind == "gravity":
        ell = xt + gains.k1 @ eta
        v = 0.5 * gains.k2 * float(eta @ eta) + 0.5 * float(ell @ ii @ ell)
        if mu_true is not None:
            v += 0.5 * gains.k3 * (mu_true - state.muhat) ** 2
        return v
    if kind == "force":
        kmat = gains.kmat
        u = gains.k1 * eta + xt
        return 0.5 * float(eta @ kmat @ eta) + 0.5 * float(u @ kmat @ ii @ u)
    if kind == "finite_time":
        _, u, q = _ft_terms(eta, xt, ii, gains)
        return 0.5 * gains.gamma * float(eta @ eta) + 0.5 * q
    raise ValueError(f"unknown observer kind {kind!r}")


def lyapunov_rate(kind: str, state: ObserverState, xi, params: RigidBodyParams, gains) -> float:
    """Closed-form V_dot along the error dynamics (noise-free, exact model)."""
    ii = params.inertia6
    eta = state.eta
    xt = np.asarray(xi, dtype=float) - state.breve_xi
    if kind == "gravity":
        ell = xt + gains.k1 @ eta
        gm = lg.g_matrix(eta)
        return -gains.k2 * float(eta @ gm @ (gains.k1 @ eta)) - float(ell @ gains.k4 @ ell)
    if kind == "force":
        kmat = gains.kmat
        u = gains.k1 * eta + xt
        return -gains.k1 * float(eta @ kmat @ eta) - gains.k3 * float(u @ kmat @ u)
    if kind == "finite_time":
        n2 = float(eta @ eta)
        _, _, q = _ft_terms(eta, xt, ii, gains)
        vt = gains.gamma * n2 ** gains.inv_p if n2 > 0 else 0.0
        return -gains.k * (vt + (q ** gains.inv_p if q > 0 else 0.0))
    raise ValueError(f"unknown observer kind {kind!r}")


def run_observer(kind: str, state0: ObserverState, meas, params: RigidBodyParams, gains,
                 h: float, steps: int) -> list[ObserverState]:
    step = {"gravity": gravity_observer_step, "force": force_observer_step,
            "finite_time": finite_time_observer_step}[kind]
    out = [state0]
    st = state0
    for _ in range(steps):
        st = step(st, meas, params, gains, h)
        out.append(st)
    return out
