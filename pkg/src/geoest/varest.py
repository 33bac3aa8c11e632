"""Variational attitude estimator on SO(3).

The estimator state is ``(rhat, omega, betahat)`` where ``omega`` is the
residual ``Omega^m - Omega_hat - betahat``. Three discretizations are
provided: an implicit first-order Lie group variational integrator (LGVI),
its explicit adjoint, and their symmetric second-order composition. Every
scheme also carries an optional gyro-bias estimate driven by the same
attitude potential.

A step consumes two measurement frames; the step size is the difference of
their timestamps and may be negative (the flow is then run backwards).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import liegroup as lg
from .errors import DimensionMismatch, NewtonNonConvergence
from .measurement import MeasurementFrame
from .wahba import DEFAULT_D, PHI_IDENTITY, PhiFunction, augment, build_weights, s_l


@dataclass(frozen=True)
class VarEstGains:
    m: float
    d: np.ndarray
    phi: PhiFunction = PHI_IDENTITY
    p_bias: np.ndarray | None = None

    def __post_init__(self):
        if self.m <= 0.0:
            raise ValueError("m must be positive")
        d = np.atleast_2d(np.asarray(self.d, dtype=float))
        if d.shape == (1, 3):
            d = np.diag(d[0])
        if d.shape != (3, 3) or np.any(np.linalg.eigvalsh(0.5 * (d + d.T)) <= 0.0):
            raise ValueError("d must be a symmetric positive definite 3 x 3 matrix")
        object.__setattr__(self, "d", d)
        if self.p_bias is not None:
            p = np.asarray(self.p_bias, dtype=float)
            if p.shape != (3, 3) or np.any(np.linalg.eigvalsh(0.5 * (p + p.T)) <= 0.0):
                raise ValueError("p_bias must be symmetric positive definite")
            object.__setattr__(self, "p_bias", p)

    @property
    def p_inv(self) -> np.ndarray:
        return np.linalg.inv(self.p_bias)


@dataclass(frozen=True)
class VarEstState:
    rhat: np.ndarray
    omega: np.ndarray
    betahat: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: float = 0.0


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iter: int = 50
    fd_step: float = 1e-7
    analytic_jacobian: bool = True

    def __post_init__(self):
        if self.tol <= 0.0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


# ---------------------------------------------------------------------------
# attitude potential


class WeightDesign:
    """Per-frame weights: W rebuilt from the active directions so that K has eigenvalues d."""

    def __init__(self, d=DEFAULT_D):
        self.d = tuple(float(x) for x in d)
        self._cache: dict[tuple, np.ndarray] = {}

    def weights(self, e_active: np.ndarray, key: tuple) -> np.ndarray:
        if key not in self._cache:
            self._cache[key] = build_weights(e_active, self.d)[0]
        return self._cache[key]


@dataclass(frozen=True)
class Potential:
    """U0(R) = c0/2 - <R, L> for one frame; ``l`` is None when fewer than two directions are seen."""

    l: np.ndarray | None
    c0: float = 0.0

    def value(self, rhat) -> float:
        if self.l is None:
            return 0.0
        return 0.5 * self.c0 - float(np.sum(rhat * self.l))

    def gradient(self, rhat, phi: PhiFunction) -> np.ndarray:
        """Phi'(U0) S_L(rhat)."""
        if self.l is None:
            return np.zeros(3)
        return phi.dphi(self.value(rhat)) * s_l(rhat, self.l)


def _augment_measured(um: np.ndarray) -> np.ndarray:
    if um.shape[1] != 2:
        return um
    c = lg.cross3(um[:, 0], um[:, 1])
    return np.column_stack([um, c / np.linalg.norm(c)])


def potential(frame: MeasurementFrame, e, w) -> Potential:
    """Attitude potential of a frame.

    ``e`` holds every inertial direction (3 x n); the frame selects its active
    columns. ``w`` is a WeightDesign, or a fixed weight matrix sized for the
    active (augmented) set.
    """
    ids = tuple(frame.active_sensor_ids)
    if len(ids) < 2:
        return Potential(None)
    e_act = augment(np.asarray(e, dtype=float)[:, list(ids)])
    um = _augment_measured(np.asarray(frame.um, dtype=float))
    if um.shape != e_act.shape:
        raise DimensionMismatch(f"measurements {um.shape} vs directions {e_act.shape}")
    if isinstance(w, WeightDesign):
        wm = w.weights(e_act, ids)
    else:
        wm = np.asarray(w, dtype=float)
        if wm.shape != (e_act.shape[1], e_act.shape[1]):
            raise DimensionMismatch(f"weights {wm.shape} for {e_act.shape[1]} directions")
    ew = e_act @ wm
    l = ew @ um.T
    c0 = float(np.sum(ew * e_act) + np.sum((um @ wm) * um))
    return Potential(l, c0)


# ---------------------------------------------------------------------------
# continuous time


def continuous_rhs(state: VarEstState, frame: MeasurementFrame, e, w, gains: VarEstGains):
    """(Omega_hat, omega_dot, betahat_dot) with R_hat_dot = R_hat Omega_hat^."""
    pot = potential(frame, e, w)
    grad = pot.gradient(state.rhat, gains.phi)
    om_hat = np.asarray(frame.omega_m, float) - state.omega - state.betahat
    wdot = (-gains.m * lg.cross3(om_hat, state.omega) + grad - gains.d @ state.omega) / gains.m
    bdot = gains.p_inv @ grad if gains.p_bias is not None else np.zeros(3)
    return om_hat, wdot, bdot


def lyapunov_value(state: VarEstState, frame: MeasurementFrame, e, w, gains: VarEstGains,
                   beta_true=None) -> float:
    """V = Phi(U0) + m/2 |omega|^2 (+ 1/2 beta_err^T P beta_err); exact for noise-free frames."""
    pot = potential(frame, e, w)
    v = gains.phi.phi(pot.value(state.rhat)) + 0.5 * gains.m * float(state.omega @ state.omega)
    if gains.p_bias is not None and beta_true is not None:
        db = np.asarray(beta_true, float) - state.betahat
        v += 0.5 * float(db @ gains.p_bias @ db)
    return v


# ---------------------------------------------------------------------------
# Newton solver


def _fd_jacobian(fn, x, f0, step):
    jac = np.empty((f0.size, x.size))
    for k in range(x.size):
        dx = np.zeros_like(x)
        dx[k] = step * max(1.0, abs(x[k]))
        jac[:, k] = (fn(x + dx) - f0) / dx[k]
    return jac


def newton_solve_omega(residual_fn, guess, cfg: NewtonConfig = NewtonConfig(),
                       jacobian_fn=None) -> tuple[np.ndarray, int]:
    """Solve residual_fn(x) = 0; returns (root, iterations)."""
    x = np.array(guess, dtype=float)
    f = residual_fn(x)
    for it in range(cfg.max_iter + 1):
        if np.max(np.abs(f)) < cfg.tol:
            return x, it
        if it == cfg.max_iter:
            break
        jac = jacobian_fn(x) if jacobian_fn is not None else _fd_jacobian(residual_fn, x, f, cfg.fd_step)
        x = x - np.linalg.solve(jac, f)
        f = residual_fn(x)
    raise NewtonNonConvergence(cfg.max_iter, float(np.max(np.abs(f))))


def _solve_implicit_omega(m, h, c, om_m1, beta1, cfg: NewtonConfig, guess):
    """m x = exp(-h (om_m1 - x - beta1)^) c."""
    shift = beta1 - om_m1

    def res(x):
        return m * x - lg.exp_so3(h * (x + shift)) @ c

    jac = None
    if cfg.analytic_jacobian:
        cx = lg.hat(c)

        def jac(x):
            y = h * (x + shift)
            return m * np.eye(3) + h * lg.exp_so3(y) @ cx @ lg.jr_so3(y)

    try:
        return newton_solve_omega(res, guess, cfg, jac)[0]
    except np.linalg.LinAlgError as exc:
        raise NewtonNonConvergence(0, float("nan")) from exc


# ---------------------------------------------------------------------------
# discrete schemes


def _dt(frame_i, frame_i1) -> float:
    return float(frame_i1.t) - float(frame_i.t)


def _bias_update(state, grad_i, h, gains):
    if gains.p_bias is None:
        return state.betahat
    return state.betahat + h * (gains.p_inv @ grad_i)


def _implicit(state, frame_i, frame_i1, e, w, gains, newton, pot_i=None, pot_i1=None):
    h = _dt(frame_i, frame_i1)
    om_i = np.asarray(frame_i.omega_m, float)
    om_i1 = np.asarray(frame_i1.omega_m, float)
    rhat1 = state.rhat @ lg.exp_so3(h * (om_i - state.omega - state.betahat))
    if gains.p_bias is not None:
        pot_i = pot_i or potential(frame_i, e, w)
        beta1 = _bias_update(state, pot_i.gradient(state.rhat, gains.phi), h, gains)
    else:
        beta1 = state.betahat
    pot_i1 = pot_i1 or potential(frame_i1, e, w)
    c = (gains.m * np.eye(3) - h * gains.d) @ state.omega + h * pot_i1.gradient(rhat1, gains.phi)
    omega1 = _solve_implicit_omega(gains.m, h, c, om_i1, beta1, newton, state.omega)
    return VarEstState(rhat1, omega1, beta1, float(frame_i1.t))


def step_implicit(state: VarEstState, frame_i: MeasurementFrame, frame_i1: MeasurementFrame,
                  e, w, gains: VarEstGains, newton: NewtonConfig = NewtonConfig()) -> VarEstState:
    """First-order implicit LGVI step; ``omega_{i+1}`` from Newton iteration.

    On Newton failure the step is retried once as two half steps (gyro reading
    averaged at the midpoint) before the error propagates.
    """
    try:
        return _implicit(state, frame_i, frame_i1, e, w, gains, newton)
    except NewtonNonConvergence:
        mid = MeasurementFrame(0.5 * (frame_i.t + frame_i1.t), frame_i1.um,
                               0.5 * (np.asarray(frame_i.omega_m) + np.asarray(frame_i1.omega_m)),
                               frame_i1.active_sensor_ids)
        half = _implicit(state, frame_i, mid, e, w, gains, newton)
        return _implicit(half, mid, frame_i1, e, w, gains, newton)


def step_bias_implicit(state: VarEstState, frames, e, w, gains: VarEstGains,
                       newton: NewtonConfig = NewtonConfig()) -> VarEstState:
    """Implicit step with gyro-bias estimation; ``frames`` is (frame_i, frame_i1)."""
    if gains.p_bias is None:
        raise ValueError("bias estimation needs gains.p_bias")
    frame_i, frame_i1 = frames
    return step_implicit(state, frame_i, frame_i1, e, w, gains, newton)


def _explicit(state, h, om_i, om_i1, pot_i, e, w, gains):
    om_hat = om_i - state.omega - state.betahat
    grad = pot_i.gradient(state.rhat, gains.phi)
    rhs = gains.m * (lg.exp_so3(-h * om_hat) @ state.omega) + h * grad
    omega1 = np.linalg.solve(gains.m * np.eye(3) + h * gains.d, rhs)
    beta1 = _bias_update(state, grad, h, gains)
    return omega1, beta1


def step_explicit(state: VarEstState, frame_i: MeasurementFrame, frame_i1: MeasurementFrame,
                  e, w, gains: VarEstGains) -> VarEstState:
    """Explicit first-order step, the adjoint of the implicit LGVI."""
    h = _dt(frame_i, frame_i1)
    om_i1 = np.asarray(frame_i1.omega_m, float)
    omega1, beta1 = _explicit(state, h, np.asarray(frame_i.omega_m, float), om_i1,
                              potential(frame_i, e, w), e, w, gains)
    rhat1 = state.rhat @ lg.exp_so3(h * (om_i1 - omega1 - beta1))
    return VarEstState(rhat1, omega1, beta1, float(frame_i1.t))


def step_symmetric(state: VarEstState, frame_i: MeasurementFrame, frame_i1: MeasurementFrame,
                   e, w, gains: VarEstGains, newton: NewtonConfig = NewtonConfig()) -> VarEstState:
    """Second-order Strang composition: explicit half step, then implicit half step."""
    h = _dt(frame_i, frame_i1)
    om_i = np.asarray(frame_i.omega_m, float)
    om_i1 = np.asarray(frame_i1.omega_m, float)
    om_half = 0.5 * (om_i + om_i1)
    omega_h, beta_h = _explicit(state, 0.5 * h, om_i, om_half, potential(frame_i, e, w), e, w, gains)
    rhat1 = state.rhat @ lg.exp_so3(h * (om_half - omega_h - beta_h))
    pot1 = potential(frame_i1, e, w)
    if gains.p_bias is not None:
        # second half of the bias update evaluated at the new attitude
        beta1 = beta_h + 0.5 * h * (gains.p_inv @ pot1.gradient(rhat1, gains.phi))
    else:
        beta1 = beta_h
    c = ((gains.m * np.eye(3) - 0.5 * h * gains.d) @ omega_h
         + 0.5 * h * pot1.gradient(rhat1, gains.phi))
    omega1 = _solve_implicit_omega(gains.m, 0.5 * h, c, om_i1, beta1, newton, omega_h)
    return VarEstState(rhat1, omega1, beta1, float(frame_i1.t))


SCHEMES = {"implicit": step_implicit, "explicit": step_explicit, "symmetric": step_symmetric}


def run(frames, state0: VarEstState, e, w, gains: VarEstGains, scheme: str = "explicit",
        newton: NewtonConfig = NewtonConfig(), renormalize_every: int = 1000) -> list[VarEstState]:
    """Advance the estimator over a frame sequence; returns one state per frame."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    states = [replace(state0, t=float(frames[0].t))]
    st = states[0]
    for i in range(len(frames) - 1):
        if scheme == "explicit":
            st = step_explicit(st, frames[i], frames[i + 1], e, w, gains)
        else:
            st = SCHEMES[scheme](st, frames[i], frames[i + 1], e, w, gains, newton)
        if renormalize_every and (i + 1) % renormalize_every == 0:
            st = replace(st, rhat=lg.orthonormalize(st.rhat))
        states.append(st)
    return states
