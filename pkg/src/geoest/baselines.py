"""Comparison attitude filters: GAME, MEKF and a constant-gain observer (CGO).

All three are discretized the same way: the attitude by a Lie-Euler
exponential update and the gain matrix ``P`` by explicit Euler followed by
symmetrization. Loss of positive definiteness or blow-up of ``P`` raises
CovarianceBlowup so that a benchmark can flag the run as singular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lg
from .errors import CovarianceBlowup
from .measurement import MeasurementFrame

P_NORM_LIMIT = 1e6


@dataclass(frozen=True)
class CovFilterState:
    rhat: np.ndarray
    p: np.ndarray
    t: float = 0.0


def sensor_weights(d_coeffs, k: int) -> np.ndarray:
    """Per-sensor weights (D_j D_j^T)^-1 as a (k, 3, 3) array.

    ``d_coeffs`` is a scalar, a 3 x 3 matrix shared by all sensors, or one matrix per sensor.
    """
    d = np.asarray(d_coeffs, dtype=float)
    if d.ndim == 0:
        d = d * np.eye(3)
    if d.ndim == 2:
        d = np.broadcast_to(d, (k, 3, 3))
    return np.array([np.linalg.inv(dj @ dj.T) for dj in d])


@dataclass(frozen=True)
class GameConfig:
    h: float
    q_cov: np.ndarray
    weights: np.ndarray  # (k, 3, 3) from sensor_weights
    symmetrize: bool = True


MekfConfig = GameConfig


@dataclass(frozen=True)
class CgoConfig:
    h: float
    k_p: np.ndarray = field(default_factory=lambda: np.eye(3))


def _active(frame: MeasurementFrame, e, weights=None):
    ids = list(frame.active_sensor_ids)
    e_act = np.asarray(e, dtype=float)[:, ids]
    w = None if weights is None else np.asarray(weights)[ids]
    return e_act, np.asarray(frame.um, dtype=float), w


def innovation(rhat, frame: MeasurementFrame, e, weights) -> np.ndarray:
    """l = sum_j (W_j (u_hat_j - u_j)) x u_hat_j with u_hat_j = R_hat^T e_j."""
    e_act, um, w = _active(frame, e, weights)
    uh = rhat.T @ e_act
    ell = np.zeros(3)
    for j in range(uh.shape[1]):
        ell += lg.cross3(w[j] @ (uh[:, j] - um[:, j]), uh[:, j])
    return ell


def _psym(x):
    return 0.5 * (x + x.T)


def _check_p(p, t):
    if not np.all(np.isfinite(p)) or np.linalg.norm(p) > P_NORM_LIMIT:
        raise CovarianceBlowup(f"P blew up at t={t:.4f}")
    if np.linalg.eigvalsh(p)[0] < 0.0:
        raise CovarianceBlowup(f"P lost positive definiteness at t={t:.4f}")


def _information(uh, w):
    """sum_j u_hat_j^ W_j u_hat_j^ (negative semidefinite)."""
    s = np.zeros((3, 3))
    for j in range(uh.shape[1]):
        ux = lg.hat(uh[:, j])
        s += ux @ w[j] @ ux
    return s


def game_step(state: CovFilterState, frame: MeasurementFrame, e, cfg: GameConfig) -> CovFilterState:
    e_act, um, w = _active(frame, e, cfg.weights)
    uh = state.rhat.T @ e_act
    om = np.asarray(frame.omega_m, dtype=float)
    p = state.p
    ell = np.zeros(3)
    resid = np.zeros((3, 3))
    for j in range(uh.shape[1]):
        r = w[j] @ (uh[:, j] - um[:, j])
        ell += lg.cross3(r, uh[:, j])
        resid += _psym(np.outer(r, uh[:, j]))
    mid = np.trace(resid) * np.eye(3) - resid + _information(uh, w)
    pdot = cfg.q_cov + _psym(p @ lg.hat(2.0 * om - p @ ell)) + p @ mid @ p
    return _advance(state, om - p @ ell, pdot, cfg)


def mekf_step(state: CovFilterState, frame: MeasurementFrame, e, cfg: MekfConfig) -> CovFilterState:
    e_act, um, w = _active(frame, e, cfg.weights)
    uh = state.rhat.T @ e_act
    om = np.asarray(frame.omega_m, dtype=float)
    p = state.p
    ell = np.zeros(3)
    for j in range(uh.shape[1]):
        ell += lg.cross3(w[j] @ (uh[:, j] - um[:, j]), uh[:, j])
    pdot = cfg.q_cov + _psym(p @ lg.hat(2.0 * om)) + p @ _information(uh, w) @ p
    return _advance(state, om - p @ ell, pdot, cfg)


def _advance(state, om_hat, pdot, cfg) -> CovFilterState:
    t1 = state.t + cfg.h
    p1 = state.p + cfg.h * pdot
    if cfg.symmetrize:
        p1 = _psym(p1)
    _check_p(p1, t1)
    return CovFilterState(state.rhat @ lg.exp_so3(cfg.h * om_hat), p1, t1)


def cgo_step(state: CovFilterState, frame: MeasurementFrame, e, cfg: CgoConfig) -> CovFilterState:
    """R_hat <- R_hat exp(h (Omega^m + K_P sum_j u_j x u_hat_j)^)."""
    e_act, um, _ = _active(frame, e)
    uh = state.rhat.T @ e_act
    lbar = np.zeros(3)
    for j in range(uh.shape[1]):
        lbar += lg.cross3(um[:, j], uh[:, j])
    om_hat = np.asarray(frame.omega_m, dtype=float) + cfg.k_p @ lbar
    return CovFilterState(state.rhat @ lg.exp_so3(cfg.h * om_hat), cfg.k_p, state.t + cfg.h)


@dataclass(frozen=True)
class MatchedInit:
    rhat0: np.ndarray
    p0: np.ndarray
    omega0: np.ndarray  # variational estimator residual
    k_p: np.ndarray


def matched_initialization(frame0: MeasurementFrame, e, p0, weights, rhat0=None) -> MatchedInit:
    """Initial states giving every filter the same first attitude rate.

    GAME and MEKF start at Omega^m - P(0) l(0); the variational estimator gets
    omega_0 = P(0) l(0) and the CGO uses K_P = P(0).
    """
    rhat0 = np.eye(3) if rhat0 is None else np.asarray(rhat0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    ell0 = innovation(rhat0, frame0, e, weights)
    return MatchedInit(rhat0, p0, p0 @ ell0, p0)
