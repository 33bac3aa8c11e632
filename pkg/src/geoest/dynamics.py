"""Truth generation: rigid-body motion on SE(3) under prescribed or gravitational
wrenches, prescribed angular-velocity profiles and dense output.

Wrenches and twists are 6-vectors ``(angular, linear)`` in the body frame. The
equations of motion are

    g_dot = g xi^,    II xi_dot = ad*_xi II xi + phi(t, g, xi),

with ``II = blockdiag(J, m I)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import liegroup as lg
from .errors import OriginSingularity
from .liegroup import Pose

RENORMALIZE_EVERY = 1000


@dataclass(frozen=True)
class RigidBodyParams:
    mass: float
    j: np.ndarray
    length_unit: float = 1.0  # meters per length unit (J-terms of the gravity force scale by 1/L^2)

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if not np.allclose(j, j.T) or np.any(np.linalg.eigvalsh(j) <= 0.0):
            raise ValueError("inertia must be symmetric positive definite")
        object.__setattr__(self, "j", j)

    @property
    def inertia6(self) -> np.ndarray:
        m = np.zeros((6, 6))
        m[:3, :3] = self.j
        m[3:, 3:] = self.mass * np.eye(3)
        return m

    @property
    def inertia6_inv(self) -> np.ndarray:
        m = np.zeros((6, 6))
        m[:3, :3] = np.linalg.inv(self.j)
        m[3:, 3:] = np.eye(3) / self.mass
        return m

    @property
    def j_script(self) -> np.ndarray:
        return 0.5 * np.trace(self.j) * np.eye(3) + self.j


class TruthState(NamedTuple):
    g: Pose
    xi: np.ndarray
    t: float


# ---------------------------------------------------------------------------
# force models


def gravity_wrench(g: Pose, params: RigidBodyParams, mu: float):
    """Gravity-gradient moment and gravitational force of a spherical body.

    M = mu 3/|b|^5 (p x J p)
    F = mu (-m p/|b|^3 - 3 Js p/|b|^5 + 15/2 (p^T J p) p/|b|^7),  p = R^T b.
    """
    b = np.asarray(g.b, dtype=float)
    r = lg._norm3(b)
    if r * params.length_unit < 1.0:
        raise OriginSingularity(f"|b| = {r * params.length_unit:.3g} m is inside the 1 m guard")
    p = g.r.T @ b
    j = params.j
    jf = j / params.length_unit**2
    jsf = params.j_script / params.length_unit**2
    r2 = r * r
    r5 = r2 * r2 * r
    torque = mu * 3.0 / r5 * lg.cross3(p, j @ p)
    force = mu * (-params.mass * p / (r2 * r) - 3.0 * (jsf @ p) / r5
                  + 7.5 * float(p @ jf @ p) * p / (r5 * r2))
    return torque, force


def psi_g(g: Pose, params: RigidBodyParams) -> np.ndarray:
    """Gravity wrench per unit gravity parameter (phi_G = mu psi_G)."""
    tq, f = gravity_wrench(g, params, 1.0)
    return np.concatenate([tq, f])


class ForceModel:
    """Body-frame wrench phi(t, g, xi)."""

    def __call__(self, t: float, g: Pose, xi: np.ndarray, params: RigidBodyParams) -> np.ndarray:
        raise NotImplementedError

    def __add__(self, other: "ForceModel") -> "ForceModel":
        return SumForce([self, other])


@dataclass
class NoForce(ForceModel):
    def __call__(self, t, g, xi, params):
        return np.zeros(6)


@dataclass
class SphericalGravity(ForceModel):
    mu: float

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError("mu must be positive")

    def __call__(self, t, g, xi, params):
        return self.mu * psi_g(g, params)


@dataclass
class Prescribed(ForceModel):
    """Wrench given as a function of time only."""

    fn: Callable[[float], np.ndarray]

    def __call__(self, t, g, xi, params):
        return np.asarray(self.fn(t), dtype=float)


@dataclass
class UniformGravity(ForceModel):
    """Constant inertial acceleration (default 9.81 m/s^2 along -z)."""

    accel: Sequence[float] = (0.0, 0.0, -9.81)

    def __call__(self, t, g, xi, params):
        out = np.zeros(6)
        out[3:] = params.mass * (g.r.T @ np.asarray(self.accel, dtype=float))
        return out


@dataclass
class SumForce(ForceModel):
    parts: list = field(default_factory=list)

    def __call__(self, t, g, xi, params):
        out = np.zeros(6)
        for p in self.parts:
            out = out + p(t, g, xi, params)
        return out


def constant_wrench(torque, force) -> Prescribed:
    w = np.concatenate([np.asarray(torque, float), np.asarray(force, float)])
    return Prescribed(lambda t: w)


# ---------------------------------------------------------------------------
# equations of motion


def dynamics_rhs(state: TruthState, params: RigidBodyParams, force: ForceModel):
    """Returns (xi, II xi_dot): the body twist driving g and the momentum rate."""
    xi = np.asarray(state.xi, dtype=float)
    mom = params.inertia6 @ xi
    return xi, lg.ad_star_apply(xi, mom) + force(state.t, state.g, xi, params)


def _xi_dot(t, g, xi, params, force, inv6):
    mom = np.empty(6)
    mom[:3] = params.j @ xi[:3]
    mom[3:] = params.mass * xi[3:]
    return inv6 @ (lg.ad_star_apply(xi, mom) + force(t, g, xi, params))


def _dexpinv(theta, xi):
    """G(theta) xi truncated after the double commutator (enough for 4th order)."""
    c1 = _bracket(theta, xi)
    return xi + 0.5 * c1 + _bracket(theta, c1) / 12.0


def _bracket(a, b):
    """ad_a b."""
    out = np.empty(6)
    out[:3] = lg.cross3(a[:3], b[:3])
    out[3:] = lg.cross3(a[3:], b[:3]) + lg.cross3(a[:3], b[3:])
    return out


def _exp_right(g: Pose, theta) -> Pose:
    return lg.compose(g, lg.exp_se3(theta))


def step_truth(state: TruthState, params: RigidBodyParams, force: ForceModel, h: float,
               method: str = "rk4", inv6=None) -> TruthState:
    """One step of Lie-group RK4 (Munthe-Kaas) or Lie-Euler."""
    inv6 = params.inertia6_inv if inv6 is None else inv6
    g, xi, t = state
    if method == "euler":
        xd = _xi_dot(t, g, xi, params, force, inv6)
        return TruthState(_exp_right(g, h * xi), xi + h * xd, t + h)
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    k1t = xi
    k1x = _xi_dot(t, g, xi, params, force, inv6)
    th = 0.5 * h * k1t
    x2 = xi + 0.5 * h * k1x
    k2t = _dexpinv(th, x2)
    k2x = _xi_dot(t + 0.5 * h, _exp_right(g, th), x2, params, force, inv6)
    th = 0.5 * h * k2t
    x3 = xi + 0.5 * h * k2x
    k3t = _dexpinv(th, x3)
    k3x = _xi_dot(t + 0.5 * h, _exp_right(g, th), x3, params, force, inv6)
    th = h * k3t
    x4 = xi + h * k3x
    k4t = _dexpinv(th, x4)
    k4x = _xi_dot(t + h, _exp_right(g, th), x4, params, force, inv6)
    theta = h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    xi_new = xi + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    return TruthState(_exp_right(g, theta), xi_new, t + h)


@dataclass
class Trajectory:
    t: np.ndarray  # (n,)
    r: np.ndarray  # (n, 3, 3)
    b: np.ndarray  # (n, 3)
    xi: np.ndarray  # (n, 6)

    def __len__(self):
        return self.t.size

    def pose(self, i: int) -> Pose:
        return Pose(self.r[i], self.b[i])

    def state(self, i: int) -> TruthState:
        return TruthState(self.pose(i), self.xi[i], float(self.t[i]))


def integrate_truth(state: TruthState, params: RigidBodyParams, force: ForceModel, h: float,
                    steps: int, method: str = "rk4") -> Trajectory:
    if h <= 0.0:
        raise ValueError("h must be positive")
    n = steps + 1
    ts, rs, bs, xis = np.empty(n), np.empty((n, 3, 3)), np.empty((n, 3)), np.empty((n, 6))
    inv6 = params.inertia6_inv
    t0 = state.t
    for i in range(n):
        ts[i], rs[i], bs[i], xis[i] = state.t, state.g.r, state.g.b, state.xi
        if i == steps:
            break
        state = step_truth(state, params, force, h, method, inv6)
        state = TruthState(state.g, state.xi, t0 + (i + 1) * h)
        if (i + 1) % RENORMALIZE_EVERY == 0:
            state = TruthState(Pose(lg.orthonormalize(state.g.r), state.g.b), state.xi, state.t)
    return Trajectory(ts, rs, bs, xis)


# ---------------------------------------------------------------------------
# attitude-only truth


def prescribed_omega(t: float) -> np.ndarray:
    """Angular-velocity profile used for the filter comparison (rad/s)."""
    return np.array([math.sin(2.0 * math.pi * t / 15.0),
                     -math.sin(2.0 * math.pi * t / 18.0 + math.pi / 20.0),
                     math.cos(2.0 * math.pi * t / 17.0)])


def _so3_dexpinv(theta, w):
    c = lg.cross3(theta, w)
    return w + 0.5 * c + lg.cross3(theta, c) / 12.0


def integrate_attitude(r0, omega_fn: Callable[[float], np.ndarray], h: float, steps: int,
                       t0: float = 0.0):
    """Poisson equation R_dot = R Omega(t)^ by Lie-group RK4; returns (t, R, Omega)."""
    n = steps + 1
    ts = t0 + h * np.arange(n)
    rs = np.empty((n, 3, 3))
    om = np.empty((n, 3))
    r = np.asarray(r0, dtype=float)
    for i in range(n):
        t = ts[i]
        rs[i] = r
        w1 = np.asarray(omega_fn(t), dtype=float)
        om[i] = w1
        if i == steps:
            break
        w2 = np.asarray(omega_fn(t + 0.5 * h), dtype=float)
        w4 = np.asarray(omega_fn(t + h), dtype=float)
        k1 = w1
        k2 = _so3_dexpinv(0.5 * h * k1, w2)
        k3 = _so3_dexpinv(0.5 * h * k2, w2)
        k4 = _so3_dexpinv(h * k3, w4)
        r = r @ lg.exp_so3(h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        if (i + 1) % RENORMALIZE_EVERY == 0:
            r = lg.orthonormalize(r)
    return ts, rs, om


def integrate_rigid_attitude(r0, omega0, j, torque_fn: Callable[[float, np.ndarray], np.ndarray],
                             h: float, steps: int, t0: float = 0.0):
    """Euler's equations J Omega_dot = J Omega x Omega + tau(t, R) with Lie-group RK4."""
    j = np.asarray(j, dtype=float)
    jinv = np.linalg.inv(j)
    n = steps + 1
    ts = t0 + h * np.arange(n)
    rs, om = np.empty((n, 3, 3)), np.empty((n, 3))
    r = np.asarray(r0, dtype=float)
    w = np.asarray(omega0, dtype=float)

    def wdot(t, rr, ww):
        return jinv @ (lg.cross3(j @ ww, ww) + torque_fn(t, rr))

    for i in range(n):
        t = ts[i]
        rs[i], om[i] = r, w
        if i == steps:
            break
        a1 = wdot(t, r, w)
        th = 0.5 * h * w
        w2 = w + 0.5 * h * a1
        k2 = _so3_dexpinv(th, w2)
        a2 = wdot(t + 0.5 * h, r @ lg.exp_so3(th), w2)
        th = 0.5 * h * k2
        w3 = w + 0.5 * h * a2
        k3 = _so3_dexpinv(th, w3)
        a3 = wdot(t + 0.5 * h, r @ lg.exp_so3(th), w3)
        th = h * k3
        w4 = w + h * a3
        k4 = _so3_dexpinv(th, w4)
        a4 = wdot(t + h, r @ lg.exp_so3(th), w4)
        r = r @ lg.exp_so3(h / 6.0 * (w + 2.0 * k2 + 2.0 * k3 + k4))
        w = w + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if (i + 1) % RENORMALIZE_EVERY == 0:
            r = lg.orthonormalize(r)
    return ts, rs, om


# ---------------------------------------------------------------------------
# dense output


class DenseTruth:
    """Evaluate (g, xi, phi) at arbitrary times inside a trajectory.

    Within each interval the motion is represented relative to the left node,
    g(t) = g_i exp(theta(t)), with theta and xi cubic Hermite polynomials built
    from node values and derivatives. Errors are O(H^4) in the node spacing H.
    """

    def __init__(self, traj: Trajectory, params: RigidBodyParams, force: ForceModel):
        self.traj, self.params, self.force = traj, params, force
        inv6 = params.inertia6_inv
        n = len(traj)
        self._xd = np.array([_xi_dot(traj.t[i], traj.pose(i), traj.xi[i], params, force, inv6)
                             for i in range(n)])
        self._theta_end = np.zeros((n, 6))
        self._theta_dot_end = np.zeros((n, 6))
        for i in range(n - 1):
            rel = lg.compose(lg.inverse(traj.pose(i)), traj.pose(i + 1))
            th = lg.log_se3(rel)
            self._theta_end[i] = th
            self._theta_dot_end[i] = lg.g_matrix(th) @ traj.xi[i + 1]

    @property
    def t0(self) -> float:
        return float(self.traj.t[0])

    @property
    def t1(self) -> float:
        return float(self.traj.t[-1])

    def _locate(self, t: float):
        ts = self.traj.t
        i = int(np.searchsorted(ts, t, side="right") - 1)
        i = min(max(i, 0), ts.size - 2)
        hh = ts[i + 1] - ts[i]
        return i, (t - ts[i]) / hh, hh

    def __call__(self, t: float):
        """(g, xi, phi) at time t."""
        tr = self.traj
        i, s, hh = self._locate(t)
        if s <= 0.0:
            g, xi = tr.pose(i), tr.xi[i].copy()
        elif s >= 1.0:
            g, xi = tr.pose(i + 1), tr.xi[i + 1].copy()
        else:
            h00 = 2 * s**3 - 3 * s**2 + 1
            h10 = s**3 - 2 * s**2 + s
            h01 = -2 * s**3 + 3 * s**2
            h11 = s**3 - s**2
            theta = h10 * hh * tr.xi[i] + h01 * self._theta_end[i] + h11 * hh * self._theta_dot_end[i]
            g = lg.compose(tr.pose(i), lg.exp_se3(theta))
            xi = (h00 * tr.xi[i] + h10 * hh * self._xd[i] + h01 * tr.xi[i + 1]
                  + h11 * hh * self._xd[i + 1])
        phi = self.force(t, g, xi, self.params)
        return g, xi, phi


# ---------------------------------------------------------------------------
# orbit helpers


def periapsis_speed(mu: float, a: float, r_p: float) -> float:
    return math.sqrt(-mu / a + 2.0 * mu / r_p)


def orbital_period(mu: float, a: float) -> float:
    return 2.0 * math.pi * math.sqrt(a**3 / mu)


def radial_period(traj: Trajectory) -> float:
    """Time between the first two local minima of |b| (parabolic refinement)."""
    r = np.linalg.norm(traj.b, axis=1)
    t = traj.t
    mins = [i for i in range(1, r.size - 1) if r[i] <= r[i - 1] and r[i] < r[i + 1]]
    if r[0] < r[1]:
        mins = [0] + mins
    if len(mins) < 2:
        raise ValueError("trajectory does not contain a full radial period")

    def refine(i):
        if i == 0:
            return t[0]
        y0, y1, y2 = r[i - 1], r[i], r[i + 1]
        den = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        return t[i] + off * (t[i + 1] - t[i])

    return refine(mins[1]) - refine(mins[0])


# ---------------------------------------------------------------------------
# export

TRAJECTORY_COLUMNS = (["t"] + [f"r{i}{j}" for i in range(1, 4) for j in range(1, 4)]
                      + ["bx", "by", "bz", "wx", "wy", "wz", "vx", "vy", "vz"])


def export_trajectory_csv(traj: Trajectory, path) -> None:
    """Write one row per node: time, row-major R, position, angular then linear velocity."""
    rows = np.column_stack([traj.t, traj.r.reshape(-1, 9), traj.b, traj.xi])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data[:, 0], data[:, 1:10].reshape(-1, 3, 3), data[:, 10:13], data[:, 13:19])
