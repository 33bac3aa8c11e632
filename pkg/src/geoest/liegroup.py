"""SO(3) and SE(3) operations used by the estimators and observers.

Conventions
-----------
* Rotations are plain 3x3 ``ndarray`` objects.
* A pose is ``Pose(r, b)``: attitude ``r`` and position ``b`` (meters).
* Twists and exponential coordinates are 6-vectors ordered
  ``(angular, linear)``, i.e. ``xi = (Omega, v)`` and ``eta = (Theta, beta)``.
* ``ad(xi) = [[Omega^, 0], [v^, Omega^]]`` and ``Ad(g) = [[R, 0], [b^ R, R]]``.

Every angle-dependent coefficient switches to a truncated Taylor series below
``SMALL_ANGLE`` so that the removable singularity at zero costs no accuracy.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import NearPiSingularity, NonSkewInput

EPS_LOG = 1e-6
SMALL_ANGLE = 0.05
LOG_AXIS_SWITCH = 3.0

_I3 = np.eye(3)


class Pose(NamedTuple):
    r: np.ndarray
    b: np.ndarray


# ---------------------------------------------------------------------------
# scalar coefficient functions (with small-angle series)


def _sinc(t: float) -> float:
    if t < SMALL_ANGLE:
        t2 = t * t
        return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)))
    return math.sin(t) / t


def _one_minus_cos_over_t2(t: float) -> float:
    if t < SMALL_ANGLE:
        t2 = t * t
        return 0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2**3 / 40320.0 + t2**4 / 3628800.0
    return (1.0 - math.cos(t)) / (t * t)


def _t_minus_sin_over_t3(t: float) -> float:
    if t < SMALL_ANGLE:
        t2 = t * t
        return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2**3 / 362880.0 + t2**4 / 39916800.0
    return (t - math.sin(t)) / t**3


def _c1(t: float) -> float:
    """1/t^2 - (1 + cos t) / (2 t sin t)."""
    if t < SMALL_ANGLE:
        t2 = t * t
        return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2**3 / 1209600.0 + t2**4 / 47900160.0
    return 1.0 / (t * t) - math.sin(t) / (2.0 * t * (1.0 - math.cos(t)))


def _c2(t: float) -> float:
    """(1 + cos t)(t - sin t) / (2 t sin^2 t)."""
    if t < SMALL_ANGLE:
        t2 = t * t
        return 1.0 / 6.0 + t2 / 180.0 + t2 * t2 / 5040.0 + t2**3 / 151200.0 + t2**4 / 4790016.0
    return (t - math.sin(t)) / (2.0 * t * (1.0 - math.cos(t)))


def _c3(t: float) -> float:
    """(1 + cos t)(t + sin t) / (2 t^3 sin^2 t) - 2 / t^4."""
    if t < SMALL_ANGLE:
        t2 = t * t
        return (1.0 / 360.0 + t2 / 7560.0 + t2 * t2 / 201600.0 + t2**3 / 5987520.0
                + 691.0 * t2**4 / 130767436800.0)
    return (t + math.sin(t)) / (2.0 * t**3 * (1.0 - math.cos(t))) - 2.0 / t**4


def _series_alpha(t: float) -> float:
    if t < SMALL_ANGLE:
        t2 = t * t
        return 1.0 / 12.0 - t2 * t2 / 30240.0 - t2**3 / 604800.0 - t2**4 / 15966720.0
    return 2.0 / (t * t) - (t + 3.0 * math.sin(t)) / (4.0 * t * (1.0 - math.cos(t)))


def _series_beta(t: float) -> float:
    if t < SMALL_ANGLE:
        t2 = t * t
        return (-1.0 / 720.0 - t2 / 15120.0 - t2 * t2 / 403200.0 - t2**3 / 11975040.0
                - 691.0 * t2**4 / 261534873600.0)
    return 1.0 / t**4 - (t + math.sin(t)) / (4.0 * t**3 * (1.0 - math.cos(t)))


def _t_over_sin(t: float) -> float:
    if t < SMALL_ANGLE:
        t2 = t * t
        return 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0 + 31.0 * t2**3 / 15120.0
    return t / math.sin(t)


# ---------------------------------------------------------------------------
# SO(3)


def hat(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vex(m, tol: float = 1e-9) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.linalg.norm(m + m.T) > tol * np.linalg.norm(m):
        raise NonSkewInput("matrix is not skew-symmetric")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _quad(v, a: float, b: float) -> np.ndarray:
    """I + a*v^ + b*(v^)^2 written out entrywise."""
    x, y, z = v
    t2 = x * x + y * y + z * z
    bxy, bxz, byz = b * x * y, b * x * z, b * y * z
    return np.array([
        [1.0 + b * (x * x - t2), bxy - a * z, bxz + a * y],
        [bxy + a * z, 1.0 + b * (y * y - t2), byz - a * x],
        [bxz - a * y, byz + a * x, 1.0 + b * (z * z - t2)],
    ])


def cross3(a, b) -> np.ndarray:
    """Cross product of two 3-vectors (much faster than np.cross for single vectors)."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def _quad_apply(v, a: float, b: float, x) -> np.ndarray:
    """(I + a*v^ + b*(v^)^2) x without forming the matrix."""
    v0, v1, v2 = v
    x0, x1, x2 = x
    c0, c1, c2 = v1 * x2 - v2 * x1, v2 * x0 - v0 * x2, v0 * x1 - v1 * x0
    return np.array([x0 + a * c0 + b * (v1 * c2 - v2 * c1),
                     x1 + a * c1 + b * (v2 * c0 - v0 * c2),
                     x2 + a * c2 + b * (v0 * c1 - v1 * c0)])


def _norm3(v) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def exp_so3(theta) -> np.ndarray:
    """Rodrigues formula."""
    t = _norm3(theta)
    return _quad(theta, _sinc(t), _one_minus_cos_over_t2(t))


def principal_angle(r) -> float:
    """Rotation angle in [0, pi]; equals arccos((tr r - 1)/2) but stays accurate near 0."""
    s = math.hypot(r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1])
    return math.atan2(s, r[0, 0] + r[1, 1] + r[2, 2] - 1.0)


def log_so3(r) -> np.ndarray:
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    c = 0.5 * (r[0, 0] + r[1, 1] + r[2, 2] - 1.0)
    t = math.atan2(0.5 * _norm3(w), c)
    if t >= math.pi - EPS_LOG:
        raise NearPiSingularity(t)
    if t < LOG_AXIS_SWITCH:
        return 0.5 * _t_over_sin(t) * w
    # near pi the antisymmetric part is ill-conditioned; use the symmetric part
    bmat = 0.5 * (r + r.T) - c * _I3
    i = int(np.argmax(np.diag(bmat)))
    n = bmat[:, i] / math.sqrt(bmat[i, i] * (1.0 - c))
    if n @ w < 0.0:
        n = -n
    return t * n


def jr_so3(theta) -> np.ndarray:
    """Right Jacobian: d exp(theta) = exp(theta) (jr(theta) d theta)^."""
    t = _norm3(theta)
    return _quad(theta, -_one_minus_cos_over_t2(t), _t_minus_sin_over_t3(t))


def a_matrix(theta) -> np.ndarray:
    """A(Theta) = inverse right Jacobian of SO(3)."""
    t = _norm3(theta)
    if t >= math.pi - EPS_LOG:
        raise NearPiSingularity(t)
    return _quad(theta, 0.5, _c1(t))


def s_matrix(theta) -> np.ndarray:
    """S(Theta) mapping exponential coordinates beta to position b = S beta."""
    t = _norm3(theta)
    return _quad(theta, _one_minus_cos_over_t2(t), _t_minus_sin_over_t3(t))


def s_inv_matrix(theta) -> np.ndarray:
    t = _norm3(theta)
    if t >= math.pi - EPS_LOG:
        raise NearPiSingularity(t)
    return _quad(theta, -0.5, _c1(t))


def orthonormalize(r) -> np.ndarray:
    """Nearest rotation matrix (polar projection)."""
    u, _, vt = np.linalg.svd(r)
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


# ---------------------------------------------------------------------------
# SE(3)


def identity_pose() -> Pose:
    return Pose(np.eye(3), np.zeros(3))


def compose(g1: Pose, g2: Pose) -> Pose:
    return Pose(g1.r @ g2.r, g1.r @ g2.b + g1.b)


def inverse(g: Pose) -> Pose:
    rt = g.r.T
    return Pose(rt, -(rt @ g.b))


def to_matrix(g: Pose) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = g.r
    m[:3, 3] = g.b
    return m


def from_matrix(m) -> Pose:
    m = np.asarray(m, dtype=float)
    return Pose(m[:3, :3].copy(), m[:3, 3].copy())


def check_exp_coords(eta) -> np.ndarray:
    """Validate exponential coordinates (rotation angle below the pi guard)."""
    eta = np.asarray(eta, dtype=float)
    t = _norm3(eta[:3])
    if t >= math.pi - EPS_LOG:
        raise NearPiSingularity(t)
    return eta


def exp_se3(eta) -> Pose:
    th = eta[:3]
    t = _norm3(th)
    omc = _one_minus_cos_over_t2(t)
    return Pose(_quad(th, _sinc(t), omc), _quad_apply(th, omc, _t_minus_sin_over_t3(t), eta[3:]))


def log_se3(g: Pose) -> np.ndarray:
    th = log_so3(g.r)
    out = np.empty(6)
    out[:3] = th
    out[3:] = _quad_apply(th, -0.5, _c1(_norm3(th)), g.b)
    return out


def adjoint_Ad(g: Pose) -> np.ndarray:
    m = np.zeros((6, 6))
    m[:3, :3] = g.r
    m[3:, 3:] = g.r
    m[3:, :3] = hat(g.b) @ g.r
    return m


def ad(xi) -> np.ndarray:
    m = np.zeros((6, 6))
    w = hat(xi[:3])
    m[:3, :3] = w
    m[3:, 3:] = w
    m[3:, :3] = hat(xi[3:])
    return m


def ad_star(xi) -> np.ndarray:
    """Coadjoint operator ad*_xi = ad_xi^T."""
    return ad(xi).T


def ad_star_apply(xi, mu) -> np.ndarray:
    """ad*_xi mu without forming the matrix: (mu_w x Omega + mu_v x v, mu_v x Omega)."""
    w, v = xi[:3], xi[3:]
    mw, mv = mu[:3], mu[3:]
    out = np.empty(6)
    out[:3] = cross3(mw, w) + cross3(mv, v)
    out[3:] = cross3(mv, w)
    return out


def t_block(theta, beta) -> np.ndarray:
    """Lower-left block T(Theta, beta) of G(eta)."""
    t = _norm3(theta)
    theta = np.asarray(theta, dtype=float)
    beta = np.asarray(beta, dtype=float)
    a = _quad(theta, 0.5, _c1(t))
    sb = s_matrix(theta) @ beta
    tb = float(theta @ beta)
    return (0.5 * hat(sb) @ a
            + _c1(t) * (np.outer(theta, beta) + tb * a)
            - _c2(t) * np.outer(sb, theta)
            + _c3(t) * tb * np.outer(theta, theta))


def g_matrix(eta) -> np.ndarray:
    """G(eta) with d/dt eta = G(eta) xi for eta = log(g_hat^-1 g), block form."""
    eta = check_exp_coords(eta)
    a = a_matrix(eta[:3])
    m = np.zeros((6, 6))
    m[:3, :3] = a
    m[3:, 3:] = a
    m[3:, :3] = t_block(eta[:3], eta[3:])
    return m


def g_matrix_series(eta) -> np.ndarray:
    """G(eta) = I + ad/2 + alpha ad^2 + beta ad^4."""
    eta = check_exp_coords(eta)
    t = _norm3(eta[:3])
    a = ad(eta)
    a2 = a @ a
    return np.eye(6) + 0.5 * a + _series_alpha(t) * a2 + _series_beta(t) * (a2 @ a2)
