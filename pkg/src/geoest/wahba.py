"""Generalized Wahba cost on SO(3), weight design and critical-point structure.

Direction sets are 3 x k arrays whose columns are unit inertial directions
``e_j``; body measurements ``um`` have the same layout. With only two
directions a third column, the normalized cross product, is appended so that
the attitude stays observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DegenerateEigenvalues, DimensionMismatch, RankDeficientDirections

DEFAULT_D = (3.0, 2.0, 1.0)
EIG_GAP = 1e-9


@dataclass(frozen=True)
class PhiFunction:
    """Monotone reshaping of the Wahba cost: phi(0) = 0 and phi' > 0."""

    phi: Callable[[float], float]
    dphi: Callable[[float], float]

    def validate(self, grid=None) -> None:
        grid = np.linspace(0.0, 10.0, 101) if grid is None else grid
        if abs(self.phi(0.0)) > 1e-15:
            raise ValueError("phi(0) must be 0")
        if any(self.dphi(float(x)) <= 0.0 for x in grid):
            raise ValueError("phi' must be positive")


PHI_IDENTITY = PhiFunction(lambda x: x, lambda x: 1.0)


class KMatrix(NamedTuple):
    k: np.ndarray
    d: np.ndarray  # eigenvalues, descending
    u_e: np.ndarray  # matching eigenvectors as columns


def augment(a: np.ndarray) -> np.ndarray:
    """Append the normalized cross product of the two columns of a 3 x 2 set."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != 3:
        raise DimensionMismatch(f"expected a 3 x k array, got {a.shape}")
    if a.shape[1] != 2:
        return a
    c = np.cross(a[:, 0], a[:, 1])
    n = np.linalg.norm(c)
    if n < 1e-12:
        raise RankDeficientDirections("the two directions are parallel")
    return np.column_stack([a, c / n])


def _check_dims(rhat, um, e, w=None):
    if um.shape != e.shape:
        raise DimensionMismatch(f"measurements {um.shape} vs directions {e.shape}")
    if w is not None and w.shape != (e.shape[1], e.shape[1]):
        raise DimensionMismatch(f"weights {w.shape} for {e.shape[1]} directions")
    if np.shape(rhat) != (3, 3):
        raise DimensionMismatch("rotation must be 3 x 3")


def wahba_cost0(rhat, um, e, w) -> float:
    """U0 = 1/2 <E - R U, (E - R U) W>."""
    um, e, w = np.asarray(um, float), np.asarray(e, float), np.asarray(w, float)
    _check_dims(rhat, um, e, w)
    m = e - rhat @ um
    return 0.5 * float(np.sum(m * (m @ w)))


def generalized_cost(rhat, um, e, w, phi: PhiFunction = PHI_IDENTITY) -> float:
    return phi.phi(wahba_cost0(rhat, um, e, w))


def _sorted_k(u, d) -> KMatrix:
    d = np.asarray(d, dtype=float)
    order = np.argsort(-d)
    d, u = d[order], u[:, order]
    if np.any(np.diff(d) > -EIG_GAP * max(1.0, d[0])):
        raise DegenerateEigenvalues(f"eigenvalues {d} are not distinct")
    k = u @ np.diag(d) @ u.T
    return KMatrix(0.5 * (k + k.T), d, u)


def build_weights(e, d=DEFAULT_D) -> tuple[np.ndarray, KMatrix]:
    """Weight matrix W making K = E W E^T have eigenvalues exactly d.

    With E = U_E Sigma V_E^T, W = V_E diag(d_i / sigma_i^2, 1, ..., 1) V_E^T,
    hence K = U_E diag(d) U_E^T.
    """
    e = augment(e)
    d = np.asarray(d, dtype=float)
    if d.shape != (3,) or np.any(d <= 0.0):
        raise ValueError("d must hold three positive values")
    ds = np.sort(d)[::-1]
    if np.any(np.diff(ds) > -EIG_GAP * max(1.0, ds[0])):
        raise DegenerateEigenvalues(f"requested eigenvalues {d} are not distinct")
    u, s, vt = np.linalg.svd(e, full_matrices=True)
    if s[-1] < 1e-9 * s[0]:
        raise RankDeficientDirections("direction matrix has rank < 3")
    w0 = np.ones(e.shape[1])
    w0[:3] = d / s**2
    w = vt.T @ np.diag(w0) @ vt
    w = 0.5 * (w + w.T)
    return w, _sorted_k(u, d)


def k_from_matrix(k) -> KMatrix:
    k = 0.5 * (np.asarray(k, float) + np.asarray(k, float).T)
    d, u = np.linalg.eigh(k)
    return _sorted_k(u, d)


def k_matrix(e, w) -> np.ndarray:
    e = augment(e)
    return e @ w @ e.T


def l_matrix(e, w, um) -> np.ndarray:
    """L = E W (U^m)^T."""
    return e @ w @ um.T


def s_l(rhat, l) -> np.ndarray:
    """vex(L^T R - R^T L)."""
    m = l.T @ rhat
    return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def s_k(q, k) -> np.ndarray:
    """vex(K Q - Q^T K); vanishes exactly at critical points of <I - Q, K>."""
    kk = k.k if isinstance(k, KMatrix) else np.asarray(k)
    m = kk @ q
    return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def attitude_potential(q, k) -> float:
    """<I - Q, K>."""
    kk = k.k if isinstance(k, KMatrix) else np.asarray(k)
    return float(np.trace(kk) - np.sum(q * kk))


def hessian_k(q, k) -> np.ndarray:
    """H_K(Q) = trace(Q^T K) I - Q^T K."""
    kk = k.k if isinstance(k, KMatrix) else np.asarray(k)
    qk = q.T @ kk
    return np.trace(qk) * np.eye(3) - qk


def critical_points(k: KMatrix) -> list[tuple[np.ndarray, int]]:
    """The four critical points {I, Q_1, Q_2, Q_3} with their Morse indices."""
    if not isinstance(k, KMatrix):
        k = k_from_matrix(k)
    out = [(np.eye(3), _index(np.eye(3), k))]
    for i in range(3):
        a = k.u_e[:, i]
        q = 2.0 * np.outer(a, a) - np.eye(3)
        out.append((q, _index(q, k)))
    return out


def _index(q, k) -> int:
    h = hessian_k(q, k)
    return int(np.sum(np.linalg.eigvalsh(0.5 * (h + h.T)) < 0.0))
