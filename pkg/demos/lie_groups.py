"""Exponential coordinates on SO(3) and SE(3).

Walks through the maps the estimators are built on: Rodrigues' formula and its
inverse, the pose exponential, the adjoint action, and the Jacobian G(eta) that
turns body twists into rates of exponential coordinates.
"""

import math

import numpy as np

from geoest import liegroup as lg
from geoest.errors import NearPiSingularity

rng = np.random.default_rng(0)

# A rotation vector, its matrix and back again.
theta = np.array([0.3, -1.1, 0.8])
r = lg.exp_so3(theta)
print("rotation angle      ", round(np.linalg.norm(theta), 6), "rad")
print("principal angle of R", round(lg.principal_angle(r), 6), "rad")
print("log(exp(theta))     ", lg.log_so3(r))

# Near a half turn the axis is read from the symmetric part of R.
near_pi = (math.pi - 1e-4) * np.array([1.0, 2.0, 2.0]) / 3.0
print("\nround trip at pi - 1e-4:", np.abs(lg.log_so3(lg.exp_so3(near_pi)) - near_pi).max())
try:
    lg.log_so3(lg.exp_so3(math.pi * np.array([0.0, 0.0, 1.0])))
except NearPiSingularity as exc:
    print("exactly pi is refused:", exc)

# Poses: eta = (Theta, beta) maps to g = (R, S(Theta) beta).
eta = np.concatenate([theta, [1.0, -2.0, 0.5]])
g = lg.exp_se3(eta)
print("\npose translation b  ", g.b)
print("log(exp(eta)) - eta ", np.abs(lg.log_se3(g) - eta).max())

# The adjoint is a group homomorphism.
g2 = lg.exp_se3(rng.normal(size=6))
lhs = lg.adjoint_Ad(lg.compose(g, g2))
rhs = lg.adjoint_Ad(g) @ lg.adjoint_Ad(g2)
print("Ad(g g2) - Ad(g) Ad(g2):", np.abs(lhs - rhs).max())

# G(eta) maps a body twist xi to d eta / dt along g exp(t xi); it fixes eta itself.
xi = rng.normal(size=6)
dt = 1e-6
fd = (lg.log_se3(lg.compose(g, lg.exp_se3(dt * xi))) - lg.log_se3(lg.compose(g, lg.exp_se3(-dt * xi)))) / (2 * dt)
print("\nG(eta) xi vs finite difference:", np.abs(lg.g_matrix(eta) @ xi - fd).max())
print("G(eta) eta - eta:", np.abs(lg.g_matrix(eta) @ eta - eta).max())
