"""Rigid body truth models.

A body in orbit about a point mass: the Kepler period, conservation of energy
along the structure-preserving integrator, and the gravity-gradient torque.
"""

import numpy as np

from geoest import dynamics as dy
from geoest import liegroup as lg
from geoest.liegroup import Pose

body = dy.RigidBodyParams(21.0, np.diag([2.56, 3.01, 2.98]))
mu, a, rp = 1.729e10, 330e3, 310e3

vp = dy.periapsis_speed(mu, a, rp)
print(f"periapsis speed {vp:.3f} m/s, Kepler period {dy.orbital_period(mu, a):.1f} s")

st = dy.TruthState(Pose(np.eye(3), np.array([rp, 0.0, 0.0])), np.array([0, 0, 0.001, 0, vp, 0.0]), 0.0)
traj = dy.integrate_truth(st, body, dy.SphericalGravity(mu), 1.0, 9200)
print(f"radial period along the integrated orbit {dy.radial_period(traj):.3f} s")

v = np.einsum("nij,nj->ni", traj.r, traj.xi[:, 3:])
r = np.linalg.norm(traj.b, axis=1)
energy = 0.5 * np.sum(v * v, axis=1) - mu / r
print(f"relative energy drift over one orbit {np.ptp(energy) / abs(energy[0]):.1e}")
print(f"rotation matrices stay orthogonal to {np.abs(np.einsum('nji,njk->nik', traj.r, traj.r) - np.eye(3)).max():.1e}")

tilted = Pose(lg.exp_so3([0.3, 0.2, 0.1]), traj.b[0])
torque, force = dy.gravity_wrench(tilted, body, mu)
print("gravity-gradient torque on a tilted body", torque, "N m")
print("gravity force in the body frame", force, "N")
