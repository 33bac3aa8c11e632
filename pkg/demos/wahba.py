"""Wahba's cost as an attitude potential.

Builds weights W so that K = E W E^T has chosen eigenvalues, evaluates the
cost and its gradient S_L, and lists the four critical points of the
potential <I - Q, K> with their Morse indices.
"""

import numpy as np

from geoest import liegroup as lg
from geoest import wahba as wb

rng = np.random.default_rng(1)

# Five known inertial directions.
e = rng.normal(size=(3, 5))
e /= np.linalg.norm(e, axis=0)
w, k = wb.build_weights(e, (3.0, 2.0, 1.0))
print("eig(E W E^T):", np.round(np.sort(np.linalg.eigvalsh(e @ w @ e.T))[::-1], 12))

# Body-frame measurements of those directions for a true attitude R.
r = lg.exp_so3([0.4, -0.3, 1.0])
um = r.T @ e
for name, rhat in (("at the truth", r), ("20 deg off", r @ lg.exp_so3(np.radians(20) * np.array([0, 0, 1.0])))):
    cost = wb.wahba_cost0(rhat, um, e, w)
    grad = wb.s_l(rhat, wb.l_matrix(e, w, um))
    print(f"{name:13s} cost {cost:.6f}  |S_L| {np.linalg.norm(grad):.6f}")

print("\ncritical points of <I - Q, K>:")
for q, idx in wb.critical_points(k):
    print(f"  angle {np.degrees(lg.principal_angle(q)):6.1f} deg  index {idx}  "
          f"potential {wb.attitude_potential(q, k):.3f}  |S_K| {np.linalg.norm(wb.s_k(q, k)):.1e}")
