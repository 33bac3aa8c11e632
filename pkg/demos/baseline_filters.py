"""Covariance-based and constant-gain attitude filters.

GAME, MEKF and a constant-gain observer run on the same noisy stream as the
variational estimator, started from the same attitude and the same initial
attitude rate.
"""

import math

import numpy as np

from geoest import baselines as bl
from geoest import dynamics as dy
from geoest import liegroup as lg
from geoest import measurement as ms
from geoest import varest as ve

h, steps = 0.01, 2000
e = np.eye(3)
t, rs, om = dy.integrate_attitude(lg.exp_so3([0.2, 0.4, -0.3]), dy.prescribed_omega, h, steps)
frames = ms.generate_stream(t, rs, om, e, ms.bump_noise(math.radians(5)),
                            ms.GyroNoiseModel(ms.bump_noise(math.radians(2))), seed=3)

weights = bl.sensor_weights(math.radians(30), 3)
p0 = 9 / math.pi**2 * np.eye(3)
init = bl.matched_initialization(frames[0], e, p0, weights, lg.exp_so3([1.5, 0.0, 0.0]) @ rs[0])
q = math.radians(25) ** 2 * np.eye(3)

filters = {
    "game": (bl.game_step, bl.GameConfig(h, q, weights), bl.CovFilterState(init.rhat0, init.p0, 0.0)),
    "mekf": (bl.mekf_step, bl.GameConfig(h, q, weights), bl.CovFilterState(init.rhat0, init.p0, 0.0)),
    "cgo": (bl.cgo_step, bl.CgoConfig(h, init.k_p), bl.CovFilterState(init.rhat0, init.k_p, 0.0)),
}
print(f"initial error {math.degrees(lg.principal_angle(rs[0] @ init.rhat0.T)):.1f} deg")
for name, (step, cfg, st) in filters.items():
    for f in frames[:-1]:
        st = step(st, f, e, cfg)
    print(f"{name:7s} phi(20 s) {math.degrees(lg.principal_angle(rs[-1] @ st.rhat.T)):.2f} deg")

gains = ve.VarEstGains(1.0, [2.5, 3.0, 3.5])
states = ve.run(frames, ve.VarEstState(init.rhat0, init.omega0), e, ve.WeightDesign(), gains, "explicit")
print(f"{'varest':7s} phi(20 s) {math.degrees(lg.principal_angle(rs[-1] @ states[-1].rhat.T)):.2f} deg")
