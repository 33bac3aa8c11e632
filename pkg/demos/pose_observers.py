"""Pose and velocity observers on SE(3).

A finite-time observer for a body under a known wrench, and an observer that
also learns the gravity parameter of the body it orbits.
"""

import numpy as np

from geoest.harness import runner, scenario

for name in ("ch3_finite_time", "ch2_asteroid"):
    s = scenario.load_scenario(name, {"scenario": {"duration_s": "2" if name.startswith("ch3") else "100"}})
    series = runner.run_scenario(s).series[s.filters[0]]
    print(f"\n{name}: {s.kind}, h = {s.h} s")
    for target in (0.0, 0.1, 0.3, 0.5, 1.0, 2.0, 10.0, 50.0, 100.0):
        if target > series.t[-1]:
            break
        i = int(np.searchsorted(series.t, target))
        line = (f"  t = {series.t[i]:6.2f} s  |eta err| {np.abs(series.eta_err[i]).max():.2e}  "
                f"|xi err| {np.abs(series.xi_err[i]).max():.2e}")
        if s.kind == "se3_gravity":
            line += f"  mu err {series.mu_err[i]:+.2e}"
        print(line)
