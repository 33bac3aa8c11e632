"""Synthetic sensor streams.

Direction and gyro readings with bounded bump-function noise, a seeded
counter-based generator that gives the same draws however the stream is
chunked, and the second-order Butterworth pre-filter for the gyro.
"""

import math

import numpy as np

from geoest import dynamics as dy
from geoest import measurement as ms

h = 0.01
t, rs, om = dy.integrate_attitude(np.eye(3), dy.prescribed_omega, h, 2000)
e = np.eye(3)
half_width = math.radians(2.4)
frames = ms.generate_stream(t, rs, om, e, ms.bump_noise(half_width),
                            ms.GyroNoiseModel(ms.bump_noise(math.radians(0.97))), seed=7)

err = np.array([f.um - r.T @ e for f, r in zip(frames, rs)])
print(f"direction noise: max |n| {err.max():.4f} within the half width {half_width:.4f}, mean {err.mean():+.1e}")

# Identical seeds give identical streams.
again = ms.generate_stream(t, rs, om, e, ms.bump_noise(half_width),
                           ms.GyroNoiseModel(ms.bump_noise(math.radians(0.97))), seed=7)
print("rerun identical:", all(np.array_equal(a.um, b.um) for a, b in zip(frames, again)))

# The block draw equals step-by-step draws.
rng = ms.CounterRng(7)
block = rng.uniforms(0, 0, 50)
steps = np.vstack([rng.uniforms(0, i, 1) for i in range(50)])
print("block == stepwise:", np.array_equal(block, steps))

# Pre-filtering smooths the gyro but adds lag; with slowly varying noise the lag dominates.
gyro = np.array([f.omega_m for f in frames])
filtered = ms.butterworth_filter(gyro, h * 30.0)
raw_err = np.sqrt(np.mean((gyro - om)[500:] ** 2))
filt_err = np.sqrt(np.mean((filtered - om)[500:] ** 2))
print(f"gyro rms error: raw {math.degrees(raw_err):.3f} deg/s, filtered (30 rad/s cutoff) {math.degrees(filt_err):.3f} deg/s")
