"""Direction and rate-gyro sensor models, bounded noise families and the
first-order Butterworth pre-filter.

Random draws are counter based: the three noise components of sensor ``s`` at
step ``i`` come from a Philox generator keyed by ``(seed, s)`` with counter
``i``. A stream therefore does not depend on the order in which sensors or
steps are evaluated, and block generation equals step-by-step generation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

GYRO_SENSOR_ID = 0
_DRAWS_PER_STEP = 4  # one Philox block per step, three components used


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise ``D nu(t)`` on a 3-vector.

    kind "none": nu = 0.
    kind "bump": nu components i.i.d. with density proportional to
        exp(-1/(1-x^2)) on (-1, 1); D defaults to half_width * I.
    kind "sinusoid": nu_i(t) = sum_k amps[k] sin(2 pi freqs[k] t + phases[k, i]);
        D defaults to I.
    """

    kind: str = "none"
    half_width: float = 0.0
    freqs_hz: tuple = ()
    amps: tuple = ()
    phases: tuple = ()  # per frequency, three component phases (rad)
    mix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("none", "bump", "sinusoid"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.half_width < 0.0:
            raise ValueError("half_width must be non-negative")
        if self.kind == "sinusoid" and len(self.freqs_hz) != len(self.amps):
            raise ValueError("freqs_hz and amps must have equal length")

    @property
    def mixing(self) -> np.ndarray:
        if self.mix is not None:
            return np.asarray(self.mix, dtype=float)
        scale = self.half_width if self.kind == "bump" else 1.0
        return scale * np.eye(3)

    def bound(self) -> float:
        """Sup-norm bound of each component of D nu."""
        if self.kind == "none":
            return 0.0
        row = np.abs(self.mixing).sum(axis=1).max()
        if self.kind == "bump":
            return float(row)
        return float(row * np.sum(np.abs(self.amps)))


DirectionNoiseModel = NoiseModel


@dataclass(frozen=True)
class GyroNoiseModel:
    noise: NoiseModel = field(default_factory=NoiseModel)
    bias: tuple = (0.0, 0.0, 0.0)


def bump_noise(half_width: float, mix=None) -> NoiseModel:
    return NoiseModel("bump", half_width=half_width, mix=mix)


def sinusoid_noise(freqs_hz, amps, phases=None, mix=None) -> NoiseModel:
    freqs_hz, amps = tuple(freqs_hz), tuple(amps)
    if phases is None:
        phases = tuple((0.0, 0.0, 0.0) for _ in freqs_hz)
    return NoiseModel("sinusoid", freqs_hz=freqs_hz, amps=amps,
                      phases=tuple(tuple(p) for p in phases), mix=mix)


@dataclass(frozen=True)
class MeasurementFrame:
    t: float
    um: np.ndarray  # 3 x k body directions of the active sensors
    omega_m: np.ndarray
    active_sensor_ids: tuple


# ---------------------------------------------------------------------------
# bump distribution


@lru_cache(maxsize=1)
def _bump_table(n: int = 200001):
    x = np.linspace(-1.0, 1.0, n)[1:-1]
    dens = np.exp(-1.0 / (1.0 - x * x))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    return cdf, x


def bump_inverse_cdf(u) -> np.ndarray:
    """Map uniforms in [0, 1) to unit bump samples, strictly inside (-1, 1)."""
    cdf, x = _bump_table()
    return np.interp(u, cdf, x)


def bump_sample(half_width: float, rng: np.random.Generator, size=None):
    if half_width == 0.0:
        return 0.0 if size is None else np.zeros(size)
    return half_width * bump_inverse_cdf(rng.random(size))


# ---------------------------------------------------------------------------
# counter-based draws


class CounterRng:
    """Uniform draws addressed by (sensor_id, step)."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._keys: dict[int, np.ndarray] = {}

    def _key(self, sensor_id: int) -> np.ndarray:
        if sensor_id not in self._keys:
            ss = np.random.SeedSequence([self.seed, int(sensor_id)])
            self._keys[sensor_id] = ss.generate_state(2, dtype=np.uint64)
        return self._keys[sensor_id]

    def uniforms(self, sensor_id: int, step0: int, n_steps: int) -> np.ndarray:
        """(n_steps, 3) uniforms for steps step0 .. step0 + n_steps - 1."""
        gen = np.random.Generator(np.random.Philox(key=self._key(sensor_id),
                                                   counter=[int(step0), 0, 0, 0]))
        return gen.random(_DRAWS_PER_STEP * n_steps).reshape(n_steps, _DRAWS_PER_STEP)[:, :3]


def noise_block(model: NoiseModel, times, sensor_id: int, rng: CounterRng | None,
                step0: int = 0) -> np.ndarray:
    """Noise D nu for every time in ``times`` as an (n, 3) array."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    n = times.size
    if model.kind == "none":
        return np.zeros((n, 3))
    if model.kind == "bump":
        if model.half_width == 0.0 and model.mix is None:
            return np.zeros((n, 3))
        nu = bump_inverse_cdf(rng.uniforms(sensor_id, step0, n))
    else:
        nu = np.zeros((n, 3))
        for k, (f, a) in enumerate(zip(model.freqs_hz, model.amps)):
            ph = np.asarray(model.phases[k], dtype=float)
            nu += a * np.sin(2.0 * np.pi * f * times[:, None] + ph[None, :])
    return nu @ model.mixing.T


def measure_directions(r, e, noise, t: float, rng: CounterRng | None = None,
                       step: int = 0, sensor_ids=None) -> np.ndarray:
    """u_j = R^T e_j + D_j nu_j(t) for each column of ``e``.

    ``noise`` is one model shared by all sensors or a sequence with one per column.
    """
    e = np.asarray(e, dtype=float)
    k = e.shape[1]
    models = noise if isinstance(noise, (list, tuple)) else [noise] * k
    ids = sensor_ids if sensor_ids is not None else range(1, k + 1)
    u = r.T @ e
    for j, (model, sid) in enumerate(zip(models, ids)):
        if model is not None and model.kind != "none":
            u[:, j] += noise_block(model, [t], sid, rng, step)[0]
    return u


def measure_gyro(omega, noise: GyroNoiseModel, t: float, rng: CounterRng | None = None,
                 step: int = 0) -> np.ndarray:
    """Omega^m = Omega + w + beta."""
    w = noise_block(noise.noise, [t], GYRO_SENSOR_ID, rng, step)[0]
    return np.asarray(omega, dtype=float) + w + np.asarray(noise.bias, dtype=float)


# ---------------------------------------------------------------------------
# stream generation


def active_ids_at(schedule, t: float, k: int) -> tuple:
    """Active direction indices at time t from a piecewise-constant schedule.

    ``schedule`` is a list of (t_start, ids) pairs sorted by t_start; None means all.
    """
    if not schedule:
        return tuple(range(k))
    current = tuple(range(k))
    for t0, ids in schedule:
        if t >= t0 - 1e-12:
            current = tuple(ids)
        else:
            break
    return current


def generate_stream(times, rotations, omegas, e, dir_noise, gyro_noise: GyroNoiseModel,
                    seed: int, schedule=None) -> list[MeasurementFrame]:
    """Measurement frames for a whole truth trajectory.

    rotations: (n, 3, 3) true attitudes, omegas: (n, 3) true body rates.
    """
    times = np.asarray(times, dtype=float)
    e = np.asarray(e, dtype=float)
    n, k = times.size, e.shape[1]
    rng = CounterRng(seed)
    models = dir_noise if isinstance(dir_noise, (list, tuple)) else [dir_noise] * k
    u_all = np.einsum("nji,jk->nik", np.asarray(rotations), e)  # R^T e
    for j, model in enumerate(models):
        if model is not None:
            u_all[:, :, j] += noise_block(model, times, j + 1, rng)
    om = (np.asarray(omegas, dtype=float) + noise_block(gyro_noise.noise, times, GYRO_SENSOR_ID, rng)
          + np.asarray(gyro_noise.bias, dtype=float))
    frames = []
    for i in range(n):
        ids = active_ids_at(schedule, times[i], k)
        frames.append(MeasurementFrame(float(times[i]), u_all[i][:, list(ids)], om[i], ids))
    return frames


# ---------------------------------------------------------------------------
# Butterworth pre-filter


@dataclass
class ButterworthState:
    """First-order low-pass state; ``h`` is the normalized step (sample time x cutoff)."""

    xbar: np.ndarray
    h: float

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("h must be positive")


def butterworth_step(state: ButterworthState, xm_k, xm_k1) -> np.ndarray:
    """(2 + h) xbar_{k+1} = (2 - h) xbar_k + h (x^m_k + x^m_{k+1}); updates ``state``."""
    h = state.h
    state.xbar = ((2.0 - h) * np.asarray(state.xbar, float)
                  + h * (np.asarray(xm_k, float) + np.asarray(xm_k1, float))) / (2.0 + h)
    return state.xbar


def butterworth_filter(x, h: float) -> np.ndarray:
    """Filter a whole (n, ...) sequence starting from xbar_0 = x_0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[0] = x[0]
    st = ButterworthState(x[0].copy(), h)
    for i in range(1, x.shape[0]):
        out[i] = butterworth_step(st, x[i - 1], x[i])
    return out
