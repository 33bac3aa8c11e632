"""Scenario execution, error metrics and runtime comparison.

Every configured filter consumes the same measurement frames. Per-step wall
clock time covers only the filter update: truth generation, measurement
synthesis, pre-filtering and metric evaluation happen outside the timed region.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .. import baselines as bl
from .. import dynamics as dy
from .. import liegroup as lg
from .. import se3obs as so
from .. import varest as ve
from ..errors import ConfigError, GeoEstError
from ..liegroup import Pose
from ..measurement import (GyroNoiseModel, NoiseModel, bump_noise, butterworth_filter,
                           generate_stream, sinusoid_noise)
from .scenario import REQUIRED, Scenario, Section

SINGULAR_ANGLE = math.radians(170.0)
SINGULAR_HOLD_S = 1.0
CONVERGED_WINDOW = 0.1  # trailing fraction of the run used for the converged flag


# ---------------------------------------------------------------------------
# result types


@dataclass
class FilterSeries:
    """Error time series of one filter. Samples after a failure are NaN."""

    name: str
    t: np.ndarray
    phi: np.ndarray
    omega_err: np.ndarray
    beta_err: np.ndarray  # (n, 3)
    mu_err: np.ndarray
    runtime_s: float = 0.0
    step_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eta_err: np.ndarray | None = None  # (n, 6), SE(3) runs only
    xi_err: np.ndarray | None = None
    singular: bool = False
    converged: bool = False
    error: str = ""
    states: list = field(default_factory=list, repr=False)

    @property
    def flag(self) -> str:
        if self.singular:
            return "singular"
        return "converged" if self.converged else "ok"

    def __len__(self):
        return self.t.size


@dataclass
class RunResult:
    scenario: str
    seed: int
    series: dict = field(default_factory=dict)

    @property
    def all_failed(self) -> bool:
        return bool(self.series) and all(s.singular for s in self.series.values())


@dataclass
class BenchmarkReport:
    scenario: str
    filters: list
    total_runtime_s: dict  # filter -> list of totals, one per repeat
    step_mean_s: dict
    step_p95_s: dict
    singular: dict

    def median(self, name: str) -> float:
        return float(np.median(self.total_runtime_s[name]))

    def spread(self, name: str) -> float:
        """Relative standard deviation of the total runtime across repeats."""
        x = np.asarray(self.total_runtime_s[name])
        return float(np.std(x) / np.mean(x)) if x.size > 1 else 0.0

    @property
    def ordering(self) -> list:
        return sorted(self.filters, key=self.median)

    def rows(self):
        rank = {n: i + 1 for i, n in enumerate(self.ordering)}
        for n in self.filters:
            yield {"scenario": self.scenario, "filter": n, "median_runtime_s": self.median(n),
                   "mean_runtime_s": float(np.mean(self.total_runtime_s[n])),
                   "spread": self.spread(n), "step_mean_s": self.step_mean_s[n],
                   "step_p95_s": self.step_p95_s[n], "rank": rank[n],
                   "flag": "singular" if self.singular[n] else "ok"}


def report_from_run(result: RunResult) -> BenchmarkReport:
    """Single-repeat report built from the timings of an ordinary run."""
    ser = result.series.values()
    return BenchmarkReport(
        result.scenario, list(result.series),
        {s.name: [s.runtime_s] for s in ser},
        {s.name: float(np.mean(s.step_times)) if s.step_times.size else 0.0 for s in ser},
        {s.name: float(np.percentile(s.step_times, 95)) if s.step_times.size else 0.0 for s in ser},
        {s.name: s.singular for s in ser})


# ---------------------------------------------------------------------------
# metrics


def metric_principal_angle(rtrue, rhat) -> float:
    """phi = principal angle of R R_hat^T (rad)."""
    return lg.principal_angle(np.asarray(rtrue) @ np.asarray(rhat).T)


def metric_series(rtrue, rhat) -> np.ndarray:
    """Principal-angle error for stacked (n, 3, 3) truth and estimates; NaN estimates give NaN."""
    out = np.full(len(rtrue), np.nan)
    for i, (r, rh) in enumerate(zip(rtrue, rhat)):
        if np.all(np.isfinite(rh)):
            out[i] = metric_principal_angle(r, rh)
    return out


def _singular_by_angle(t, phi) -> bool:
    """phi above 170 deg for at least one second."""
    start = None
    for ti, p in zip(t, phi):
        if np.isfinite(p) and p > SINGULAR_ANGLE:
            start = ti if start is None else start
            if ti - start >= SINGULAR_HOLD_S:
                return True
        else:
            start = None
    return False


def _tail(x, frac=CONVERGED_WINDOW):
    n = max(1, int(math.ceil(frac * len(x))))
    return x[-n:]


# ---------------------------------------------------------------------------
# configuration helpers


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def _noise_model(sec: Section, prefix: str, unit: str, k: int, phase_rng) -> list:
    """One noise model per sensor from ``<prefix>_noise`` and its parameters."""
    kind = sec.str(f"{prefix}_noise", "none")
    if kind == "none":
        return [NoiseModel()] * k
    if kind == "bump":
        hw = sec.num(f"{prefix}_bump_halfwidth_{unit}", REQUIRED)
        return [bump_noise(hw)] * k
    if kind == "sinusoid":
        f = sec.vec(f"{prefix}_sin_freqs_hz", default=REQUIRED)
        a = sec.vec(f"{prefix}_sin_amps_{unit}", f.size, REQUIRED)
        return [sinusoid_noise(f, a, phase_rng.uniform(0.0, 2.0 * math.pi, (f.size, 3)))
                for _ in range(k)]
    raise ConfigError(f"[{sec.name}] unknown {prefix}_noise {kind!r}")


def _schedule(text: str | None):
    """``0: 0 1 2 | 30: 0 1`` -> [(0.0, (0, 1, 2)), (30.0, (0, 1))]."""
    if not text:
        return None
    out = []
    for part in text.split("|"):
        t0, ids = part.split(":")
        out.append((float(t0), tuple(int(i) for i in ids.split())))
    return sorted(out)


def _directions(sec: Section) -> np.ndarray:
    e = sec.mat("directions", REQUIRED).T
    if e.shape[0] != 3:
        raise ConfigError("each direction needs three components")
    return e / np.linalg.norm(e, axis=0)


def _rotvec(sec: Section, key: str, default=None):
    v = sec.vec(key, 3, default)
    return None if v is None else lg.exp_so3(v)


# ---------------------------------------------------------------------------
# attitude scenarios


@dataclass
class AttitudeSetup:
    t: np.ndarray
    r: np.ndarray
    omega: np.ndarray
    e: np.ndarray
    frames: list
    beta: np.ndarray


def attitude_truth(s: Scenario):
    sec = s.section("truth")
    steps = s.steps
    r0 = _rotvec(sec, "r0_rotvec_rad")
    if r0 is None:
        std = sec.num("r0_random_angle_std_rad", REQUIRED)
        rng = _rng(s.seed, 1)
        axis = rng.normal(size=3)
        angle = min(abs(rng.normal()) * std, math.pi - 0.1)
        r0 = lg.exp_so3(angle * axis / np.linalg.norm(axis))
    profile = sec.str("profile", "prescribed")
    if profile == "prescribed":
        return dy.integrate_attitude(r0, dy.prescribed_omega, s.h, steps)
    if profile == "rigid":
        j = np.diag(sec.vec("inertia_diag_kgm2", 3, REQUIRED))
        amp = sec.vec("torque_amp_nm", 3, np.zeros(3))
        w = sec.num("torque_freq_rads", 0.0)
        ph = sec.num("torque_phase_rad", 0.0)
        torque = lambda t, r: amp * math.sin(w * t + ph)  # noqa: E731
        return dy.integrate_rigid_attitude(r0, sec.vec("omega0_rads", 3, REQUIRED), j, torque,
                                           s.h, steps)
    raise ConfigError(f"unknown truth profile {profile!r}")


def attitude_setup(s: Scenario) -> AttitudeSetup:
    ts, rs, om = attitude_truth(s)
    sens = s.section("sensors")
    e = _directions(sens)
    k = e.shape[1]
    phase_rng = _rng(s.seed, 2)
    dir_noise = _noise_model(sens, "dir", "rad", k, phase_rng)
    gyro = _noise_model(sens, "gyro", "rads", 1, phase_rng)[0]
    beta = sens.vec("gyro_bias_rads", 3, np.zeros(3))
    frames = generate_stream(ts, rs, om, e, dir_noise, GyroNoiseModel(gyro, tuple(beta)),
                             s.seed, _schedule(sens.str("schedule")))
    return AttitudeSetup(ts, rs, om, e, frames, beta)


def _baseline_weights(s: Scenario, k: int):
    sec = s.section("baselines")
    return bl.sensor_weights(sec.num("noise_coeff_rad", 1.0), k)


def _matched(s: Scenario, setup: AttitudeSetup, rhat0):
    sec = s.section("baselines")
    p0 = np.diag(sec.vec("p0_diag", 3, REQUIRED))
    return bl.matched_initialization(setup.frames[0], setup.e, p0,
                                     _baseline_weights(s, setup.e.shape[1]), rhat0)


def _initial_rhat(sec: Section, setup: AttitudeSetup):
    r = _rotvec(sec, "rhat0_rotvec_rad")
    if r is not None:
        return r
    q0 = _rotvec(sec, "error0_rotvec_rad")
    if q0 is not None:
        return q0.T @ setup.r[0]
    return np.eye(3)


class _Runner:
    """A filter bound to its configuration: ``step(state, i)`` advances from frame i to i+1."""

    name: str

    def initial(self):
        raise NotImplementedError

    def step(self, state, i):
        raise NotImplementedError

    def rhat(self, state):
        return state.rhat

    def omega_hat(self, state, i):
        raise NotImplementedError

    def betahat(self, state):
        return np.zeros(3)


class _VarEstRunner(_Runner):
    def __init__(self, s: Scenario, setup: AttitudeSetup, scheme: str):
        sec = s.section("varest")
        self.name = f"varest_{scheme}"
        self.scheme = scheme
        self.e = setup.e
        frames = setup.frames
        if sec.flag("butterworth", False):
            hn = s.h * sec.num("butterworth_cutoff_rads", 1.0)
            om = butterworth_filter(np.array([f.omega_m for f in frames]), hn)
            frames = [replace(f, omega_m=o) for f, o in zip(frames, om)]
        self.frames = frames
        pb = sec.vec("p_bias_diag", 3, None)
        self.gains = ve.VarEstGains(sec.num("m", REQUIRED), sec.vec("d_diag", 3, REQUIRED),
                                    p_bias=None if pb is None else np.diag(pb))
        self.w = (sec.mat("w_matrix") if sec.has("w_matrix")
                  else ve.WeightDesign(tuple(sec.vec("wahba_d", 3, np.array([3.0, 2.0, 1.0])))))
        beta0 = sec.vec("betahat0_rads", 3, np.zeros(3))
        if sec.str("init", "") == "matched":
            mi = _matched(s, setup, _initial_rhat(s.section("baselines"), setup))
            rhat0, om0 = mi.rhat0, mi.omega0
        else:
            rhat0 = _initial_rhat(sec, setup)
            if sec.has("omega_hat0_rads"):
                om0 = frames[0].omega_m - sec.vec("omega_hat0_rads", 3) - beta0
            else:
                om0 = sec.vec("omega0_rads", 3, np.zeros(3))
        self.state0 = ve.VarEstState(rhat0, np.asarray(om0, float), beta0, float(frames[0].t))
        self.newton = ve.NewtonConfig()

    def initial(self):
        return self.state0

    def step(self, st, i):
        f0, f1 = self.frames[i], self.frames[i + 1]
        if self.scheme == "explicit":
            st = ve.step_explicit(st, f0, f1, self.e, self.w, self.gains)
        else:
            st = ve.SCHEMES[self.scheme](st, f0, f1, self.e, self.w, self.gains, self.newton)
        if (i + 1) % dy.RENORMALIZE_EVERY == 0:
            st = replace(st, rhat=lg.orthonormalize(st.rhat))
        return st

    def omega_hat(self, st, i):
        return self.frames[i].omega_m - st.omega - st.betahat

    def betahat(self, st):
        return st.betahat


class _CovRunner(_Runner):
    def __init__(self, s: Scenario, setup: AttitudeSetup, name: str):
        sec = s.section("baselines")
        self.name = name
        self.e = setup.e
        self.frames = setup.frames
        k = setup.e.shape[1]
        self.weights = _baseline_weights(s, k)
        mi = _matched(s, setup, _initial_rhat(sec, setup))
        if name == "cgo":
            kp = np.diag(sec.vec("k_p_diag", 3)) if sec.has("k_p_diag") else mi.k_p
            self.cfg = bl.CgoConfig(s.h, kp)
            self.fn = bl.cgo_step
            self.state0 = bl.CovFilterState(mi.rhat0, kp, float(self.frames[0].t))
        else:
            q = np.diag(sec.vec("q_cov_diag", 3, REQUIRED))
            self.cfg = bl.GameConfig(s.h, q, self.weights, sec.flag("symmetrize", True))
            self.fn = bl.game_step if name == "game" else bl.mekf_step
            self.state0 = bl.CovFilterState(mi.rhat0, mi.p0, float(self.frames[0].t))

    def initial(self):
        return self.state0

    def step(self, st, i):
        st = self.fn(st, self.frames[i], self.e, self.cfg)
        if (i + 1) % dy.RENORMALIZE_EVERY == 0:
            st = replace(st, rhat=lg.orthonormalize(st.rhat))
        return st

    def omega_hat(self, st, i):
        f = self.frames[i]
        if self.name == "cgo":
            uh = st.rhat.T @ self.e[:, list(f.active_sensor_ids)]
            lbar = sum(lg.cross3(f.um[:, j], uh[:, j]) for j in range(uh.shape[1]))
            return f.omega_m + st.p @ lbar
        return f.omega_m - st.p @ bl.innovation(st.rhat, f, self.e, self.weights)


class _NoopRunner(_Runner):
    """Holds the initial estimate; used to check that timing excludes shared work."""

    name = "noop"

    def __init__(self, s: Scenario, setup: AttitudeSetup):
        self.frames = setup.frames

    def initial(self):
        return ve.VarEstState(np.eye(3), np.zeros(3))

    def step(self, st, i):
        return st

    def omega_hat(self, st, i):
        return np.zeros(3)


def _attitude_runner(s: Scenario, setup: AttitudeSetup, name: str) -> _Runner:
    if name.startswith("varest_"):
        return _VarEstRunner(s, setup, name.split("_", 1)[1])
    if name == "noop":
        return _NoopRunner(s, setup)
    return _CovRunner(s, setup, name)


def _execute(runner: _Runner, n: int):
    """Run n-1 steps; returns (states, per-step times, error message)."""
    st = runner.initial()
    states = [st]
    times = np.zeros(n - 1)
    err = ""
    for i in range(n - 1):
        t0 = time.perf_counter()
        try:
            st = runner.step(st, i)
        except (GeoEstError, FloatingPointError, np.linalg.LinAlgError) as exc:
            err = f"{type(exc).__name__}: {exc}"
            times = times[:i]
            break
        times[i] = time.perf_counter() - t0
        states.append(st)
    return states, times, err


def _attitude_series(s: Scenario, setup: AttitudeSetup, runner: _Runner, states, times, err,
                     converged_tol: float) -> FilterSeries:
    n = setup.t.size
    m = len(states)
    rh = np.full((n, 3, 3), np.nan)
    om_err = np.full(n, np.nan)
    b_err = np.full((n, 3), np.nan)
    for i, st in enumerate(states):
        rh[i] = runner.rhat(st)
        om_err[i] = np.linalg.norm(setup.omega[i] - runner.omega_hat(st, i))
        b_err[i] = setup.beta - runner.betahat(st)
    phi = metric_series(setup.r, rh)
    mu = np.zeros(n)
    mu[m:] = np.nan
    singular = bool(err) or _singular_by_angle(setup.t, phi) or not np.all(np.isfinite(phi[:m]))
    converged = (not singular) and float(np.max(_tail(phi))) < converged_tol
    return FilterSeries(runner.name, setup.t.copy(), phi, om_err, b_err, mu,
                        float(np.sum(times)), times, singular=singular, converged=converged,
                        error=err, states=states)


def _run_attitude(s: Scenario) -> RunResult:
    setup = attitude_setup(s)
    tol = s.section("scenario").num("converged_rad", math.radians(5.0))
    res = RunResult(s.name, s.seed)
    for name in s.filters:
        runner = _attitude_runner(s, setup, name)
        states, times, err = _execute(runner, setup.t.size)
        res.series[name] = _attitude_series(s, setup, runner, states, times, err, tol)
    return res


# ---------------------------------------------------------------------------
# SE(3) scenarios


@dataclass
class Se3Setup:
    params: dy.RigidBodyParams
    truth: dy.DenseTruth
    meas: object  # callable t -> (g, xi, phi) seen by the observer
    gains: object
    state0: so.ObserverState
    mu: float  # normalized gravity parameter, 0 when unused
    kind: str
    substep_cfl: float = 0.5


def _wrench(sec: Section, params: dy.RigidBodyParams, mu_n: float, with_disturbance: bool):
    parts = []
    if mu_n > 0.0:
        parts.append(dy.SphericalGravity(mu_n))
    if sec.has("torque_nm") or sec.has("force_n"):
        parts.append(dy.constant_wrench(sec.vec("torque_nm", 3, np.zeros(3)),
                                        sec.vec("force_n", 3, np.zeros(3)) / params.length_unit))
    if sec.flag("uniform_gravity", False):
        parts.append(dy.UniformGravity())
    if with_disturbance and _has_disturbance(sec):
        w = sec.num("dist_freq_rads", REQUIRED)
        amp = np.concatenate([sec.vec("dist_torque_nm", 3, np.zeros(3)),
                              sec.vec("dist_force_n", 3, np.zeros(3)) / params.length_unit])
        parts.append(dy.Prescribed(lambda t: amp * math.sin(w * t)))
    if not parts:
        return dy.NoForce()
    return parts[0] if len(parts) == 1 else dy.SumForce(parts)


def _has_disturbance(sec: Section) -> bool:
    return sec.has("dist_torque_nm") or sec.has("dist_force_n")


def _noisy(truth: dy.DenseTruth, nominal, sec: Section, lu: float, seed: int):
    """Measurement callable with sinusoidal pose and twist errors and the nominal wrench.

    The nominal wrench is a known input signal, so it comes from the force model at
    the true state rather than being re-evaluated at the noisy pose.
    """
    f = sec.num("freq_hz", 100.0)
    amps = np.concatenate([np.full(3, sec.num("attitude_amp_rad", 0.0)),
                           np.full(3, sec.num("position_amp_m", 0.0) / lu),
                           np.full(3, sec.num("angular_rate_amp_rads", 0.0)),
                           np.full(3, sec.num("velocity_amp_ms", 0.0) / lu)])
    ph = _rng(seed, 3).uniform(0.0, 2.0 * math.pi, 12)

    def meas(t):
        g, xi, _ = truth(t)
        d = amps * np.sin(2.0 * math.pi * f * t + ph)
        gm = Pose(g.r @ lg.exp_so3(d[:3]), g.b + d[3:6])
        xm = xi + d[6:]
        return gm, xm, nominal(t, g, xi, truth.params)

    return meas


def se3_setup(s: Scenario) -> Se3Setup:
    kind = {"se3_gravity": "gravity", "se3_force": "force", "se3_finite_time": "finite_time"}[s.kind]
    body, tr, ob = s.section("body"), s.section("truth"), s.section("observer")
    lu = body.num("length_unit_m", 1.0)
    params = dy.RigidBodyParams(body.num("mass_kg", REQUIRED),
                                np.diag(body.vec("inertia_diag_kgm2", 3, REQUIRED)), lu)
    mu = tr.num("mu_m3s2", 0.0)
    mu_n = mu / lu**3
    r0 = _rotvec(tr, "r0_rotvec_rad", np.zeros(3))
    b0 = tr.vec("position_m", 3, REQUIRED)
    omega0 = tr.vec("omega0_rads", 3, np.zeros(3))
    if tr.flag("orbit_velocity", False):
        vp = dy.periapsis_speed(mu, tr.num("semi_major_m", REQUIRED), np.linalg.norm(b0))
        n = tr.vec("orbit_normal", 3, REQUIRED)
        nu0 = r0.T @ (vp * lg.cross3(n / np.linalg.norm(n), b0 / np.linalg.norm(b0)))
    else:
        nu0 = tr.vec("v0_ms", 3, np.zeros(3))
    g0 = Pose(r0, b0 / lu)
    xi0 = np.concatenate([omega0, nu0 / lu])
    force = _wrench(tr, params, mu_n, True)
    nominal = _wrench(tr, params, mu_n, False)
    truth_h = tr.num("truth_h_s", s.h)
    steps = int(math.ceil(s.duration / truth_h)) + 1
    traj = dy.integrate_truth(dy.TruthState(g0, xi0, 0.0), params, force, truth_h, steps)
    dense = dy.DenseTruth(traj, params, force)
    noise = s.section("noise")
    if noise.raw:
        meas = _noisy(dense, nominal, noise, lu, s.seed)
    elif not _has_disturbance(tr):
        meas = dense
    else:
        meas = lambda t: (lambda g, xi, _: (g, xi, nominal(t, g, xi, params)))(*dense(t))  # noqa: E731

    if kind == "gravity":
        gains = so.GravityObserverGains(ob.vec("k1"), ob.num("k2", REQUIRED), ob.num("k3", REQUIRED),
                                        ob.vec("k4"))
    elif kind == "force":
        gains = so.ForceObserverGains(ob.num("k1", REQUIRED), ob.num("k2", REQUIRED),
                                      ob.num("k3", REQUIRED))
    else:
        gains = so.FiniteTimeGains(ob.num("k", REQUIRED), int(ob.num("p_num", REQUIRED)),
                                   int(ob.num("p_den", REQUIRED)), ob.num("gamma", REQUIRED))
    if ob.flag("ghat0_relative", False):
        ghat0 = Pose(g0.r @ lg.exp_so3(ob.vec("ghat0_rotvec_rad", 3, np.zeros(3))),
                     g0.b + ob.vec("ghat0_position_m", 3, np.zeros(3)) / lu)
    else:
        ghat0 = Pose(lg.exp_so3(ob.vec("ghat0_rotvec_rad", 3, np.zeros(3))),
                     ob.vec("ghat0_position_m", 3, np.zeros(3)) / lu)
    xihat0 = np.concatenate([ob.vec("omegahat0_rads", 3, np.zeros(3)),
                             ob.vec("vhat0_ms", 3, np.zeros(3)) / lu])
    state0 = so.initial_state(ghat0, xihat0, meas(0.0)[0], 0.0, ob.num("muhat0_m3s2", 0.0) / lu**3)
    return Se3Setup(params, dense, meas, gains, state0, mu_n, kind, ob.num("substep_cfl", 0.5))


def se3_errors(st: so.ObserverState, g, xi):
    """(eta_err, xi_err) of an observer state against the true pose and twist."""
    h = lg.compose(lg.inverse(st.ghat), g)
    eta = lg.log_se3(h)
    xi_err = np.asarray(xi) - lg.adjoint_Ad(lg.inverse(h)) @ st.xihat
    return eta, xi_err


def _run_se3(s: Scenario) -> RunResult:
    setup = se3_setup(s)
    step = {"gravity": so.gravity_observer_step, "force": so.force_observer_step,
            "finite_time": so.finite_time_observer_step}[setup.kind]
    extra = {"substep_cfl": setup.substep_cfl} if setup.kind == "finite_time" else {}
    n = s.steps + 1
    st = setup.state0
    states = [st]
    times = np.zeros(n - 1)
    err = ""
    for i in range(n - 1):
        t0 = time.perf_counter()
        try:
            st = step(st, setup.meas, setup.params, setup.gains, s.h, **extra)
        except (GeoEstError, FloatingPointError, np.linalg.LinAlgError) as exc:
            err = f"{type(exc).__name__}: {exc}"
            times = times[:i]
            break
        times[i] = time.perf_counter() - t0
        states.append(st)
    t = s.h * np.arange(n)
    eta = np.full((n, 6), np.nan)
    xe = np.full((n, 6), np.nan)
    phi = np.full(n, np.nan)
    mu = np.full(n, np.nan)
    for i, stt in enumerate(states):
        g, xi, _ = setup.truth(stt.t)
        eta[i], xe[i] = se3_errors(stt, g, xi)
        phi[i] = metric_principal_angle(g.r, stt.ghat.r)
        mu[i] = setup.mu - stt.muhat if setup.kind == "gravity" else 0.0
    tol = s.section("scenario").num("converged_tol", 1e-3)
    singular = bool(err)
    tail = np.maximum(np.abs(_tail(eta)).max(axis=1), np.abs(_tail(xe)).max(axis=1))
    converged = (not singular) and float(np.max(tail)) < tol
    name = s.filters[0]
    series = FilterSeries(name, t, phi, np.linalg.norm(xe, axis=1), eta[:, 3:].copy(), mu,
                          float(np.sum(times)), times, eta, xe, singular, converged, err, states)
    return RunResult(s.name, s.seed, {name: series})


# ---------------------------------------------------------------------------
# entry points


def run_scenario(s: Scenario) -> RunResult:
    """Run every configured filter on one shared measurement stream."""
    if not (s.duration >= s.h > 0.0):
        raise ConfigError("duration_s must be at least h_s > 0")
    if s.kind == "attitude":
        return _run_attitude(s)
    return _run_se3(s)


def compare_filters(s: Scenario, repeats: int = 5) -> BenchmarkReport:
    """Runtime comparison: each filter is run ``repeats`` times on the same frames."""
    if s.kind != "attitude" or len(s.filters) < 2:
        raise ConfigError("comparison needs an attitude scenario with at least two filters")
    if repeats < 1:
        raise ConfigError("repeats must be positive")
    setup = attitude_setup(s)
    runners = {name: _attitude_runner(s, setup, name) for name in s.filters}
    totals = {n: [] for n in s.filters}
    steps = {n: [] for n in s.filters}
    singular = {n: False for n in s.filters}
    for _ in range(repeats):
        for name, runner in runners.items():
            _, times, err = _execute(runner, setup.t.size)
            totals[name].append(float(np.sum(times)))
            steps[name].append(times)
            singular[name] |= bool(err)
    step_all = {n: np.concatenate(steps[n]) if steps[n] else np.zeros(1) for n in s.filters}
    return BenchmarkReport(
        s.name, list(s.filters), totals,
        {n: float(np.mean(v)) if v.size else 0.0 for n, v in step_all.items()},
        {n: float(np.percentile(v, 95)) if v.size else 0.0 for n, v in step_all.items()},
        singular)
