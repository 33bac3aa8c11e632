"""Run the variational estimator over a recorded IMU log.

The log is a CSV with header ``t,ax,ay,az,mx,my,mz,gx,gy,gz`` in the body
frame. The normalized accelerometer reading is the local up direction and the
normalized magnetometer reading is the geomagnetic field direction; their
cross product is the third measured direction. Blank or NaN cells mean the
sensor had no new sample, so its last read value is reused. Optional columns
``rx,ry,rz`` (rotation vector of the true attitude) and ``wx,wy,wz`` (true
body rate) enable error metrics.
"""

from __future__ import annotations

import csv
import math
import time

import numpy as np

from .. import liegroup as lg
from .. import varest as ve
from ..errors import GeoEstError, NonMonotoneTimestamps, ParseError
from ..measurement import ButterworthState, MeasurementFrame, butterworth_step
from .runner import FilterSeries, RunResult, metric_principal_angle
from .scenario import Section

IMU_COLUMNS = ("t", "ax", "ay", "az", "mx", "my", "mz", "gx", "gy", "gz")
TRUTH_COLUMNS = ("rx", "ry", "rz")
RATE_COLUMNS = ("wx", "wy", "wz")

# east-north-up frame: local up and the geomagnetic field direction
REPLAY_DEFAULTS = {
    "scheme": "symmetric",
    "e_up": "0 0 1",
    "e_mag": "0.0772 0.6117 -0.7873",
    "w_matrix": "3.19 1.51 0; 1.51 3.19 0; 0 0 2",
    "m": "0.5",
    "d_diag": "12 13 14",
    "butterworth": "on",
    "butterworth_cutoff_rads": "1",
    "rhat0_rotvec_rad": "0 0 0",
    "omega0_rads": "0.001 0.002 -0.003",
}


def _cell(text: str) -> float:
    text = text.strip()
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}") from None


def read_imu_csv(path):
    """(columns, data) with blanks as NaN; checks the header and the time column."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        missing = [c for c in IMU_COLUMNS if c not in header]
        if missing:
            raise ParseError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for k, line in enumerate(reader, start=2):
            if not line:
                continue
            if len(line) != len(header):
                raise ParseError(f"{path}:{k}: expected {len(header)} fields, got {len(line)}")
            rows.append([_cell(x) for x in line])
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    col = {c: i for i, c in enumerate(header)}
    t = data[:, col["t"]]
    if t.size < 2:
        raise ParseError(f"{path}: need at least two samples")
    if not np.all(np.isfinite(t)):
        raise ParseError(f"{path}: every row needs a timestamp")
    bad = np.nonzero(np.diff(t) <= 0.0)[0]
    if bad.size:
        raise NonMonotoneTimestamps(f"{path}: t[{bad[0] + 1}]={t[bad[0] + 1]} after {t[bad[0]]}")
    return col, data


def hold_last(x: np.ndarray) -> np.ndarray:
    """Replace NaN rows by the last finite reading; leading gaps stay NaN."""
    out = x.copy()
    for i in range(1, out.shape[0]):
        gap = ~np.isfinite(out[i])
        out[i, gap] = out[i - 1, gap]
    return out


def replay_imu(path, scenario_overrides: dict | None = None) -> RunResult:
    """Estimate attitude from an IMU log; overrides go in a ``[replay]`` section."""
    raw = dict(REPLAY_DEFAULTS)
    raw.update((scenario_overrides or {}).get("replay", {}))
    sec = Section("replay", raw)
    col, data = read_imu_csv(path)

    def block(names):
        return hold_last(data[:, [col[c] for c in names]])

    acc, mag, gyro = block(IMU_COLUMNS[1:4]), block(IMU_COLUMNS[4:7]), block(IMU_COLUMNS[7:10])
    t = data[:, col["t"]]
    ready = np.all(np.isfinite(np.hstack([acc, mag, gyro])), axis=1)
    if not ready.any():
        raise ParseError(f"{path}: no row where every sensor has been read")
    first = int(np.argmax(ready))
    t, acc, mag, gyro = t[first:], acc[first:], mag[first:], gyro[first:]
    if t.size < 2:
        raise ParseError(f"{path}: need at least two complete samples")

    if sec.flag("butterworth"):
        wc = sec.num("butterworth_cutoff_rads")
        filt = [ButterworthState(x[0].copy(), 1.0) for x in (acc, mag, gyro)]
        out = [np.empty_like(x) for x in (acc, mag, gyro)]
        for o, x in zip(out, (acc, mag, gyro)):
            o[0] = x[0]
        for i in range(1, t.size):
            for st, o, x in zip(filt, out, (acc, mag, gyro)):
                st.h = (t[i] - t[i - 1]) * wc
                o[i] = butterworth_step(st, x[i - 1], x[i])
        acc, mag, gyro = out

    for name, x in (("accelerometer", acc), ("magnetometer", mag)):
        if np.any(np.linalg.norm(x, axis=1) == 0.0):
            raise ParseError(f"{path}: zero {name} reading")
    up = acc / np.linalg.norm(acc, axis=1)[:, None]
    fld = mag / np.linalg.norm(mag, axis=1)[:, None]
    e_up, e_mag = sec.vec("e_up", 3), sec.vec("e_mag", 3)
    e = np.column_stack([e_up / np.linalg.norm(e_up), e_mag / np.linalg.norm(e_mag)])
    frames = [MeasurementFrame(float(t[i]), np.column_stack([up[i], fld[i]]), gyro[i], (0, 1))
              for i in range(t.size)]

    scheme = sec.str("scheme")
    gains = ve.VarEstGains(sec.num("m"), sec.vec("d_diag", 3))
    w = sec.mat("w_matrix")
    st = ve.VarEstState(lg.exp_so3(sec.vec("rhat0_rotvec_rad", 3)), sec.vec("omega0_rads", 3),
                        t=float(t[0]))
    states, times, err = [st], [], ""
    for i in range(t.size - 1):
        t0 = time.perf_counter()
        try:
            if scheme == "explicit":
                st = ve.step_explicit(st, frames[i], frames[i + 1], e, w, gains)
            else:
                st = ve.SCHEMES[scheme](st, frames[i], frames[i + 1], e, w, gains)
        except GeoEstError as exc:
            err = f"{type(exc).__name__}: {exc}"
            break
        times.append(time.perf_counter() - t0)
        states.append(st)

    n = t.size
    phi = np.full(n, np.nan)
    om_err = np.full(n, np.nan)
    truth = TRUTH_COLUMNS[0] in col
    rates = RATE_COLUMNS[0] in col
    if truth:
        rv = data[first:, [col[c] for c in TRUTH_COLUMNS]]
    if rates:
        wt = data[first:, [col[c] for c in RATE_COLUMNS]]
    for i, s in enumerate(states):
        if truth:
            phi[i] = metric_principal_angle(lg.exp_so3(rv[i]), s.rhat)
        if rates:
            om_err[i] = np.linalg.norm(wt[i] - (gyro[i] - s.omega))
    name = f"varest_{scheme}"
    series = FilterSeries(name, t.copy(), phi, om_err, np.full((n, 3), np.nan), np.zeros(n),
                          float(np.sum(times)), np.array(times), singular=bool(err), error=err,
                          states=states)
    if truth and not err:
        series.converged = bool(np.nanmax(phi[-max(1, n // 10):]) < math.radians(5.0))
    return RunResult(str(path), 0, {name: series})


def write_imu_csv(path, t, acc, mag, gyro, r_true=None, omega_true=None) -> None:
    """Write a log in the replay format; NaN entries become blank cells."""
    cols = list(IMU_COLUMNS)
    blocks = [np.asarray(t, float)[:, None], acc, mag, gyro]
    if r_true is not None:
        cols += TRUTH_COLUMNS
        blocks.append(np.array([lg.log_so3(r) for r in r_true]))
    if omega_true is not None:
        cols += RATE_COLUMNS
        blocks.append(omega_true)
    data = np.hstack(blocks)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join("" if not np.isfinite(x) else repr(float(x)) for x in row) + "\n")
