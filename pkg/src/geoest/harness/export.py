"""CSV and SVG output of run results.

Floats are written with ``repr`` so a CSV parses back to the identical values
and two runs with the same seed give byte-identical files.
"""

from __future__ import annotations

import csv
import math
from xml.sax.saxutils import escape

import numpy as np

from ..errors import IoError, ParseError
from .runner import BenchmarkReport, FilterSeries, RunResult

CSV_COLUMNS = ("t", "filter", "phi_rad", "omega_err_norm", "beta_err_x", "beta_err_y",
               "beta_err_z", "mu_err", "flag")
BENCH_COLUMNS = ("scenario", "filter", "median_runtime_s", "mean_runtime_s", "spread",
                 "step_mean_s", "step_p95_s", "rank", "flag")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _f(x) -> str:
    return repr(float(x))


def _open(path, mode="w"):
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise IoError(f"cannot open {path}: {exc}") from exc


def export_csv(result: RunResult, path) -> None:
    with _open(path) as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for name, s in result.series.items():
            for i in range(len(s)):
                b = s.beta_err[i]
                fh.write(",".join([_f(s.t[i]), name, _f(s.phi[i]), _f(s.omega_err[i]),
                                   _f(b[0]), _f(b[1]), _f(b[2]), _f(s.mu_err[i]), s.flag]) + "\n")


def read_csv(path) -> RunResult:
    """Parse a file written by export_csv back into series (runtimes are not stored)."""
    rows: dict[str, list] = {}
    flags: dict[str, str] = {}
    with _open(path, "r") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ParseError(f"{path}: unexpected header {header}")
        for line in reader:
            if len(line) != len(CSV_COLUMNS):
                raise ParseError(f"{path}: malformed row {line}")
            rows.setdefault(line[1], []).append([float(x) for x in (line[0], *line[2:8])])
            flags[line[1]] = line[8]
    res = RunResult(scenario=str(path), seed=-1)
    for name, data in rows.items():
        a = np.array(data)
        res.series[name] = FilterSeries(name, a[:, 0], a[:, 1], a[:, 2], a[:, 3:6], a[:, 6],
                                        singular=flags[name] == "singular",
                                        converged=flags[name] == "converged")
    return res


def export_benchmark_csv(reports: list[BenchmarkReport], path) -> None:
    with _open(path) as fh:
        w = csv.DictWriter(fh, BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            for row in rep.rows():
                w.writerow(row)


def render_svg(result: RunResult, path, width: int = 720, height: int = 420,
               log_scale: bool = False) -> None:
    """Line chart of phi(t) in degrees for each filter."""
    left, right, top, bottom = 70, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom
    series = list(result.series.values())
    ts = [s.t for s in series if len(s)]
    t0 = min((float(t[0]) for t in ts), default=0.0)
    t1 = max((float(t[-1]) for t in ts), default=1.0)
    t1 = t1 if t1 > t0 else t0 + 1.0

    def ydata(s):
        y = np.degrees(s.phi)
        return np.log10(np.maximum(y, 1e-12)) if log_scale else y

    finite = [ydata(s)[np.isfinite(s.phi)] for s in series]
    finite = [f for f in finite if f.size]
    y0 = min((float(f.min()) for f in finite), default=0.0)
    y1 = max((float(f.max()) for f in finite), default=1.0)
    if not log_scale:
        y0 = min(y0, 0.0)
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(t):
        return left + (t - t0) / (t1 - t0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<title>{escape(result.scenario)}</title>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for k in range(6):
        tv = t0 + k * (t1 - t0) / 5
        yv = y0 + k * (y1 - y0) / 5
        lab = f"1e{yv:.1f}" if log_scale else f"{yv:.3g}"
        out.append(f'<text x="{px(tv):.1f}" y="{top + ph + 18}" text-anchor="middle">{tv:.4g}</text>')
        out.append(f'<text x="{left - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">t (s)</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" transform="rotate(-90 16 {top + ph / 2})" '
               f'text-anchor="middle">principal angle (deg)</text>')
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        y = ydata(s)
        stride = max(1, len(s) // 2000)
        d, pen = [], "M"
        for i in range(0, len(s), stride):
            if not (np.isfinite(y[i]) and math.isfinite(s.t[i])):
                pen = "M"
                continue
            d.append(f"{pen}{px(s.t[i]):.2f},{py(y[i]):.2f}")
            pen = "L"
        if d:
            out.append(f'<path d="{" ".join(d)}" fill="none" stroke="{color}" stroke-width="1.3"/>')
        ly = top + 14 + 18 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly}">{escape(s.name)} ({s.flag})</text>')
    out.append("</svg>")
    with _open(path) as fh:
        fh.write("\n".join(out) + "\n")
