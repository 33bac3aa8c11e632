"""Command line entry point ``geoest``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure in every filter.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, IoError, NonMonotoneTimestamps, ParseError
from .export import export_benchmark_csv, export_csv, render_svg
from .replay import replay_imu
from .runner import compare_filters, report_from_run, run_scenario
from .scenario import load_overrides, load_scenario, shipped_scenarios

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
log = logging.getLogger("geoest")


def _outdir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {p}: {exc}") from exc
    return p


def _write(result, out: Path, stem: str, fmt: str) -> None:
    if fmt in ("csv", "both"):
        export_csv(result, out / f"{stem}.csv")
        log.info("wrote %s", out / f"{stem}.csv")
    if fmt in ("svg", "both"):
        render_svg(result, out / f"{stem}.svg")
        log.info("wrote %s", out / f"{stem}.svg")


def _summary(result) -> None:
    for name, s in result.series.items():
        line = f"{name:18s} {s.flag:9s} runtime {s.runtime_s:.4f} s"
        if len(s) and s.phi.size:
            line += f"  final phi {s.phi[-1]:.3e} rad"
        if s.error:
            line += f"  ({s.error})"
        print(line)


def cmd_simulate(args) -> int:
    s = load_scenario(args.scenario)
    if args.seed is not None:
        s.seed = args.seed
    result = run_scenario(s)
    _write(result, _outdir(args.out or s.out_dir), s.name, args.format)
    _summary(result)
    return EXIT_NUMERIC if result.all_failed else EXIT_OK


def cmd_compare(args) -> int:
    s = load_scenario(args.scenario)
    if args.seed is not None:
        s.seed = args.seed
    rep = compare_filters(s, args.repeats)
    out = _outdir(args.out or s.out_dir)
    export_benchmark_csv([rep], out / f"{s.name}_bench.csv")
    for row in rep.rows():
        print(f"{row['filter']:18s} median {row['median_runtime_s']:.4f} s  "
              f"spread {100 * row['spread']:.1f}%  rank {row['rank']}  {row['flag']}")
    print("ordering:", " < ".join(rep.ordering))
    if args.format in ("svg", "both"):
        _write(run_scenario(s), out, s.name, "svg")
    return EXIT_NUMERIC if all(rep.singular.values()) else EXIT_OK


def cmd_bench(args) -> int:
    out = _outdir(args.out or "out")
    reports = []
    for name in shipped_scenarios():
        s = load_scenario(name)
        if s.kind == "attitude" and len(s.filters) >= 2:
            reports.append(compare_filters(s, args.repeats))
        else:
            reports.append(report_from_run(run_scenario(s)))
        print(f"{name}: " + " < ".join(reports[-1].ordering))
    export_benchmark_csv(reports, out / "bench.csv")
    log.info("wrote %s", out / "bench.csv")
    return EXIT_OK


def cmd_replay(args) -> int:
    overrides = load_overrides(args.scenario) if args.scenario else None
    result = replay_imu(args.log, overrides)
    _write(result, _outdir(args.out or "out"), Path(args.log).stem + "_replay", args.format)
    _summary(result)
    return EXIT_NUMERIC if result.all_failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoest", description="Geometric rigid-body estimators.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "svg", "both"), default="csv")

    sp = sub.add_parser("simulate", help="run one scenario file or shipped scenario name")
    sp.add_argument("scenario")
    common(sp)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("compare", help="runtime comparison of the configured filters")
    sp.add_argument("scenario")
    sp.add_argument("--repeats", type=int, default=5)
    common(sp)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("bench", help="run every shipped scenario and write bench.csv")
    sp.add_argument("--repeats", type=int, default=5)
    common(sp, seed=False)
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("replay", help="run the estimator over an IMU CSV log")
    sp.add_argument("log")
    sp.add_argument("--scenario", help="overrides file with a [replay] section")
    common(sp, seed=False)
    sp.set_defaults(fn=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, ParseError, NonMonotoneTimestamps) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
