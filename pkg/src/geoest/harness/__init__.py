"""Scenario configuration, experiment execution, export and the command line."""

from .export import export_csv, read_csv, render_svg
from .replay import replay_imu
from .runner import (BenchmarkReport, FilterSeries, RunResult, compare_filters,
                     metric_principal_angle, metric_series, run_scenario)
from .scenario import Scenario, load_scenario, parse_scenario, shipped_scenarios

__all__ = ["BenchmarkReport", "FilterSeries", "RunResult", "Scenario", "compare_filters",
           "export_csv", "load_scenario", "metric_principal_angle", "metric_series",
           "parse_scenario", "read_csv", "render_svg", "replay_imu", "run_scenario",
           "shipped_scenarios"]
