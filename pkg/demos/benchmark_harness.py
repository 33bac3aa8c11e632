"""The scenario harness behind the ``geoest`` command.

Loads a shipped scenario, overrides a value, runs every configured filter on
one shared stream, writes CSV and SVG outputs, and times the filters against
each other.
"""

import tempfile
from pathlib import Path

from geoest.harness import export, runner, scenario

print("shipped scenarios:", ", ".join(scenario.shipped_scenarios()))

s = scenario.load_scenario("ch5_case1", {"scenario": {"duration_s": "10"}})
result = runner.run_scenario(s)
for name, series in result.series.items():
    print(f"  {name:16s} {series.flag:9s} final error {series.phi[-1]:.4f} rad")

out = Path(tempfile.mkdtemp(prefix="geoest_demo_"))
export.export_csv(result, out / "case1.csv")
export.render_svg(result, out / "case1.svg")
print("wrote", out / "case1.csv", "and", out / "case1.svg")

report = runner.compare_filters(s, repeats=3)
print("runtime order:", " < ".join(report.ordering))

case2 = runner.run_scenario(scenario.load_scenario("ch5_case2", {"scenario": {"duration_s": "5"}}))
print("low-noise case:", ", ".join(f"{n} {v.flag}" for n, v in case2.series.items()))
