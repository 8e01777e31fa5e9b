"""Benchmark harness: scenarios, metrics CSV, and summaries.

Runs a reduced still-water scenario through the harness, prints the
summary table, and shows the artifacts a run leaves behind.  The same
machinery drives the full quad-vortex and uniform-channel experiments:

    streamplan run quad-vortex --out results/qv
    streamplan summarize results/qv

Run:  python demos/07_benchmark.py
"""

import os
import tempfile
from dataclasses import replace

from streamplan.bench import (
    builtin_scenario,
    format_summary,
    run_scenario,
    save_scenario,
    summarize,
)

sc = builtin_scenario("still-water")
sc = replace(sc, seeds=(0, 1, 2), budget_iterations=600)

out = tempfile.mkdtemp(prefix="streamplan_demo_")
records = run_scenario(sc, out_dir=out)
print(format_summary(summarize(records)))

print("artifacts written:")
for name in sorted(os.listdir(out)):
    print("  ", name)

# scenario files capture the whole experiment declaratively
path = os.path.join(out, "still-water.ini")
save_scenario(sc, path)
print(f"\nscenario file ({path}):\n")
with open(path) as fh:
    print(fh.read())
