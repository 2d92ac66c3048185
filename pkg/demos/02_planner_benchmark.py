"""Compare the four planners on the bundled car-interior queries.

A shortened version of the benchmark: one run per query. For the full method
use the CLI, e.g. `bench --runs 5 --out records.csv` then `bench summarize records.csv`.
Run: python3 demos/02_planner_benchmark.py
"""

from armplan.bench import BenchSpec, format_summary, run_benchmark, summarize

spec = BenchSpec(("rrt", "rrtconnect", "bitrrt", "prm"), runs=1, seed=0, timeout=5.0)
records = run_benchmark(spec)
print(f"{len(records)} planning calls over the nine bundled queries\n")
print(format_summary(summarize(records)))

# per-query view for the fastest algorithm
best = summarize(records)[0].algorithm
print(f"\n{best}, per query:")
for r in records:
    if r.algorithm == best:
        status = f"{r.via_point_count} via-points, {r.execution_time:.2f} s motion" if r.success else "failed"
        print(f"  {r.query:28s} {r.plan_time + r.simplify_time:6.3f} s  {status}")
