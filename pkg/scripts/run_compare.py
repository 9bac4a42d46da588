#!/usr/bin/env python3
"""Reproduce the three-strategy comparison at desk scale.

Measures the baseline's sustainable limit, then runs all three strategies
at 1.5x that rate on an identical seeded trace and prints the comparison
table plus the headline ratios.  Reports land in --out (default ./reports).
"""

import argparse
import time

from feedgate.sim import (
    CostModel,
    Strategy,
    compare_strategies,
    find_max_sustainable,
    format_table,
    write_report,
)
from feedgate.workload import WorkloadSpec


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--duration", type=float, default=30.0)
    parser.add_argument("--out", default="reports")
    args = parser.parse_args()

    t0 = time.perf_counter()
    print("measuring baseline sustainable throughput ...", flush=True)
    template = WorkloadSpec(rate_eps=1.0, duration_s=3.0, seed=args.seed)
    base_max = find_max_sustainable(Strategy.BASELINE, CostModel(), template)
    adaptive_max = find_max_sustainable(Strategy.ADAPTIVE, CostModel(), template)
    print(
        f"  baseline: {base_max.eps:,.0f} eps | adaptive: {adaptive_max.eps:,.0f} eps"
        f"{' (capped)' if adaptive_max.capped else ''}"
        f" | ratio {adaptive_max.eps / base_max.eps:.1f}x"
    )

    overload = 1.5 * base_max.eps
    print(f"\ncomparing at overload rate {overload:,.0f} eps for {args.duration:.0f}s ...")
    spec = WorkloadSpec(rate_eps=overload, duration_s=args.duration, seed=args.seed)
    reports = compare_strategies(spec)
    print(format_table(reports))

    base, fixed, adaptive = reports["baseline"], reports["fixed"], reports["ai-ar"]
    if base.jank_pct > 0:
        print(f"\njank reduction:     {1 - adaptive.jank_pct / base.jank_pct:.0%}")
    print(f"work reduction:     {1 - adaptive.render_work_total_us / base.render_work_total_us:.0%}")
    print(
        "recall proxy:       "
        f"adaptive {adaptive.recall_proxy:.2f} | baseline {base.recall_proxy:.2f}"
        f" | fixed {fixed.recall_proxy:.2f}"
    )
    for name, report in reports.items():
        write_report(report, args.out, f"report-{name}.json")
    print(f"\nreports written to {args.out}/ ({time.perf_counter() - t0:.1f}s total)")


if __name__ == "__main__":
    main()
