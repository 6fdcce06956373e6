#!/usr/bin/env python3
"""Run the full default benchmark and emit results, summary, and figure data.

Equivalent to:
    commstress run --out out/default
    commstress report --results out/default
"""

import sys
import time
from pathlib import Path

from commstress.harness import BenchmarkConfig, plan_sweep, run_benchmark, run_report


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/default")
    config = BenchmarkConfig(out_dir=str(out))
    print(f"default sweep: {len(plan_sweep(config))} episodes -> {out}")
    started = time.perf_counter()
    results_path, summary_path = run_benchmark(config)
    print(f"done in {time.perf_counter() - started:.1f}s")
    for path in run_report(out):
        print(f"wrote {path}")
    print(f"results: {results_path}")
    print(f"summary: {summary_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
