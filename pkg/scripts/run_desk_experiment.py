#!/usr/bin/env python3
"""Run the desk-scale benchmark end to end and print the metric tables.

Runs the (alpha, shots) grid of configs/desk_mode.json (or a config given
with --config), analyzes the records into metric tables, and dumps
quality-diagram data for every configuration. Everything lands under the
output directory:

    records.jsonl  config.json  timings.jsonl
    tables/metrics.csv + table_*.csv + selected.csv
    diagrams/<config_id>/{scatter,bins,level_curves}.csv

Usage: python scripts/run_desk_experiment.py [--config FILE] [--out DIR] [--workers N]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from vqabench.harness import (
    analyze,
    config_id,
    emit_quality_diagram_data,
    load_config,
    run_experiment,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    default_cfg = os.path.join(os.path.dirname(__file__), "..", "configs", "desk_mode.json")
    parser.add_argument("--config", default=default_cfg)
    parser.add_argument("--out", default="results/desk_mode")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()

    cfg = load_config(args.config)
    n_total = len(cfg.alphas) * len(cfg.shots_grid) * cfg.runs_per_config
    print(f"running {n_total} optimizations on {args.workers} workers ...")
    records = run_experiment(cfg, args.out, workers=args.workers, resume=True)
    n_failed = sum(1 for r in records if r.error is not None)
    print(f"done: {len(records)} records ({n_failed} failed)")

    reports = analyze(records, cfg, out_dir=os.path.join(args.out, "tables"))
    for cid in sorted(reports, key=lambda c: (reports[c].alpha, reports[c].shots)):
        rep = reports[cid]
        print(
            f"  {cid}: F={rep.feasibility.value:.2f}±{rep.feasibility.half_width:.2f}  "
            f"Q={rep.quality.value:.2f}±{rep.quality.half_width:.2f}  "
            f"R={rep.reproducibility.value:.2f}±{rep.reproducibility.half_width:.2f}  "
            f"-> {rep.verdict.value}"
        )

    for alpha in cfg.alphas:
        for shots in cfg.shots_grid:
            cid = config_id(alpha, shots)
            emit_quality_diagram_data(
                records, cfg, cid, os.path.join(args.out, "diagrams", cid)
            )
    print(f"tables and diagram data under {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
