#!/usr/bin/env python3
"""Reproduce the published model-size tables: for each bundled TSPLIB sample,
generate the k in {1, 1.5, 2, 2.5, 3} x m in {2, 4, 6, 8, 10} instance family
and tabulate #Var./#Con. for both formulations. Encode-only by default; pass
--solver to also solve each cell (slow for anything beyond the smallest
instances).

Usage: python3 scripts/reproduce_tables.py [--out-dir out] [--solver CMD]
                                           [--time-limit SECONDS]
"""

import argparse
import os
import sys

from ppdsp.harness import SolverAdapter, bench, records_to_csv, render_markdown
from ppdsp.instgen import parse_tsplib

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "data")
SAMPLES = ["burma14", "ulysses16", "ulysses22"]
K_LIST = [1.0, 1.5, 2.0, 2.5, 3.0]
M_LIST = [2, 4, 6, 8, 10]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--solver", default=None,
                        help="solver command template with {model_path}; "
                             "omit for encode-only")
    parser.add_argument("--time-limit", type=float, default=600.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    samples = []
    for name in SAMPLES:
        with open(os.path.join(DATA_DIR, f"{name}.tsp")) as fh:
            samples.append(parse_tsplib(fh.read(), name=name))

    adapter = SolverAdapter(command_template=args.solver) if args.solver else None
    records = bench(samples, K_LIST, M_LIST, ["location", "request"],
                    adapter=adapter, time_limit_s=args.time_limit,
                    seed=args.seed)

    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "tables.csv")
    md_path = os.path.join(args.out_dir, "tables.md")
    with open(csv_path, "w") as fh:
        fh.write(records_to_csv(records))
    label = args.solver.split()[0] if args.solver else "none"
    with open(md_path, "w") as fh:
        fh.write(render_markdown(records, solver_label=label,
                                 time_limit_s=args.time_limit
                                 if args.solver else None))
    print(f"{len(records)} cells -> {csv_path}, {md_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
