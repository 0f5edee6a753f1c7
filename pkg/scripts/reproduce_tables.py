"""Write the conditioning table, the geometry table and every error sweep as CSV.

Usage: python3 scripts/reproduce_tables.py [--out results] [--seed 0] [--small]
"""
import argparse
import math
import time
from pathlib import Path

from grassinterp.experiments import ExperimentConfig, run_conditioning_table, run_error_sweep, run_geometry_table
from grassinterp.experiments.runs import METHODS, SCENARIOS


def summarize(records):
    worst = {}
    for r in records:
        e = math.inf if math.isnan(r.relative_error) else r.relative_error
        worst[r.method] = max(worst.get(r.method, 0.0), e)
    return ", ".join(f"{m} {v:.2e}" for m, v in worst.items())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--small", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    run_conditioning_table(ExperimentConfig(out=str(out / "conditioning.csv")))
    print(f"wrote {out / 'conditioning.csv'}")
    run_geometry_table(ExperimentConfig(seed=args.seed, small=args.small, out=str(out / "geometry.csv")))
    print(f"wrote {out / 'geometry.csv'}")
    for scenario in SCENARIOS:
        path = out / f"sweep_{scenario}.csv"
        t0 = time.perf_counter()
        table = run_error_sweep(
            ExperimentConfig(scenario=scenario, seed=args.seed, small=args.small, methods=METHODS, out=str(path))
        )
        print(f"wrote {path} ({time.perf_counter() - t0:.1f}s): max error {summarize(table.records)}")


if __name__ == "__main__":
    main()
