"""Run the desk-scale campaign and print the per-strategy summary table.

    python3 scripts/reproduce_desk.py --out-dir results/desk [--workers 4]

Reruns against the same directory resume; finished units are skipped.
"""

import argparse
import json
from pathlib import Path

from dcop_coord.bench import CampaignSpec, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/desk")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--runs", type=int, default=None, help="override runs per instance")
    args = ap.parse_args()

    spec = CampaignSpec.desk(args.out_dir)
    if args.runs:
        spec.runs = args.runs
    run_campaign(spec, workers=args.workers)

    report = json.loads((Path(args.out_dir) / "report.json").read_text())
    print(f"{'strategy':<8} {'n':>3} {'n_sol':>5} {'rank1':>6} {'top3':>6} {'fail':>5} {'med_it':>8}")
    for g in report["groups"]:
        med = g["median_iterations"]
        print(
            f"{g['strategy']:<8} {g['n']:>3} {g['n_sol']:>5} {g['rank_hist']['1']:>6.3f} "
            f"{g['top3_rate']:>6.3f} {g['runs'] - g['converged']:>5} "
            f"{med if med is not None else '-':>8}"
        )


if __name__ == "__main__":
    main()
