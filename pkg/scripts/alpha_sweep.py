"""Compare DSA activation probabilities against the adaptive k policy.

    python3 scripts/alpha_sweep.py --out-dir results/alpha --n 10 --n-sol 3 --seeds 0..19
"""

import argparse
import json
from pathlib import Path

from dcop_coord.bench import CampaignSpec, parse_seed_range, run_campaign

ALPHAS = (1.0, 0.9, 0.7)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/alpha")
    ap.add_argument("--n", type=int, nargs="+", default=[10])
    ap.add_argument("--n-sol", type=int, nargs="+", default=[3])
    ap.add_argument("--seeds", default="0..19")
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    strategies = [{"strategy": "kada"}] + [
        {"strategy": "dsa", "alpha": a, "epsilon": 0.0, "label": f"dsa_a{a:g}"} for a in ALPHAS
    ]
    spec = CampaignSpec(
        args.n, args.n_sol, parse_seed_range(args.seeds), args.out_dir,
        strategies=strategies, runs=args.runs,
    )
    run_campaign(spec, workers=args.workers)
    for g in json.loads((Path(args.out_dir) / "report.json").read_text())["groups"]:
        print(
            f"{g['strategy']:<10} n={g['n']:<3} n_sol={g['n_sol']:<2} "
            f"rank1={g['rank_hist']['1']:.3f} fail={g['rank_hist']['Fail']:.3f} "
            f"median_iter={g['median_iterations']}"
        )


if __name__ == "__main__":
    main()
