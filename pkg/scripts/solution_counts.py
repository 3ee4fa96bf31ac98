"""Tabulate how many solutions the generator produces per grid cell.

Writes one CSV row per instance and prints min/median/max per (n, n_sol).

    python3 scripts/solution_counts.py --n 10 20 --n-sol 3 5 --seeds 0..19 --out counts.csv
"""

import argparse
import csv
import statistics
from collections import defaultdict

from dcop_coord.enumeration import LimitExceeded, enumerate_solutions
from dcop_coord.generator import DistinctSolutionExhaustion, GenerationParams, generate_instance
from dcop_coord.bench import parse_seed_range


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 20])
    ap.add_argument("--n-sol", type=int, nargs="+", default=[3, 5])
    ap.add_argument("--seeds", default="0..19")
    ap.add_argument("--limit", type=int, default=10**6)
    ap.add_argument("--out", default="solution_counts.csv")
    args = ap.parse_args()

    by_cell = defaultdict(list)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "n_sol", "seed", "count", "distinct_values"])
        for n in args.n:
            for n_sol in args.n_sol:
                for seed in parse_seed_range(args.seeds):
                    try:
                        inst = generate_instance(GenerationParams(n=n, n_sol=n_sol, seed=seed))
                        sols = enumerate_solutions(inst, args.limit)
                    except (DistinctSolutionExhaustion, LimitExceeded) as exc:
                        w.writerow([n, n_sol, seed, type(exc).__name__, ""])
                        continue
                    w.writerow([n, n_sol, seed, sols.count, len(sols.distinct_values)])
                    by_cell[n, n_sol].append(sols.count)
    for (n, n_sol), counts in sorted(by_cell.items()):
        print(f"n={n:<4} n_sol={n_sol:<3} min={min(counts)} median={statistics.median(counts)} max={max(counts)}")


if __name__ == "__main__":
    main()
