"""Greedy runtime versus N with balanced planted regions (T=65, S=8).

    python3 scripts/runtime_scaling.py --sizes 1000,2000,5000,10000 --out runtime.csv
"""
import argparse
import csv
import time

import numpy as np

from mdlregion import adjusted_mutual_information, generate, greedy_regionalize
from mdlregion.synthetic import instance_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", default="1000,2000,5000,10000,20000,50000")
    ap.add_argument("--sites-per-region", type=int, default=327)
    ap.add_argument("--noise", type=float, default=0.2)
    ap.add_argument("--partition", default="cells", choices=["cells", "mst"])
    ap.add_argument("--out", default="runtime_scaling.csv")
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    for i, n in enumerate(sizes):
        d = max(2, round(n / args.sites_per_region))
        ds = generate(n=n, t=65, s=8, d=d, noise=args.noise, seed=instance_seed(6, i),
                      partition=args.partition)
        t0 = time.perf_counter()
        _, part = greedy_regionalize(ds.z, ds.graph)
        rt = time.perf_counter() - t0
        ami = adjusted_mutual_information(part.labels, ds.planted_labels)
        rows.append((n, d, part.n_clusters, ami, rt))
        print(f"N={n:>6} D={d:>4} selected={part.n_clusters:>4} AMI={ami:.3f} {rt:8.2f}s", flush=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "planted_D", "selected_D", "ami", "runtime_s"])
        w.writerows(rows)
    if len(rows) > 1:
        n = np.array([r[0] for r in rows], dtype=float)
        slope = np.polyfit(np.log(n) + np.log(np.log(n)), np.log([r[-1] for r in rows]), 1)[0]
        print(f"slope of log runtime on log N + log log N: {slope:.3f}")


if __name__ == "__main__":
    main()
