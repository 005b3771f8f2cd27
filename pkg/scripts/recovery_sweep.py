"""Noise sweep on planted-partition benchmarks: AMI and eta versus noise.

    python3 scripts/recovery_sweep.py --param N --values 50,100,200 --reps 10 --out sweep_N.csv
"""
import argparse
from pathlib import Path

from mdlregion.synthetic import SweepConfig, summarize, sweep, write_summary_csv, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--param", default="N", choices=["N", "T", "S", "D"])
    ap.add_argument("--values", default="100")
    ap.add_argument("--noise", default=",".join(f"{0.1 * k:.1f}" for k in range(11)))
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise-mode", default="replace", choices=["replace", "other", "uniform"])
    ap.add_argument("--out", default="recovery_sweep.csv")
    args = ap.parse_args()

    cfg = SweepConfig.from_mapping({"param": args.param, "values": args.values, "noise": args.noise,
                                    "reps": str(args.reps), "seed": str(args.seed),
                                    "noise_mode": args.noise_mode})
    rows = sweep(cfg)
    write_sweep_csv(rows, args.out)
    summ = summarize(rows)
    write_summary_csv(summ, Path(args.out).with_suffix(".summary.csv"))
    print(f"{'value':>6} {'noise':>5} {'AMI':>7} {'+-2SE':>6} {'eta':>7} {'D':>6}")
    for r in summ:
        print(f"{r['value']:>6} {r['noise']:>5.2f} {r['ami_mean']:7.3f} {r['ami_2se']:6.3f} "
              f"{r['eta_mean']:7.3f} {r['selected_D_mean']:6.1f}")


if __name__ == "__main__":
    main()
