"""Command-line entry point: ``mdlregion <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import ingest
from .evaluation import adjusted_mutual_information, inverse_compression_ratio
from .optimizer import (
    evaluate_partition,
    exact_regionalize,
    greedy_regionalize,
    regionalize_fixed_D,
)
from .spatial_graph import (
    SpatialGraph,
    build_delaunay_adjacency,
    build_knn_adjacency,
    log_spanning_tree_count,
    read_edge_list,
)
from .synthetic import (
    SweepConfig,
    SyntheticParams,
    generate,
    read_config,
    summarize,
    sweep,
    write_summary_csv,
    write_sweep_csv,
)

log = logging.getLogger("mdlregion")


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="wide (id,x,y,t1..) or long (id,x,y,timestamp,value) CSV")
    p.add_argument("--adjacency", help="edge list 'i j' (0-based, input row order); default Delaunay on x,y")
    p.add_argument("--knn", type=int, help="use mutual k-nearest-neighbour adjacency instead of Delaunay")
    enc = p.add_mutually_exclusive_group()
    enc.add_argument("--bins", type=int, metavar="S", help="discretize continuous values into S uniform bins")
    enc.add_argument("--categorical", metavar="CATS", help="file listing categories in order, one per line")
    p.add_argument("--alphabet-size", type=int, help="S for input that is already integer symbols 1..S")
    p.add_argument("--min-complete", type=float, default=0.8, help="minimum observed fraction per site")
    p.add_argument("--skip-tree-count", action="store_true",
                   help="report the spanning-tree term as 0 (does not change the selected partition)")
    p.add_argument("--out", required=True, help="result JSON path")
    p.add_argument("--labels-csv", help="also write id,cluster CSV")
    p.add_argument("--geojson", help="also write a GeoJSON point collection with cluster labels")


def _load(args):
    categorical = args.categorical is not None
    table = ingest.read_table(args.input, categorical=categorical)
    table, removed = ingest.filter_completeness(table, args.min_complete)
    if removed:
        log.info("dropped %d incomplete sites", len(removed))
    if categorical:
        cats = ingest.read_categories(args.categorical)
        table = ingest.ordinal_encode(table, cats)
        if len(cats) < 2:
            raise ValueError("need at least 2 categories")
        table = ingest.interpolate_missing(table)
        z = ingest.round_ordinal(table, len(cats))
    else:
        table = ingest.interpolate_missing(table)
        if args.bins is not None:
            z = ingest.discretize_uniform(table, args.bins)
        else:
            z = ingest.symbol_table(table, args.alphabet_size)
    if args.adjacency:
        if removed:
            raise ValueError("an explicit adjacency file cannot be combined with dropped sites; "
                             "filter the input first")
        g = read_edge_list(args.adjacency, n_nodes=z.n_series)
        g = SpatialGraph(g.n_nodes, g.edges, table.coordinates)
    elif args.knn:
        g = build_knn_adjacency(table.coordinates, args.knn)
    else:
        g = build_delaunay_adjacency(table.coordinates)
    return table, z, g, removed


def _meta(args, removed, extra=None) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"command": args.command, "flags": flags, "dropped_sites": removed,
            "tree_count_skipped": bool(getattr(args, "skip_tree_count", False)), **(extra or {})}


def _finish(args, table, z, part, traj, tree_bits, removed, runtime):
    baseline, _ = evaluate_partition(z, np.arange(z.n_series), tree_bits)
    doc = ingest.serialize_result(part, traj, z, _meta(args, removed, {"runtime_s": runtime}),
                                  table.site_ids, baseline)
    ingest.write_result(doc, args.out)
    if args.labels_csv:
        ingest.write_labels_csv(table.site_ids, part.labels, args.labels_csv)
    if getattr(args, "trajectory_csv", None) and traj is not None:
        ingest.write_trajectory_csv(traj, args.trajectory_csv)
    if args.geojson:
        Path(args.geojson).write_text(json.dumps(
            ingest.geojson_points(table.site_ids, table.coordinates, part.labels)))
    print(f"D={part.n_clusters} total_bits={part.breakdown.total_bits:.3f} "
          f"eta={inverse_compression_ratio(part.breakdown, baseline):.4f} -> {args.out}")


def cmd_regionalize(args) -> int:
    table, z, g, removed = _load(args)
    t0 = time.perf_counter()
    tree_bits = 0.0 if args.skip_tree_count else log_spanning_tree_count(g)
    if args.fixed_D is not None:
        part = regionalize_fixed_D(z, g, args.fixed_D, tree_bits)
        traj = None
    else:
        traj, part = greedy_regionalize(z, g, tree_bits)
    _finish(args, table, z, part, traj, tree_bits, removed, time.perf_counter() - t0)
    return 0


def cmd_exact(args) -> int:
    table, z, g, removed = _load(args)
    t0 = time.perf_counter()
    tree_bits = 0.0 if args.skip_tree_count else log_spanning_tree_count(g)
    part = exact_regionalize(z, g, tree_bits)
    _finish(args, table, z, part, None, tree_bits, removed, time.perf_counter() - t0)
    return 0


def cmd_synth(args) -> int:
    params = SyntheticParams(n=args.n, t=args.t, s=args.s, d=args.d, noise=args.noise,
                             seed=args.seed, noise_mode=args.noise_mode,
                             confuser_fraction=args.confuser_fraction,
                             partition=args.partition)
    ds = generate(params)
    out = Path(args.out)
    ids = [str(i) for i in range(params.n)]
    ingest.write_wide_csv(out, ids, ds.points, ds.z.values)
    stem = out.with_suffix("")
    ingest.write_labels_csv(ids, ds.planted_labels, f"{stem}.planted.csv")
    Path(f"{stem}.planted.json").write_text(json.dumps({
        "params": vars(args) | {"func": None},
        "planted_labels": ds.planted_labels.tolist(),
        "planted_drivers": ds.planted_drivers.tolist(),
    }, default=str))
    print(f"wrote {out} ({params.n} series, T={params.t}, S={params.s}, D={params.d})")
    return 0


def cmd_sweep(args) -> int:
    config = SweepConfig.from_mapping(read_config(args.config))
    rows = sweep(config)
    write_sweep_csv(rows, args.out)
    summary_path = Path(args.out).with_suffix(".summary.csv")
    write_summary_csv(summarize(rows), summary_path)
    print(f"{len(rows)} runs -> {args.out}, summary -> {summary_path}")
    return 0


def cmd_eval_ami(args) -> int:
    a = ingest.read_labels_csv(args.a)
    b = ingest.read_labels_csv(args.b)
    if set(a) != set(b):
        missing = sorted(set(a) ^ set(b))[:10]
        raise ValueError(f"label files cover different ids, e.g. {missing}")
    ids = sorted(a)
    print(f"{adjusted_mutual_information([a[i] for i in ids], [b[i] for i in ids]):.10f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdlregion", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("regionalize", help="greedy MDL regionalization")
    _add_input_args(p)
    p.add_argument("--fixed-D", type=int, help="stop merging at this many clusters")
    p.add_argument("--trajectory-csv", help="also write D,merged_a,merged_b,total_bits CSV")
    p.set_defaults(func=cmd_regionalize)

    p = sub.add_parser("exact", help="exact minimum over contiguous partitions (N <= 12)")
    _add_input_args(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("synth", help="generate a planted-partition dataset")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--t", type=int, default=51)
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-mode", choices=["replace", "other", "uniform"], default="replace")
    p.add_argument("--confuser-fraction", type=float, default=0.0)
    p.add_argument("--partition", choices=["mst", "cells"], default="mst",
                   help="planted regions from random MST cuts or shortest-path cells")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="noise sweep over synthetic benchmarks")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval-ami", help="adjusted mutual information between two label CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_eval_ami)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
