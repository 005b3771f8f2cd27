"""Planted-partition benchmarks: Voronoi neighbours, planted regions, noisy driver copies.

Regions come either from D-1 random cuts of the Euclidean minimum spanning
tree (``partition="mst"``, the default) or from shortest-path cells around D
random seed sites (``partition="cells"``), which gives regions of comparable
size.

All randomness comes from one integer seed. ``numpy.random.SeedSequence``
splits it into independent PCG64 streams, one per generation stage, so that
changing e.g. the noise level leaves the points, cuts and drivers unchanged.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .cluster_state import SymbolMatrix
from .evaluation import adjusted_mutual_information, inverse_compression_ratio
from .optimizer import canonical_labels, evaluate_partition, greedy_regionalize
from .spatial_graph import (
    SpatialGraph,
    build_delaunay_adjacency,
    euclidean_edge_lengths,
    minimum_spanning_tree,
)

NOISE_MODES = ("replace", "other", "uniform")
PARTITION_MODES = ("mst", "cells")
_STREAMS = ("points", "cuts", "drivers", "noise", "confusers")


@dataclass(frozen=True)
class SyntheticParams:
    n: int = 100
    t: int = 51
    s: int = 4
    d: int = 5
    noise: float = 0.0
    seed: int = 0
    noise_mode: str = "replace"
    confuser_fraction: float = 0.0
    partition: str = "mst"

    def validate(self) -> None:
        if not self.n >= self.d >= 1:
            raise ValueError(f"need N >= D >= 1, got N={self.n}, D={self.d}")
        if self.s < 2:
            raise ValueError("alphabet size must be at least 2")
        if self.t < 1:
            raise ValueError("series length must be at least 1")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise level must lie in [0, 1], got {self.noise}")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")
        if not 0.0 <= self.confuser_fraction <= 1.0:
            raise ValueError("confuser_fraction must lie in [0, 1]")
        if self.partition not in PARTITION_MODES:
            raise ValueError(f"partition must be one of {PARTITION_MODES}")


@dataclass(eq=False)
class SyntheticDataset:
    graph: SpatialGraph
    points: np.ndarray
    z: SymbolMatrix
    planted_labels: np.ndarray
    planted_drivers: np.ndarray
    noise_level: float
    seed: int
    params: SyntheticParams = field(default_factory=SyntheticParams)


def _streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(_STREAMS, children)}


def _place_points(n: int, rng: np.random.Generator) -> tuple[np.ndarray, SpatialGraph]:
    pts = rng.random((n, 2))
    if n < 3:
        edges = [(0, 1)] if n == 2 else []
        return pts, SpatialGraph(n, edges, pts)
    for _ in range(10):
        try:
            return pts, build_delaunay_adjacency(pts)
        except ValueError:
            pts = np.clip(pts + rng.normal(scale=1e-9, size=pts.shape), 0.0, 1.0)
    raise RuntimeError("could not triangulate the sampled points")


def _cut_labels(n: int, tree_edges: np.ndarray, cut: np.ndarray) -> np.ndarray:
    keep = np.ones(len(tree_edges), dtype=bool)
    keep[cut] = False
    forest = SpatialGraph(n, tree_edges[keep])
    nbrs = forest.neighbors()
    lab = -np.ones(n, dtype=np.int64)
    k = 0
    for start in range(n):
        if lab[start] >= 0:
            continue
        k += 1
        lab[start] = k
        stack = [start]
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if lab[v] < 0:
                    lab[v] = k
                    stack.append(v)
    return lab


def _cell_labels(g: SpatialGraph, seeds: np.ndarray) -> np.ndarray:
    """Assign every node to the seed with the shortest Euclidean path in ``g``.

    Each cell is the node set of one tree in a shortest-path forest, so cells
    are connected and have comparable sizes when seeds are spread uniformly.
    """
    w = euclidean_edge_lengths(g)
    i, j = g.edges[:, 0], g.edges[:, 1]
    mat = csr_matrix((np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                     shape=(g.n_nodes, g.n_nodes))
    _, _, source = dijkstra(mat, directed=False, indices=seeds, min_only=True,
                            return_predecessors=True)
    rank = np.empty(g.n_nodes, dtype=np.int64)
    rank[seeds] = np.arange(len(seeds))
    return rank[source] + 1


def corrupt(series: np.ndarray, noise: float, s: int, rng: np.random.Generator,
            mode: str = "replace") -> np.ndarray:
    """Apply symbol noise to an array of 1-based symbols.

    ``mode="replace"`` (default): each entry is redrawn uniformly from all S
    symbols with probability ``noise``. The chance of actually changing is then
    ``noise * (1 - 1/S)``, i.e. the noise level is the change rate rescaled by
    ``1 - 1/S``, and ``noise=1`` gives iid uniform series for every S.

    ``mode="other"``: with probability ``noise`` the entry is replaced by one of
    the S-1 other symbols, so the change rate is exactly ``noise``.
    ``mode="uniform"``: redraw from all S symbols with probability
    ``min(1, noise / (1 - 1/S))``; same distribution as ``"other"`` up to the cap.
    """
    series = np.asarray(series)
    if mode == "replace":
        flip = rng.random(series.shape) < noise
        out = np.where(flip, rng.integers(1, s + 1, size=series.shape), series)
    elif mode == "other":
        flip = rng.random(series.shape) < noise
        shift = rng.integers(1, s, size=series.shape)
        out = np.where(flip, (series - 1 + shift) % s + 1, series)
    elif mode == "uniform":
        p = min(1.0, noise / (1.0 - 1.0 / s))
        flip = rng.random(series.shape) < p
        out = np.where(flip, rng.integers(1, s + 1, size=series.shape), series)
    else:
        raise ValueError(f"unknown noise mode {mode!r}")
    return out.astype(np.int64)


def generate(params: SyntheticParams | None = None, **kwargs) -> SyntheticDataset:
    """Sample a planted-partition dataset; see :class:`SyntheticParams` for knobs."""
    if params is None:
        params = SyntheticParams(**kwargs)
    elif kwargs:
        params = SyntheticParams(**{**asdict(params), **kwargs})
    params.validate()
    n, t, s, d = params.n, params.t, params.s, params.d
    rng = _streams(params.seed)

    pts, g = _place_points(n, rng["points"])
    if n > 1 and params.partition == "cells":
        seeds = rng["cuts"].choice(n, size=d, replace=False)
        labels = canonical_labels(_cell_labels(g, seeds))
    elif n > 1:
        tree = minimum_spanning_tree(g)
        cut = rng["cuts"].choice(n - 1, size=d - 1, replace=False)
        labels = canonical_labels(_cut_labels(n, tree.edges, cut))
    else:
        labels = np.ones(1, dtype=np.int64)

    drivers = rng["drivers"].integers(1, s + 1, size=(d, t))
    source = labels.copy()
    if params.confuser_fraction > 0 and d > 1:
        crng = rng["confusers"]
        k = int(round(params.confuser_fraction * n))
        who = crng.choice(n, size=k, replace=False)
        other = crng.integers(1, d, size=k)
        source[who] = (labels[who] - 1 + other) % d + 1
    clean = drivers[source - 1]
    z = corrupt(clean, params.noise, s, rng["noise"], params.noise_mode)
    return SyntheticDataset(g, pts, SymbolMatrix(z, s), labels, drivers,
                            params.noise, params.seed, params)


def generate_continuous(params: SyntheticParams | None = None, sigma: float = 0.05,
                        **kwargs) -> tuple[SyntheticDataset, np.ndarray]:
    """Planted regions with iid U(0, 1) real-valued drivers plus N(0, sigma^2) jitter.

    Returns the symbolic dataset (used only for its graph and planted labels;
    its symbols ignore ``sigma``) and the (N, T) real-valued matrix, ready for
    binning.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    ds = generate(params, **kwargs)
    n, t, d = ds.params.n, ds.params.t, ds.params.d
    rng = np.random.default_rng(np.random.SeedSequence([ds.params.seed, 7]))
    drivers = rng.random((d, t))
    x = drivers[ds.planted_labels - 1] + rng.normal(scale=sigma, size=(n, t))
    return ds, x


# --- sweeps -----------------------------------------------------------------

SWEEP_COLUMNS = ("param", "value", "noise", "rep", "ami", "eta", "selected_D", "runtime_s")
_PARAM_FIELDS = {"N": "n", "T": "t", "S": "s", "D": "d"}


@dataclass(frozen=True)
class SweepConfig:
    param: str = "N"
    values: tuple = (100,)
    noise: tuple = tuple(round(0.1 * k, 10) for k in range(11))
    repetitions: int = 10
    seed: int = 0
    base: SyntheticParams = field(default_factory=SyntheticParams)
    skip_tree_count: bool = False

    @classmethod
    def from_mapping(cls, cfg: dict[str, str]) -> "SweepConfig":
        """Build from plain key=value strings (see README for the keys)."""
        def floats(v):
            return tuple(float(x) for x in v.split(",") if x.strip())

        base = SyntheticParams(
            n=int(cfg.get("N", 100)), t=int(cfg.get("T", 51)), s=int(cfg.get("S", 4)),
            d=int(cfg.get("D", 5)), noise_mode=cfg.get("noise_mode", "replace"),
            confuser_fraction=float(cfg.get("confuser_fraction", 0.0)),
            partition=cfg.get("partition", "mst"))
        param = cfg.get("param", "N")
        if param not in _PARAM_FIELDS:
            raise ValueError(f"param must be one of {sorted(_PARAM_FIELDS)}, got {param!r}")
        default_value = str(getattr(base, _PARAM_FIELDS[param]))
        values = tuple(int(x) for x in cfg.get("values", default_value).split(",") if x.strip())
        noise = floats(cfg["noise"]) if "noise" in cfg else cls.noise
        unknown = set(cfg) - {"N", "T", "S", "D", "noise_mode", "confuser_fraction", "partition",
                              "param", "values", "noise", "repetitions", "reps", "seed",
                              "skip_tree_count"}
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        return cls(param, values, noise, int(cfg.get("repetitions", cfg.get("reps", 10))),
                   int(cfg.get("seed", 0)), base,
                   cfg.get("skip_tree_count", "false").lower() in ("1", "true", "yes"))


def read_config(path) -> dict[str, str]:
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            cfg[k.strip()] = v.strip()
    return cfg


def instance_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: int
    noise: float
    rep: int
    ami: float
    eta: float
    selected_D: int
    runtime_s: float


def run_instance(params: SyntheticParams, skip_tree_count: bool = False) -> tuple[float, float, int, float]:
    """Generate, regionalize, score. Returns (AMI, eta, selected D, runtime in s)."""
    ds = generate(params)
    t0 = time.perf_counter()
    traj, part = greedy_regionalize(ds.z, ds.graph, 0.0 if skip_tree_count else None)
    runtime = time.perf_counter() - t0
    baseline, _ = evaluate_partition(ds.z, np.arange(params.n), part.breakdown.spanning_tree_bits)
    ami = adjusted_mutual_information(part.labels, ds.planted_labels)
    eta = inverse_compression_ratio(part.breakdown, baseline)
    return ami, eta, part.n_clusters, runtime


def sweep(config: SweepConfig) -> list[SweepRow]:
    rows = []
    for i, value in enumerate(config.values):
        for j, noise in enumerate(config.noise):
            for rep in range(config.repetitions):
                params = SyntheticParams(**{
                    **asdict(config.base), _PARAM_FIELDS[config.param]: value,
                    "noise": noise, "seed": instance_seed(config.seed, i, j, rep)})
                ami, eta, dsel, rt = run_instance(params, config.skip_tree_count)
                rows.append(SweepRow(config.param, value, noise, rep, ami, eta, dsel, rt))
    return rows


def summarize(rows: Iterable[SweepRow]) -> list[dict]:
    """Mean and two standard errors of AMI, eta and selected D per (value, noise) cell."""
    cells: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        cells.setdefault((r.param, r.value, r.noise), []).append(r)
    out = []
    for (param, value, noise), rs in cells.items():
        rec = {"param": param, "value": value, "noise": noise, "n": len(rs)}
        for col in ("ami", "eta", "selected_D"):
            x = np.array([getattr(r, col) for r in rs], dtype=float)
            se = x.std(ddof=1) / math.sqrt(len(x)) if len(x) > 1 else 0.0
            rec[f"{col}_mean"] = float(x.mean())
            rec[f"{col}_2se"] = float(2 * se)
        out.append(rec)
    return out


def write_sweep_csv(rows: Iterable[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([r.param, r.value, f"{r.noise:g}", r.rep, f"{r.ami:.10g}",
                        f"{r.eta:.10g}", r.selected_D, f"{r.runtime_s:.6f}"])


def write_summary_csv(summary: list[dict], path) -> None:
    if not summary:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary[0]))
        w.writeheader()
        w.writerows(summary)
