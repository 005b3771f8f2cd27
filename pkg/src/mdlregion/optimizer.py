"""Minimising the description length over contiguous partitions.

Greedy agglomeration keeps candidate merges between adjacent clusters in a
binary heap keyed by the cluster-local change in bits. Entries are never
updated in place: each carries the versions of both clusters it was computed
for, and entries whose versions no longer match are discarded when popped.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .cluster_state import SymbolMatrix, batch_cluster_costs
from .codelength import (
    LOG_FACTORIAL,
    CodelengthBreakdown,
    InvariantError,
    driver_cost,
    log_binomial,
)
from .spatial_graph import SpatialGraph, is_contiguous, log_spanning_tree_count

MAX_EXACT_NODES = 12
_BATCH = 4096


@dataclass
class Partition:
    labels: np.ndarray
    drivers: np.ndarray
    breakdown: CodelengthBreakdown

    @property
    def n_clusters(self) -> int:
        return len(self.drivers)

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


@dataclass(frozen=True)
class TrajectoryStep:
    n_clusters: int
    merged: tuple[int, int] | None
    total_bits: float


@dataclass
class MergeTrajectory:
    """Codelength after each greedy merge, starting from all singletons.

    ``merged`` holds the smallest node id of each of the two merged clusters.
    """

    n_nodes: int
    steps: list[TrajectoryStep] = field(default_factory=list)
    best_step_index: int = 0

    @property
    def totals(self) -> np.ndarray:
        return np.array([s.total_bits for s in self.steps])

    def select_best(self) -> int:
        # argmin returns the first minimum, i.e. the largest D among ties
        self.best_step_index = int(np.argmin(self.totals))
        return self.best_step_index

    def labels_at(self, index: int) -> np.ndarray:
        """Canonical labels (1..D, ordered by smallest member) after ``index`` merges."""
        parent = list(range(self.n_nodes))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for step in self.steps[1:index + 1]:
            a, b = step.merged
            ra, rb = find(a), find(b)
            parent[max(ra, rb)] = min(ra, rb)
        return canonical_labels([find(i) for i in range(self.n_nodes)])


def canonical_labels(labels) -> np.ndarray:
    """Relabel to 1..D in order of first appearance (= smallest member)."""
    _, first, inv = np.unique(np.asarray(labels), return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(1, len(first) + 1)
    return rank[inv]


def global_bits(n: int, d: int, t: int, s: int, tree_bits: float) -> float:
    return tree_bits + log_binomial(n - 1, d - 1) + driver_cost(d, t, s)


def evaluate_partition(z: SymbolMatrix, labels, tree_bits: float = 0.0
                       ) -> tuple[CodelengthBreakdown, np.ndarray]:
    """Full codelength of a labelled partition, computed from the raw symbols.

    Returns the breakdown and the (D, T) majority-vote drivers, clusters in
    canonical label order.
    """
    lab = canonical_labels(labels) - 1
    N, T = z.values.shape
    S = z.alphabet_size
    if len(lab) != N:
        raise ValueError("labels length does not match the number of series")
    D = int(lab.max()) + 1
    sizes = np.bincount(lab, minlength=D)
    order = np.argsort(lab, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    codes = z.codes
    t_idx = np.arange(T) * S
    table_parts, member_parts, drivers = [], [], []
    for lo in range(0, D, _BATCH):
        hi = min(D, lo + _BATCH)
        rows = order[bounds[lo]:bounds[hi]]
        local = lab[rows] - lo
        key = (local[:, None] * (T * S) + t_idx[None, :] + codes[rows]).ravel()
        counts = np.bincount(key, minlength=(hi - lo) * T * S).reshape(hi - lo, T, S)
        drv = counts.argmax(axis=2)
        onehot = (drv[:, :, None] == np.arange(S)).astype(np.int64)
        cont = np.matmul(onehot.transpose(0, 2, 1), counts)
        nc = sizes[lo:hi, None] * onehot.sum(axis=1)
        tab = LOG_FACTORIAL.ensure(int(nc.max()) + S)
        table_parts.append(tab[nc + S - 1] - tab[S - 1] - tab[nc])
        member_parts.append(tab[nc] - tab[cont].sum(axis=2))
        drivers.append(drv + 1)
    table_bits = math.fsum(np.concatenate(table_parts).ravel().tolist())
    member_bits = math.fsum(np.concatenate(member_parts).ravel().tolist())
    bd = CodelengthBreakdown.from_parts(
        tree_bits, log_binomial(N - 1, D - 1), driver_cost(D, T, S),
        table_bits, max(member_bits, 0.0))
    return bd, np.concatenate(drivers)


def _check_inputs(z: SymbolMatrix, g: SpatialGraph) -> None:
    if z.n_series == 0:
        raise ValueError("no series to regionalize")
    if z.n_series != g.n_nodes:
        raise ValueError(f"{z.n_series} series but the graph has {g.n_nodes} nodes")
    g.require_connected()


def _greedy_trajectory(z: SymbolMatrix, g: SpatialGraph, stop_at: int,
                       tree_bits: float) -> MergeTrajectory:
    N, T = z.values.shape
    S = z.alphabet_size
    counts = z.one_hot()
    sizes = np.ones(N, dtype=np.int64)
    cost = np.concatenate([
        batch_cluster_costs(counts[lo:lo + _BATCH], sizes[lo:lo + _BATCH])
        for lo in range(0, N, _BATCH)
    ]).tolist()
    version = [0] * N

    heap = []
    for lo in range(0, g.n_edges, _BATCH):
        e = g.edges[lo:lo + _BATCH]
        merged = batch_cluster_costs(counts[e[:, 0]] + counts[e[:, 1]], np.full(len(e), 2))
        for (i, j), m in zip(e.tolist(), merged.tolist()):
            heap.append((m - (cost[i] + cost[j]), i, j, 0, 0))
    heapq.heapify(heap)
    adj = [set(nb.tolist()) for nb in g.neighbors()]

    local_sum = math.fsum(cost)
    traj = MergeTrajectory(N)
    traj.steps.append(TrajectoryStep(N, None, global_bits(N, N, T, S, tree_bits) + local_sum))
    D = N
    tick = 0
    while D > stop_at:
        while True:
            delta, a, b, va, vb = heapq.heappop(heap)
            if version[a] == va and version[b] == vb:
                break
        tick += 1
        counts[a] += counts[b]
        sizes[a] += sizes[b]
        version[a] = tick
        version[b] = -1
        nb_a, nb_b = adj[a], adj[b]
        if len(nb_b) > len(nb_a):
            nb_a, nb_b = nb_b, nb_a
        nb_a |= nb_b
        nb_a.discard(a)
        nb_a.discard(b)
        for n in adj[b]:
            if n != a:
                s = adj[n]
                s.discard(b)
                s.add(a)
        adj[a], adj[b] = nb_a, None

        nbrs = sorted(nb_a)
        idx = np.array(nbrs, dtype=np.int64)
        stack = counts[idx] + counts[a]
        stack = np.concatenate([counts[a][None], stack])
        ssz = np.concatenate([[sizes[a]], sizes[idx] + sizes[a]])
        costs = batch_cluster_costs(stack, ssz).tolist()
        new_cost = costs[0]
        local_sum += new_cost - cost[a] - cost[b]
        cost[a] = new_cost
        for n, m in zip(nbrs, costs[1:]):
            d = m - (new_cost + cost[n])
            if n < a:
                heapq.heappush(heap, (d, n, a, version[n], tick))
            else:
                heapq.heappush(heap, (d, a, n, tick, version[n]))
        D -= 1
        traj.steps.append(TrajectoryStep(D, (a, b), global_bits(N, D, T, S, tree_bits) + local_sum))
    return traj


def _partition_from_labels(z, labels, tree_bits) -> Partition:
    labels = canonical_labels(labels)
    bd, drivers = evaluate_partition(z, labels, tree_bits)
    return Partition(labels, drivers, bd)


def greedy_regionalize(z: SymbolMatrix, g: SpatialGraph, tree_bits: float | None = None
                       ) -> tuple[MergeTrajectory, Partition]:
    """Merge from singletons down to one cluster, then keep the cheapest step.

    ``tree_bits`` defaults to log2 of the number of spanning trees of ``g``;
    pass ``0.0`` to skip that (partition-independent) computation.
    """
    _check_inputs(z, g)
    if tree_bits is None:
        tree_bits = log_spanning_tree_count(g)
    traj = _greedy_trajectory(z, g, 1, tree_bits)
    best = traj.select_best()
    return traj, _partition_from_labels(z, traj.labels_at(best), tree_bits)


def regionalize_fixed_D(z: SymbolMatrix, g: SpatialGraph, target_D: int,
                        tree_bits: float | None = None) -> Partition:
    _check_inputs(z, g)
    if not 1 <= target_D <= z.n_series:
        raise ValueError(f"target_D must lie in [1, {z.n_series}], got {target_D}")
    if tree_bits is None:
        tree_bits = log_spanning_tree_count(g)
    traj = _greedy_trajectory(z, g, target_D, tree_bits)
    traj.best_step_index = len(traj.steps) - 1
    return _partition_from_labels(z, traj.labels_at(traj.best_step_index), tree_bits)


# --- exact enumeration ------------------------------------------------------

def _guard(g: SpatialGraph) -> None:
    if g.n_nodes > MAX_EXACT_NODES:
        raise ValueError(
            f"exact enumeration is limited to {MAX_EXACT_NODES} nodes (got {g.n_nodes}); "
            "the number of contiguous partitions grows like the Bell numbers")


def _connected_masks(g: SpatialGraph) -> list[list[int]]:
    """Connected vertex subsets as bitmasks, grouped by their lowest vertex."""
    n = g.n_nodes
    nbr = [0] * n
    for i, j in g.edges.tolist():
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i
    by_low: list[list[int]] = [[] for _ in range(n)]
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        reach = 1 << low
        frontier = reach
        while frontier:
            v = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = nbr[v] & mask & ~reach
            reach |= new
            frontier |= new
        if reach == mask:
            by_low[low].append(mask)
    return by_low


def _partitions_as_masks(n: int, by_low: list[list[int]]):
    def rec(free, blocks):
        if not free:
            yield blocks
            return
        low = (free & -free).bit_length() - 1
        for m in by_low[low]:
            if m & ~free == 0:
                yield from rec(free & ~m, blocks + [m])

    yield from rec((1 << n) - 1, [])


def _labels_from_masks(n: int, blocks) -> np.ndarray:
    lab = np.empty(n, dtype=np.int64)
    for k, m in enumerate(blocks, 1):
        for v in range(n):
            if m >> v & 1:
                lab[v] = k
    return lab


def enumerate_connected_partitions(g: SpatialGraph):
    """Yield every partition of the nodes into connected blocks, exactly once.

    Each block is seeded by the smallest still-unassigned node, so labels come
    out canonical (1..D by smallest member).
    """
    _guard(g)
    n = g.n_nodes
    for blocks in _partitions_as_masks(n, _connected_masks(g)):
        yield _labels_from_masks(n, blocks)


def exact_regionalize(z: SymbolMatrix, g: SpatialGraph, tree_bits: float | None = None,
                      tie_tol: float = 1e-9) -> Partition:
    """Global minimiser over all contiguous partitions (N <= 12).

    Totals within ``tie_tol`` bits count as ties, resolved toward fewer
    clusters and then lexicographically smaller labels.
    """
    _guard(g)
    _check_inputs(z, g)
    if tree_bits is None:
        tree_bits = log_spanning_tree_count(g)
    N, T = z.values.shape
    S = z.alphabet_size
    by_low = _connected_masks(g)
    masks = [m for group in by_low for m in group]
    member = np.array([[m >> v & 1 for v in range(N)] for m in masks], dtype=np.int32)
    flat = z.one_hot().reshape(N, -1)
    counts = (member @ flat).reshape(len(masks), T, S)
    block_cost = dict(zip(masks, batch_cluster_costs(counts, member.sum(axis=1)).tolist()))
    glob = [0.0] + [global_bits(N, d, T, S, tree_bits) for d in range(1, N + 1)]

    best = None
    for blocks in _partitions_as_masks(N, by_low):
        total = glob[len(blocks)] + math.fsum(block_cost[m] for m in blocks)
        if best is None or total < best[0] - tie_tol:
            best = (total, blocks, None)
        elif abs(total - best[0]) <= tie_tol:
            if len(blocks) < len(best[1]):
                best = (total, blocks, None)
            elif len(blocks) == len(best[1]):
                cur = best[2] if best[2] is not None else tuple(_labels_from_masks(N, best[1]))
                cand = tuple(_labels_from_masks(N, blocks))
                if cand < cur:
                    best = (total, blocks, cand)
                else:
                    best = (best[0], best[1], cur)
    return _partition_from_labels(z, _labels_from_masks(N, best[1]), tree_bits)


def check_partition(g: SpatialGraph, p: Partition) -> None:
    """Raise InvariantError unless labels are canonical and every cluster is contiguous."""
    if not np.array_equal(p.labels, canonical_labels(p.labels)):
        raise InvariantError("labels are not canonical 1..D by smallest member")
    if not is_contiguous(g, p.labels):
        raise InvariantError("a cluster is not spatially contiguous")
