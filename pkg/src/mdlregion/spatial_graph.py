"""Spatial adjacency networks and the spanning-tree term of the objective."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu
from scipy.spatial import Delaunay, QhullError, cKDTree


class DisconnectedGraphError(ValueError):
    """The adjacency graph (or a masked grid) has more than one component."""

    def __init__(self, message: str, component_sizes: Sequence[int] = ()):
        super().__init__(message)
        self.component_sizes = list(component_sizes)


def _canonical_edges(edges: Iterable[Sequence[int]] | np.ndarray, n_nodes: int) -> np.ndarray:
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if e.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    e = e.reshape(-1, 2)
    if np.any(e < 0) or np.any(e >= n_nodes):
        raise ValueError(f"edge endpoint outside [0, {n_nodes})")
    if np.any(e[:, 0] == e[:, 1]):
        raise ValueError("self-loops are not allowed")
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0)


@dataclass(eq=False)
class SpatialGraph:
    """Undirected simple graph over ``n_nodes`` locations.

    ``edges`` is stored as a sorted, duplicate-free ``(E, 2)`` array with
    ``i < j`` in every row.
    """

    n_nodes: int
    edges: np.ndarray
    coordinates: np.ndarray | None = None
    _csr: sp.csr_matrix | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.edges = _canonical_edges(self.edges, self.n_nodes)
        if self.coordinates is not None:
            self.coordinates = np.asarray(self.coordinates, dtype=np.float64)
            if self.coordinates.shape != (self.n_nodes, 2):
                raise ValueError("coordinates must have shape (n_nodes, 2)")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def adjacency(self) -> sp.csr_matrix:
        if self._csr is None:
            n = self.n_nodes
            i, j = self.edges[:, 0], self.edges[:, 1]
            data = np.ones(2 * len(i), dtype=np.int8)
            self._csr = sp.csr_matrix(
                (data, (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))
        return self._csr

    def neighbors(self) -> list[np.ndarray]:
        a = self.adjacency()
        return [a.indices[a.indptr[k]:a.indptr[k + 1]] for k in range(self.n_nodes)]

    def component_sizes(self) -> list[int]:
        if self.n_nodes == 0:
            return []
        _, lab = connected_components(self.adjacency(), directed=False)
        return sorted(np.bincount(lab).tolist(), reverse=True)

    def is_connected(self) -> bool:
        return self.n_nodes > 0 and len(self.component_sizes()) == 1

    def require_connected(self) -> None:
        sizes = self.component_sizes()
        if len(sizes) != 1:
            raise DisconnectedGraphError(
                f"adjacency graph has {len(sizes)} components (sizes {sizes[:10]})", sizes)

    def laplacian(self) -> sp.csr_matrix:
        a = self.adjacency().astype(np.float64)
        deg = np.asarray(a.sum(axis=1)).ravel()
        return (sp.diags(deg) - a).tocsr()


def _check_distinct(points: np.ndarray) -> None:
    _, first, counts = np.unique(points, axis=0, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = []
        for k in np.flatnonzero(counts > 1):
            same = np.flatnonzero(np.all(points == points[first[k]], axis=1))
            dup.append(same.tolist())
        raise ValueError(f"duplicate points at indices {dup}")


def build_delaunay_adjacency(points) -> SpatialGraph:
    """Voronoi-neighbour adjacency of isolated points, via the Delaunay dual."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    if len(pts) < 3:
        raise ValueError(f"Delaunay adjacency needs at least 3 points, got {len(pts)}")
    _check_distinct(pts)
    d = pts[1:] - pts[0]
    if not np.any(d[0, 0] * d[:, 1] - d[0, 1] * d[:, 0]):
        raise ValueError("all points are collinear; no triangulation exists")
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise ValueError(f"Delaunay triangulation failed (degenerate geometry): {exc}") from exc
    s = tri.simplices
    edges = np.concatenate([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
    if len(tri.coplanar):
        # points qhull dropped as near-duplicates: attach to their nearest vertex
        edges = np.concatenate([edges, tri.coplanar[:, [0, 2]]])
    g = SpatialGraph(len(pts), edges, pts)
    g.require_connected()
    return g


def build_grid_adjacency(rows: int, cols: int, mask=None) -> SpatialGraph:
    """Rook adjacency on a grid; node ids run row-major over retained cells."""
    if rows < 1 or cols < 1:
        raise ValueError("grid needs rows, cols >= 1")
    keep = np.ones((rows, cols), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if keep.shape != (rows, cols):
        raise ValueError(f"mask shape {keep.shape} != ({rows}, {cols})")
    ids = -np.ones((rows, cols), dtype=np.int64)
    ids[keep] = np.arange(int(keep.sum()))
    edges = []
    horiz = keep[:, :-1] & keep[:, 1:]
    edges.append(np.stack([ids[:, :-1][horiz], ids[:, 1:][horiz]], axis=1))
    vert = keep[:-1, :] & keep[1:, :]
    edges.append(np.stack([ids[:-1, :][vert], ids[1:, :][vert]], axis=1))
    r, c = np.nonzero(keep)
    g = SpatialGraph(int(keep.sum()), np.concatenate(edges), np.stack([c, r], axis=1).astype(float))
    if g.n_nodes == 0:
        raise ValueError("mask retains no cells")
    sizes = g.component_sizes()
    if len(sizes) > 1:
        raise DisconnectedGraphError(f"masked grid is disconnected; component sizes {sizes}", sizes)
    return g


def build_knn_adjacency(points, k: int) -> SpatialGraph:
    """Mutual k-nearest-neighbour graph: i~j iff each is among the other's k nearest."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={n}")
    _check_distinct(pts)
    _, idx = cKDTree(pts).query(pts, k=k + 1)
    nbr = [set(row[1:].tolist()) for row in idx]
    edges = [(i, j) for i in range(n) for j in nbr[i] if i < j and i in nbr[j]]
    g = SpatialGraph(n, edges, pts)
    g.require_connected()
    return g


def log_spanning_tree_count(g: SpatialGraph) -> float:
    """log2 |T(G)| from the reduced Laplacian (matrix-tree theorem).

    Uses a sparse LU factorisation with a symmetric minimum-degree ordering;
    the reduced Laplacian of a connected graph is positive definite, so the
    log-determinant is the sum of log |U_ii|.
    """
    g.require_connected()
    if g.n_nodes <= 2:
        return 0.0
    lap = g.laplacian()[1:, 1:].tocsc()
    lu = splu(lap, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
              options={"SymmetricMode": True})
    diag = lu.U.diagonal()
    # |det| is all we need; abs guards against sign flips from any row swap
    bits = float(np.sum(np.log2(np.abs(diag))))
    return 0.0 if bits < 0 else bits


def minimum_spanning_tree(g: SpatialGraph, weights=None) -> SpatialGraph:
    """Kruskal MST; equal weights are resolved by lexicographic (i, j) order.

    With ``weights=None`` the Euclidean lengths of the edges are used, which
    requires coordinates.
    """
    g.require_connected()
    if weights is None:
        if g.coordinates is None:
            raise ValueError("weights omitted and graph has no coordinates")
        w = euclidean_edge_lengths(g)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (g.n_edges,):
            raise ValueError(f"expected {g.n_edges} weights, got shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("edge weights must be non-negative")
    order = np.lexsort((g.edges[:, 1], g.edges[:, 0], w))
    parent = list(range(g.n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for e in order:
        i, j = g.edges[e]
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
            chosen.append(e)
            if len(chosen) == g.n_nodes - 1:
                break
    return SpatialGraph(g.n_nodes, g.edges[np.sort(np.asarray(chosen, dtype=np.int64))],
                        g.coordinates)


def cluster_adjacency(g: SpatialGraph, labels) -> set[tuple[int, int]]:
    """Pairs of cluster labels (a < b) joined by at least one edge of ``g``."""
    lab = np.asarray(labels)
    if lab.shape != (g.n_nodes,):
        raise ValueError("labels must cover every node")
    a, b = lab[g.edges[:, 0]], lab[g.edges[:, 1]]
    cross = a != b
    lo = np.minimum(a[cross], b[cross])
    hi = np.maximum(a[cross], b[cross])
    return {(x.item(), y.item()) for x, y in zip(lo, hi)}


def is_contiguous(g: SpatialGraph, labels) -> bool:
    """True when every cluster induces a connected subgraph (flood fill per label)."""
    lab = np.asarray(labels)
    nbrs = g.neighbors()
    seen = np.zeros(g.n_nodes, dtype=bool)
    done_labels = set()
    for start in range(g.n_nodes):
        if seen[start]:
            continue
        if lab[start] in done_labels:
            return False
        done_labels.add(lab[start])
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if not seen[v] and lab[v] == lab[start]:
                    seen[v] = True
                    stack.append(v)
    return True


# --- text formats -----------------------------------------------------------

def read_edge_list(path, n_nodes: int | None = None) -> SpatialGraph:
    """Whitespace-separated ``i j`` pairs, 0-based; blank lines and ``#`` comments skipped."""
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
    if n_nodes is None:
        n_nodes = 1 + max((max(e) for e in edges), default=-1)
    return SpatialGraph(n_nodes, edges)


def write_edge_list(g: SpatialGraph, path) -> None:
    with open(path, "w") as fh:
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def read_coordinates(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[:3] != ["id", "x", "y"]:
            raise ValueError(f"{path}: coordinates CSV needs header id,x,y; got {header}")
        ids, xy = [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0].strip())
            xy.append((float(row[1]), float(row[2])))
    return ids, np.asarray(xy, dtype=np.float64)


def euclidean_edge_lengths(g: SpatialGraph) -> np.ndarray:
    d = g.coordinates[g.edges[:, 0]] - g.coordinates[g.edges[:, 1]]
    return np.hypot(d[:, 0], d[:, 1])


def planar_edge_bound(n: int) -> int:
    return 3 * n - 6 if n >= 3 else math.comb(n, 2)
