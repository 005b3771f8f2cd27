import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlregion.spatial_graph import (
    DisconnectedGraphError,
    SpatialGraph,
    build_delaunay_adjacency,
    build_grid_adjacency,
    build_knn_adjacency,
    cluster_adjacency,
    euclidean_edge_lengths,
    is_contiguous,
    log_spanning_tree_count,
    minimum_spanning_tree,
    planar_edge_bound,
    read_coordinates,
    read_edge_list,
    write_edge_list,
)

from oracles import prim_mst_weight, spanning_tree_count


def path_graph(n):
    return SpatialGraph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return SpatialGraph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return SpatialGraph(n, list(itertools.combinations(range(n), 2)))


def test_edges_are_canonical():
    g = SpatialGraph(4, [(2, 1), (1, 2), (0, 3), (3, 0), (0, 1)])
    assert g.edges.tolist() == [[0, 1], [0, 3], [1, 2]]
    with pytest.raises(ValueError):
        SpatialGraph(3, [(1, 1)])
    with pytest.raises(ValueError):
        SpatialGraph(3, [(0, 3)])


def test_neighbors_and_components():
    g = SpatialGraph(5, [(0, 1), (1, 2), (3, 4)])
    assert [n.tolist() for n in g.neighbors()] == [[1], [0, 2], [1], [4], [3]]
    assert sorted(g.component_sizes()) == [2, 3]
    with pytest.raises(DisconnectedGraphError) as err:
        g.require_connected()
    assert sorted(err.value.component_sizes) == [2, 3]


def test_delaunay_triangle():
    g = build_delaunay_adjacency([[0, 0], [1, 0], [0, 1]])
    assert g.edge_set() == {(0, 1), (0, 2), (1, 2)}


def test_delaunay_convex_quadrilateral_has_five_edges():
    g = build_delaunay_adjacency([[0, 0], [2, 0], [2.2, 1.9], [0.1, 2.1]])
    assert g.n_edges == 5


def test_delaunay_random_points_planar():
    pts = np.random.default_rng(3).random((100, 2))
    g = build_delaunay_adjacency(pts)
    assert g.n_edges <= planar_edge_bound(100)
    assert g.is_connected()


def test_delaunay_edges_are_voronoi_ridges():
    pts = np.random.default_rng(7).random((40, 2))
    g = build_delaunay_adjacency(pts)
    from scipy.spatial import Voronoi
    vor = Voronoi(pts)
    ridges = {tuple(sorted(map(int, r))) for r in vor.ridge_points}
    assert g.edge_set() == ridges


def test_delaunay_errors():
    with pytest.raises(ValueError, match="at least 3"):
        build_delaunay_adjacency([[0, 0], [1, 1]])
    with pytest.raises(ValueError, match="collinear"):
        build_delaunay_adjacency([[0, 0], [1, 1], [2, 2], [3, 3]])
    with pytest.raises(ValueError, match=r"duplicate points at indices \[\[0, 2\]\]"):
        build_delaunay_adjacency([[0, 0], [1, 0], [0, 0], [0, 1]])


def test_delaunay_cocircular_grid_is_connected():
    pts = np.array([(x, y) for x in range(5) for y in range(5)], dtype=float)
    g = build_delaunay_adjacency(pts)
    assert g.is_connected()
    # the rook edges of a square lattice are always Delaunay edges
    assert build_grid_adjacency(5, 5).n_edges <= g.n_edges <= planar_edge_bound(25)


def test_grid_examples():
    assert build_grid_adjacency(1, 5).edge_set() == {(0, 1), (1, 2), (2, 3), (3, 4)}
    assert build_grid_adjacency(2, 2).n_edges == 4
    mask = np.ones((3, 3), dtype=bool)
    mask[1, 1] = False
    g = build_grid_adjacency(3, 3, mask)
    assert g.n_nodes == 8
    assert g.n_edges == 8
    assert all(len(n) == 2 for n in g.neighbors())


def test_grid_disconnected_mask_reports_sizes():
    mask = np.array([[1, 0, 1], [1, 0, 1], [1, 0, 0]], dtype=bool)
    with pytest.raises(DisconnectedGraphError) as err:
        build_grid_adjacency(3, 3, mask)
    assert sorted(err.value.component_sizes) == [2, 3]


def test_knn_graph_is_mutual():
    pts = np.random.default_rng(0).random((60, 2))
    g = build_knn_adjacency(pts, 6)
    from scipy.spatial import cKDTree
    _, idx = cKDTree(pts).query(pts, k=7)
    for i, j in g.edge_set():
        assert j in idx[i] and i in idx[j]


def test_tree_count_examples():
    for n in (2, 5, 17):
        assert log_spanning_tree_count(path_graph(n)) == 0.0
    assert log_spanning_tree_count(cycle_graph(8)) == pytest.approx(3.0, abs=1e-12)
    assert log_spanning_tree_count(complete_graph(4)) == pytest.approx(4.0, abs=1e-12)
    assert log_spanning_tree_count(SpatialGraph(1, [])) == 0.0


def test_tree_count_disconnected_raises():
    with pytest.raises(DisconnectedGraphError):
        log_spanning_tree_count(SpatialGraph(4, [(0, 1), (2, 3)]))


def test_tree_count_grid_closed_form():
    # 2 x n ladder: tree counts follow t_n = 4 t_{n-1} - t_{n-2}, t_1 = 1, t_2 = 4
    t = [0, 1, 4]
    for _ in range(3, 30):
        t.append(4 * t[-1] - t[-2])
    for n in (2, 5, 29):
        assert log_spanning_tree_count(build_grid_adjacency(2, n)) == pytest.approx(
            math.log2(t[n]), abs=1e-9)


@settings(max_examples=40)
@given(st.integers(3, 8), st.integers(0, 2**31 - 1), st.floats(0.1, 0.9))
def test_tree_count_random_graphs_match_deletion_contraction(n, seed, p):
    rng = np.random.default_rng(seed)
    pairs = [e for e in itertools.combinations(range(n), 2) if rng.random() < p]
    pairs += [(i, i + 1) for i in range(n - 1)]  # keep it connected
    perm = rng.permutation(n)
    g = SpatialGraph(n, [(int(perm[i]), int(perm[j])) for i, j in pairs])
    expect = math.log2(spanning_tree_count(n, [tuple(e) for e in g.edges.tolist()]))
    assert log_spanning_tree_count(g) == pytest.approx(expect, abs=1e-9)


def test_tree_count_large_grid_is_finite():
    bits = log_spanning_tree_count(build_grid_adjacency(60, 60))
    # asymptotic growth constant of the square lattice: 4G/pi nats per node
    per_node = 4 * 0.915965594177219 / math.pi / math.log(2)
    assert bits / 3600 == pytest.approx(per_node, rel=0.05)


def test_mst_of_tree_is_itself():
    g = SpatialGraph(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    assert minimum_spanning_tree(g, np.ones(4)).edge_set() == g.edge_set()


def test_mst_drops_heaviest_cycle_edge():
    g = cycle_graph(6)
    w = np.ones(g.n_edges)
    heavy = g.edges.tolist().index([2, 3])
    w[heavy] = 5.0
    assert minimum_spanning_tree(g, w).edge_set() == g.edge_set() - {(2, 3)}


def test_mst_equal_weights_lexicographic():
    g = cycle_graph(4)
    t = minimum_spanning_tree(g, np.ones(4))
    # edges sorted (0,1),(0,3),(1,2),(2,3): the last one closes the cycle
    assert t.edge_set() == {(0, 1), (0, 3), (1, 2)}


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_mst_weight_matches_prim(seed):
    pts = np.random.default_rng(seed).random((20, 2))
    g = build_delaunay_adjacency(pts)
    w = euclidean_edge_lengths(g)
    t = minimum_spanning_tree(g)
    assert t.n_edges == 19 and t.is_connected()
    total = euclidean_edge_lengths(t).sum()
    ref = prim_mst_weight(20, [(i, j, x) for (i, j), x in zip(g.edges.tolist(), w)])
    assert total == pytest.approx(ref, rel=1e-12)


def test_mst_lighter_than_random_spanning_trees():
    rng = np.random.default_rng(11)
    pts = rng.random((20, 2))
    g = build_delaunay_adjacency(pts)
    best = euclidean_edge_lengths(minimum_spanning_tree(g)).sum()
    for _ in range(100):
        nxg = nx.Graph()
        nxg.add_weighted_edges_from((i, j, rng.random()) for i, j in g.edges.tolist())
        tree = nx.minimum_spanning_tree(nxg)  # a random tree under random weights
        tg = SpatialGraph(20, list(tree.edges()), pts)
        assert best <= euclidean_edge_lengths(tg).sum() + 1e-12


def test_cluster_adjacency_examples():
    g = path_graph(3)
    assert cluster_adjacency(g, [1, 2, 3]) == {(1, 2), (2, 3)}
    assert cluster_adjacency(g, [1, 1, 1]) == set()
    assert cluster_adjacency(g, [1, 1, 2]) == {(1, 2)}


def test_singleton_cluster_adjacency_is_edge_set():
    g = build_grid_adjacency(3, 4)
    assert cluster_adjacency(g, np.arange(12)) == g.edge_set()


def test_is_contiguous():
    g = path_graph(4)
    assert is_contiguous(g, [1, 1, 2, 2])
    assert not is_contiguous(g, [1, 2, 1, 2])
    assert is_contiguous(g, [5, 5, 5, 5])


def test_edge_list_round_trip(tmp_path):
    g = build_grid_adjacency(3, 3)
    path = tmp_path / "edges.txt"
    write_edge_list(g, path)
    back = read_edge_list(path, n_nodes=9)
    assert back.edge_set() == g.edge_set()
    (tmp_path / "bad.txt").write_text("0 1 2\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        read_edge_list(tmp_path / "bad.txt")


def test_read_coordinates(tmp_path):
    p = tmp_path / "xy.csv"
    p.write_text("id,x,y\na,0,1\nb,2.5,3\n")
    ids, xy = read_coordinates(p)
    assert ids == ["a", "b"]
    np.testing.assert_array_equal(xy, [[0, 1], [2.5, 3]])
