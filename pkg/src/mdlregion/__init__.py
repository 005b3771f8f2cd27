"""Contiguous regionalization of spatial time series by minimum description length."""
from .cluster_state import ClusterState, SymbolMatrix
from .codelength import CodelengthBreakdown, total_description_length
from .evaluation import adjusted_mutual_information, inverse_compression_ratio
from .optimizer import (
    MergeTrajectory,
    Partition,
    enumerate_connected_partitions,
    evaluate_partition,
    exact_regionalize,
    greedy_regionalize,
    regionalize_fixed_D,
)
from .spatial_graph import (
    SpatialGraph,
    build_delaunay_adjacency,
    build_grid_adjacency,
    build_knn_adjacency,
    log_spanning_tree_count,
)
from .synthetic import SyntheticParams, generate

__version__ = "0.1.0"
