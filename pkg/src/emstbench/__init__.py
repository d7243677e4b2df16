"""Exact k-NN spatial indexes, dual-tree Boruvka EMST, single-linkage, timing suite."""

from .balltree import BallNode, BallTree, SplitChoice, ball_min_distance, choose_split
from .bench import (
    BenchConfig,
    BenchmarkReport,
    RatioRecord,
    TimingRecord,
    emit_report,
    parse_report_csv,
    run_suite,
)
from .core import (
    Dataset,
    Edge,
    EdgeList,
    ParseError,
    Point,
    euclidean_distance,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from .emst import (
    BACKENDS,
    DisjointSet,
    dual_tree_boruvka,
    find_component_neighbors,
    format_edges,
    kruskal_mst,
    naive_boruvka,
    validate_spanning_tree,
    write_edges,
)
from .kdtree import BoundingBox, KdNode, KdTree, box_min_distance
from .slink import (
    Dendrogram,
    MergeStep,
    dendrogram,
    format_labels,
    naive_merge_sequence,
    naive_single_linkage,
    single_linkage,
    write_labels,
)

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "BallNode",
    "BallTree",
    "BenchConfig",
    "BenchmarkReport",
    "BoundingBox",
    "Dataset",
    "Dendrogram",
    "DisjointSet",
    "Edge",
    "EdgeList",
    "KdNode",
    "KdTree",
    "MergeStep",
    "ParseError",
    "Point",
    "RatioRecord",
    "SplitChoice",
    "TimingRecord",
    "ball_min_distance",
    "box_min_distance",
    "choose_split",
    "dendrogram",
    "dual_tree_boruvka",
    "emit_report",
    "euclidean_distance",
    "find_component_neighbors",
    "format_edges",
    "format_labels",
    "generate_synthetic",
    "kruskal_mst",
    "load_dataset",
    "naive_boruvka",
    "naive_merge_sequence",
    "naive_single_linkage",
    "parse_report_csv",
    "run_suite",
    "single_linkage",
    "validate_spanning_tree",
    "write_dataset",
    "write_edges",
    "write_labels",
]
