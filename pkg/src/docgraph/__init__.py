"""Spatial and logical relation graphs over document layout annotations."""

from .core import (
    BoundingBox,
    Category,
    DocumentGraph,
    LayoutInstance,
    Page,
    PageValidationError,
    RelationEdge,
    RelationType,
    ValidationReport,
    iou,
    validate_page,
)
from .dataset_io import Dataset, compute_stats, export_dot, export_graphml, load_dataset, save_dataset
from .evaluation import (
    dla_map,
    evaluate,
    filter_relations,
    fuse_auxiliary,
    match_instances,
    mean_ap_g,
    mean_recall_g,
)
from .reading_order import xy_cut
from .relations import AnnotateConfig, annotate
from .spatial import classify_layout, extract_spatial, nearest_in_direction

__all__ = [
    "BoundingBox",
    "Category",
    "DocumentGraph",
    "LayoutInstance",
    "Page",
    "PageValidationError",
    "RelationEdge",
    "RelationType",
    "ValidationReport",
    "iou",
    "validate_page",
    "Dataset",
    "compute_stats",
    "export_dot",
    "export_graphml",
    "load_dataset",
    "save_dataset",
    "dla_map",
    "evaluate",
    "filter_relations",
    "fuse_auxiliary",
    "match_instances",
    "mean_ap_g",
    "mean_recall_g",
    "xy_cut",
    "AnnotateConfig",
    "annotate",
    "classify_layout",
    "extract_spatial",
    "nearest_in_direction",
]

__version__ = "0.1.0"
