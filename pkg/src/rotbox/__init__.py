"""Rotated-box matching and denoising toolkit.

Geometry, matching costs, bipartite assignment, query denoising, and the
analysis helpers that map where each cost prefers one candidate over
another. Everything runs on plain boxes and numpy arrays; there is no
network anywhere.
"""

from .analysis import (
    COST_KINDS,
    FAMILIES,
    METRIC_NAMES,
    GridSpec,
    HeatmapGrid,
    Scenario,
    SweepTable,
    angle_family,
    aspect_family,
    center_family,
    cost_kind_config,
    default_scenario,
    evaluate_cost,
    grid_spanning,
    matching_region_heatmap,
    run_sweep,
)
from .costs import (
    CostConfig,
    CostWeights,
    Gaussian2,
    IouCostKind,
    LocCostKind,
    LossBreakdown,
    box_to_gaussian,
    focal_class_cost,
    focal_loss,
    griou_cost,
    gwd_cost,
    hausdorff_cost,
    kld_cost,
    l1_cost_5d,
    match_cost,
    riou_cost,
    training_loss,
    xywh_l1_cost,
)
from .denoising import (
    MIN_SCALE_FACTOR,
    DenoisingGroup,
    DenoisingLossReport,
    FilterDecision,
    RefinementSimulator,
    adaptive_denoising_loss,
    adaptive_filter,
    combine_reports,
    contrastive_denoising_loss,
    filter_decision_from_costs,
    generate_denoising_group,
    generate_denoising_groups,
    simulate_training_trajectory,
    synthetic_predictions,
)
from .geometry import (
    ImageSize,
    NormalizedBox5D,
    Point2,
    RotatedBox,
    boundary_points,
    canonicalize,
    convex_hull,
    griou,
    normalize_box,
    polygon_area,
    polygon_intersection,
    rotated_iou,
    rotated_nms,
    to_polygon,
)
from .io import (
    BoxRecord,
    format_boxes,
    format_heatmap,
    format_table,
    load_boxes,
    load_heatmap,
    load_scenario,
    parse_boxes,
    parse_heatmap,
    parse_scenario,
    save_boxes,
    save_heatmap,
    save_table,
)
from .matching import (
    MAX_BRUTE_FORCE_SIDE,
    Assignment,
    DuplicateReport,
    brute_force_assignment,
    build_cost_matrix,
    duplicate_report,
    hungarian,
)

__all__ = [
    "COST_KINDS",
    "FAMILIES",
    "MAX_BRUTE_FORCE_SIDE",
    "METRIC_NAMES",
    "MIN_SCALE_FACTOR",
    "Assignment",
    "BoxRecord",
    "CostConfig",
    "CostWeights",
    "DenoisingGroup",
    "DenoisingLossReport",
    "DuplicateReport",
    "FilterDecision",
    "Gaussian2",
    "GridSpec",
    "HeatmapGrid",
    "ImageSize",
    "IouCostKind",
    "LocCostKind",
    "LossBreakdown",
    "NormalizedBox5D",
    "Point2",
    "RefinementSimulator",
    "RotatedBox",
    "Scenario",
    "SweepTable",
    "adaptive_denoising_loss",
    "adaptive_filter",
    "angle_family",
    "aspect_family",
    "boundary_points",
    "box_to_gaussian",
    "brute_force_assignment",
    "build_cost_matrix",
    "canonicalize",
    "center_family",
    "combine_reports",
    "contrastive_denoising_loss",
    "convex_hull",
    "cost_kind_config",
    "default_scenario",
    "duplicate_report",
    "evaluate_cost",
    "filter_decision_from_costs",
    "focal_class_cost",
    "focal_loss",
    "format_boxes",
    "format_heatmap",
    "format_table",
    "generate_denoising_group",
    "generate_denoising_groups",
    "grid_spanning",
    "griou",
    "griou_cost",
    "gwd_cost",
    "hausdorff_cost",
    "hungarian",
    "kld_cost",
    "l1_cost_5d",
    "load_boxes",
    "load_heatmap",
    "load_scenario",
    "match_cost",
    "matching_region_heatmap",
    "normalize_box",
    "parse_boxes",
    "parse_heatmap",
    "parse_scenario",
    "polygon_area",
    "polygon_intersection",
    "riou_cost",
    "rotated_iou",
    "rotated_nms",
    "run_sweep",
    "save_boxes",
    "save_heatmap",
    "save_table",
    "simulate_training_trajectory",
    "synthetic_predictions",
    "to_polygon",
    "training_loss",
    "xywh_l1_cost",
]
