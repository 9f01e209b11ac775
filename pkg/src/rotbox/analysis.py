"""Matching-region heatmaps and cost-behavior sweeps.

The heatmap slides a template box over a grid and records, per cell, the
margin between its matching cost and a fixed competitor's: negative means
the moving box wins that cell. Sweeps tabulate costs over one-parameter
pair families (relative angle, center offset, aspect ratio) to expose
boundary discontinuities and square-degeneracy differences between costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .costs import (
    CostConfig,
    CostWeights,
    IouCostKind,
    LocCostKind,
    griou_cost,
    gwd_cost,
    hausdorff_cost,
    kld_cost,
    l1_cost_5d,
    riou_cost,
    xywh_l1_cost,
)
from .geometry import (
    ImageSize,
    Point2,
    RotatedBox,
    canonicalize,
    normalize_box,
    rotated_iou,
)

LOC_KINDS = {
    "l1": LocCostKind.L1_5D,
    "xywh-l1": LocCostKind.XYWH_L1,
    "hausdorff": LocCostKind.HAUSDORFF,
}
IOU_KINDS = {
    "kld": IouCostKind.KLD,
    "gwd": IouCostKind.GWD,
    "riou": IouCostKind.RIOU,
    "griou": IouCostKind.GRIOU,
}
COST_KINDS = tuple(LOC_KINDS) + tuple(IOU_KINDS)
METRIC_NAMES = COST_KINDS + ("iou",)


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of cell centers: (r, c) sits at origin + cell_size * (c, r)."""

    origin: Point2
    cell_size: float
    rows: int
    cols: int

    def __post_init__(self):
        if not (math.isfinite(self.cell_size) and self.cell_size > 0):
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")

    def center(self, row: int, col: int) -> Point2:
        return Point2(
            self.origin.x + self.cell_size * col, self.origin.y + self.cell_size * row
        )


def grid_spanning(image: ImageSize, rows: int = 201, cols: int = 201) -> GridSpec:
    """Cells covering [0, w] x [0, h] inclusive; spacing set by the width."""
    cell = image.width / (cols - 1) if cols > 1 else image.width
    return GridSpec(origin=Point2(0.0, 0.0), cell_size=cell, rows=rows, cols=cols)


@dataclass(frozen=True, eq=False)
class HeatmapGrid:
    """Per-cell cost margins; negative means the moving box is preferred there."""

    origin: Point2
    cell_size: float
    rows: int
    cols: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.rows, self.cols):
            raise ValueError(
                f"values shape {self.values.shape} does not match {self.rows}x{self.cols}"
            )


def cost_kind_config(kind: str, size: ImageSize, points: int = 4) -> CostConfig:
    """A config whose composite cost reduces to exactly one cost kind."""
    if kind in LOC_KINDS:
        return CostConfig(
            size=size,
            weights=CostWeights(0.0, 1.0, 0.0),
            loc=LOC_KINDS[kind],
            iou=IouCostKind.RIOU,
            hausdorff_points=points,
        )
    if kind in IOU_KINDS:
        return CostConfig(
            size=size,
            weights=CostWeights(0.0, 0.0, 1.0),
            loc=LocCostKind.NONE,
            iou=IOU_KINDS[kind],
        )
    raise ValueError(f"unknown cost kind {kind!r}, expected one of {COST_KINDS}")


@dataclass(frozen=True)
class Scenario:
    """A fixed ground truth, a fixed competitor, and a sliding template.

    Both candidates carry class scores so the margin isolates geometry when
    they are equal, which is how the default scenario is built.
    """

    gt: tuple[RotatedBox, int]
    fixed: tuple[RotatedBox, np.ndarray]
    moving_template: tuple[float, float, float, np.ndarray]
    config: CostConfig

    @property
    def image(self) -> ImageSize:
        return self.config.size


def default_scenario(kind: str = "hausdorff", *, points: int = 4) -> Scenario:
    """A 10:4 ground truth, an equal box rotated 20 degrees, an axis-aligned
    sliding template, on a 1024-pixel square image."""
    image = ImageSize(1024.0, 1024.0)
    scores = np.array([0.9])
    gt = RotatedBox(512.0, 512.0, 100.0, 40.0, 0.0)
    fixed = RotatedBox(512.0, 512.0, 100.0, 40.0, math.radians(20.0))
    return Scenario(
        gt=(gt, 0),
        fixed=(fixed, scores),
        moving_template=(100.0, 40.0, 0.0, scores),
        config=cost_kind_config(kind, image, points),
    )


def matching_region_heatmap(scenario: Scenario, grid: GridSpec) -> HeatmapGrid:
    """Margin of the sliding template against the fixed candidate per cell."""
    image = scenario.image
    far_x = grid.origin.x + grid.cell_size * (grid.cols - 1)
    far_y = grid.origin.y + grid.cell_size * (grid.rows - 1)
    if (
        grid.origin.x < -1e-9
        or grid.origin.y < -1e-9
        or far_x > image.width + 1e-9
        or far_y > image.height + 1e-9
    ):
        raise ValueError(
            f"grid spans ({grid.origin.x}, {grid.origin.y})..({far_x}, {far_y}), "
            f"outside the {image.width}x{image.height} image"
        )
    w, h, theta, scores = scenario.moving_template
    fixed_cost = scenario.config.pair_cost(scenario.fixed, scenario.gt)
    values = np.empty((grid.rows, grid.cols))
    for r in range(grid.rows):
        for c in range(grid.cols):
            center = grid.center(r, c)
            moving = canonicalize(RotatedBox(center.x, center.y, w, h, theta))
            values[r, c] = (
                scenario.config.pair_cost((moving, scores), scenario.gt) - fixed_cost
            )
    return HeatmapGrid(
        origin=grid.origin,
        cell_size=grid.cell_size,
        rows=grid.rows,
        cols=grid.cols,
        values=values,
    )


def evaluate_cost(
    kind: str, a: RotatedBox, b: RotatedBox, *, size: ImageSize, points: int = 4
) -> float:
    """One named cost (or raw IoU) between two boxes."""
    if kind == "l1":
        return l1_cost_5d(
            normalize_box(a, size, math.pi), normalize_box(b, size, math.pi)
        )
    if kind == "xywh-l1":
        return xywh_l1_cost(
            normalize_box(a, size, math.pi), normalize_box(b, size, math.pi)
        )
    if kind == "hausdorff":
        return hausdorff_cost(a, b, points, size=size)
    if kind == "kld":
        return kld_cost(a, b)
    if kind == "gwd":
        return gwd_cost(a, b)
    if kind == "riou":
        return riou_cost(a, b)
    if kind == "griou":
        return griou_cost(a, b)
    if kind == "iou":
        return rotated_iou(a, b)
    raise ValueError(f"unknown metric {kind!r}, expected one of {METRIC_NAMES}")


@dataclass(frozen=True)
class SweepTable:
    """Column-per-metric table over a one-parameter family."""

    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]


def run_sweep(
    family: Sequence[tuple[float, RotatedBox, RotatedBox]],
    metrics: Sequence[str],
    *,
    size: ImageSize,
    points: int = 4,
) -> SweepTable:
    """Evaluate every metric on every pair of the family."""
    if len(family) < 2:
        raise ValueError(f"family needs at least 2 samples, got {len(family)}")
    if not metrics:
        raise ValueError("need at least one metric")
    for name in metrics:
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}, expected one of {METRIC_NAMES}")
    rows = tuple(
        (param,)
        + tuple(evaluate_cost(m, a, b, size=size, points=points) for m in metrics)
        for param, a, b in family
    )
    return SweepTable(columns=("parameter",) + tuple(metrics), rows=rows)


def angle_family(
    samples: int = 65, *, side: float = 100.0, center: Point2 = Point2(512.0, 512.0)
) -> list[tuple[float, RotatedBox, RotatedBox]]:
    """Concentric squares at theta and pi - theta: the mirrored pair whose
    raw angle gap stays huge across the boundary while the geometry closes."""
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    out = []
    for i in range(samples):
        theta = math.pi * i / (samples - 1)
        a = canonicalize(RotatedBox(center.x, center.y, side, side, theta))
        b = canonicalize(RotatedBox(center.x, center.y, side, side, math.pi - theta))
        out.append((theta, a, b))
    return out


def center_family(
    samples: int = 41,
    *,
    w: float = 100.0,
    h: float = 40.0,
    max_offset: float = 200.0,
    center: Point2 = Point2(512.0, 512.0),
) -> list[tuple[float, RotatedBox, RotatedBox]]:
    """A box against copies of itself shifted along x by 0..max_offset."""
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    base = RotatedBox(center.x, center.y, w, h, 0.0)
    out = []
    for i in range(samples):
        d = max_offset * i / (samples - 1)
        out.append((d, base, RotatedBox(center.x + d, center.y, w, h, 0.0)))
    return out


def aspect_family(
    samples: int = 31,
    *,
    area: float = 4000.0,
    max_aspect: float = 4.0,
    center: Point2 = Point2(512.0, 512.0),
) -> list[tuple[float, RotatedBox, RotatedBox]]:
    """Equal-area boxes of aspect r against their quarter-turned twins;
    at r = 1 the pair is geometrically identical."""
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    out = []
    for i in range(samples):
        r = 1.0 + (max_aspect - 1.0) * i / (samples - 1)
        w = math.sqrt(area * r)
        h = math.sqrt(area / r)
        a = RotatedBox(center.x, center.y, w, h, 0.0)
        b = RotatedBox(center.x, center.y, w, h, math.pi / 2)
        out.append((r, a, b))
    return out


FAMILIES = {
    "angle": angle_family,
    "center": center_family,
    "aspect": aspect_family,
}
