"""Rotated-box geometry: canonical angles, boundary sampling, polygon ops, IoU, NMS.

Boxes are (cx, cy, w, h, theta) in pixel units with theta in radians,
counter-clockwise, in a y-up coordinate frame. After canonicalization the
long edge defines the angle: w >= h and theta in [0, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Absolute tolerance in pixels for degeneracy: sliver polygons, collinear
# vertices, duplicate points.
EPS_GEOM = 1e-9


@dataclass(frozen=True)
class Point2:
    """A finite 2-D point in pixels."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class ImageSize:
    """Positive image extent in pixels, used for coordinate normalization."""

    width: float
    height: float

    def __post_init__(self):
        for name in ("width", "height"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"image {name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class RotatedBox:
    """5-parameter oriented box: center (cx, cy), size (w, h), angle theta.

    Any finite theta is accepted at construction; canonicalize() maps the box
    to the long-edge convention (w >= h, theta in [0, pi)).
    """

    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"box field {name} must be finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box sides must be positive, got w={self.w}, h={self.h}")


@dataclass(frozen=True)
class NormalizedBox5D:
    """Box divided componentwise by (I_w, I_h, I_w, I_h, angle_divisor)."""

    cx: float
    cy: float
    w: float
    h: float
    theta: float
    angle_divisor: float


def _wrap_angle(theta: float) -> float:
    """Wrap an angle into [0, pi)."""
    t = theta % math.pi
    # t == pi can occur for tiny negative inputs because pi - eps rounds to pi.
    return t if t < math.pi else 0.0


def canonicalize(box: RotatedBox) -> RotatedBox:
    """Return the same box under the long-edge convention.

    If w < h the sides are swapped and theta advances by pi/2 before wrapping
    into [0, pi). Idempotent; already-canonical boxes are returned unchanged.
    """
    w, h, theta = box.w, box.h, box.theta
    if w < h:
        w, h = h, w
        theta = theta + math.pi / 2
    if not 0.0 <= theta < math.pi:
        theta = _wrap_angle(theta)
    if w == box.w and h == box.h and theta == box.theta:
        return box
    return RotatedBox(box.cx, box.cy, w, h, theta)


def boundary_points(box: RotatedBox, count: int = 4) -> np.ndarray:
    """Sample points on the box boundary in deterministic CCW order.

    count must be a positive multiple of 4 (k = count/4 points per edge,
    placed at parameters j/k from each corner toward the next, the corner
    included and the next corner excluded). count=4 gives the corners,
    count=8 corners plus edge midpoints.

    Returns:
        (count, 2) float array of pixel coordinates, starting at the corner
        that sits at local offset (-w/2, -h/2).
    """
    if count < 4 or count % 4 != 0:
        raise ValueError(f"point count must be a positive multiple of 4, got {count}")
    box = canonicalize(box)
    k = count // 4
    hw, hh = box.w / 2.0, box.h / 2.0
    corners = np.array([(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)])
    if k == 1:
        local = corners
    else:
        t = (np.arange(k) / k)[None, :, None]
        nxt = np.roll(corners, -1, axis=0)
        segs = corners[:, None, :] + t * (nxt - corners)[:, None, :]
        local = segs.reshape(count, 2)
    c, s = math.cos(box.theta), math.sin(box.theta)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([box.cx, box.cy])


def to_polygon(box: RotatedBox) -> np.ndarray:
    """CCW 4-vertex polygon of the box corners, shape (4, 2)."""
    return boundary_points(box, 4)


def polygon_area(vertices: np.ndarray) -> float:
    """Shoelace area of a CCW polygon; 0 for fewer than 3 vertices."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clip_half_plane(subject: list, p: np.ndarray, q: np.ndarray) -> list:
    """Keep the part of `subject` on the left of directed line p->q."""
    out = []
    n = len(subject)
    d = q - p
    for i in range(n):
        s = subject[i]
        e = subject[(i + 1) % n]
        side_s = d[0] * (s[1] - p[1]) - d[1] * (s[0] - p[0])
        side_e = d[0] * (e[1] - p[1]) - d[1] * (e[0] - p[0])
        if side_s >= 0:
            out.append(s)
            if side_e < 0:
                t = side_s / (side_s - side_e)
                out.append(s + t * (e - s))
        elif side_e >= 0:
            t = side_s / (side_s - side_e)
            out.append(s + t * (e - s))
    return out


def _tidy_polygon(points: list) -> np.ndarray:
    """Drop near-duplicate and collinear vertices; collapse slivers to empty."""
    empty = np.zeros((0, 2))
    if len(points) < 3:
        return empty
    pts = [points[0]]
    for p in points[1:]:
        if np.hypot(*(p - pts[-1])) > EPS_GEOM:
            pts.append(p)
    while len(pts) > 1 and np.hypot(*(pts[0] - pts[-1])) <= EPS_GEOM:
        pts.pop()
    if len(pts) >= 3:
        kept = []
        n = len(pts)
        for i in range(n):
            a, b, c = pts[(i - 1) % n], pts[i], pts[(i + 1) % n]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if abs(cross) > EPS_GEOM:
                kept.append(b)
        pts = kept
    if len(pts) < 3:
        return empty
    poly = np.array(pts)
    if polygon_area(poly) < EPS_GEOM:
        return empty
    return poly


def polygon_intersection(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Intersection of two convex CCW polygons by sequential half-plane clipping.

    Returns a CCW polygon array, shape (m, 2), or an empty (0, 2) array when
    the intersection is empty or a sliver below EPS_GEOM in area.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 3 or len(b) < 3:
        return np.zeros((0, 2))
    subject = list(a)
    n = len(b)
    for i in range(n):
        subject = _clip_half_plane(subject, b[i], b[(i + 1) % n])
        if not subject:
            return np.zeros((0, 2))
    return _tidy_polygon(subject)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull (Andrew monotone chain), CCW, shape (m, 2).

    Raises:
        ValueError: fewer than 3 distinct points, or all points collinear.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {pts.shape}")
    if len(pts) < 3:
        raise ValueError(f"hull needs at least 3 points, got {len(pts)}")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = [pts[i] for i in order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def build(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise ValueError("degenerate hull: points are collinear")
    return np.array(hull)


def rotated_iou(a: RotatedBox, b: RotatedBox) -> float:
    """Exact rotated IoU via convex polygon clipping, in [0, 1]."""
    pa = to_polygon(a)
    pb = to_polygon(b)
    inter = polygon_area(polygon_intersection(pa, pb))
    area_a = polygon_area(pa)
    area_b = polygon_area(pb)
    union = area_a + area_b - inter
    return min(max(inter / union, 0.0), 1.0)


def griou(a: RotatedBox, b: RotatedBox) -> float:
    """Generalized rotated IoU in (-1, 1].

    IoU minus the fraction of the enclosing convex hull (of both corner sets)
    not covered by the union.
    """
    pa = to_polygon(a)
    pb = to_polygon(b)
    inter = polygon_area(polygon_intersection(pa, pb))
    area_a = polygon_area(pa)
    area_b = polygon_area(pb)
    union = area_a + area_b - inter
    iou = min(max(inter / union, 0.0), 1.0)
    hull_area = polygon_area(convex_hull(np.vstack([pa, pb])))
    # The hull contains the union; clamp the gap at 0 against roundoff.
    gap = max(hull_area - union, 0.0)
    return iou - gap / hull_area


def rotated_nms(
    boxes: Sequence[tuple[RotatedBox, float, int]], iou_threshold: float
) -> list[int]:
    """Greedy class-aware NMS over (box, score, class) detections.

    Processes detections by descending score (ties broken by ascending input
    index) and suppresses a detection when its rotated IoU with an
    already-kept detection of the same class exceeds iou_threshold. Returns
    the kept input indices in processing order.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    for i, (_, score, _) in enumerate(boxes):
        if not math.isfinite(score):
            raise ValueError(f"detection {i} has non-finite score {score}")
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i][1], i))
    kept: list[int] = []
    for i in order:
        box_i, _, class_i = boxes[i]
        suppressed = any(
            class_i == boxes[j][2] and rotated_iou(box_i, boxes[j][0]) > iou_threshold
            for j in kept
        )
        if not suppressed:
            kept.append(i)
    return kept


def normalize_box(
    box: RotatedBox, size: ImageSize, angle_divisor: float = math.pi
) -> NormalizedBox5D:
    """Divide a canonical box by (I_w, I_h, I_w, I_h, angle_divisor).

    The divisor is pi for the 5-D L1 convention and 1 where raw angles must
    be preserved.
    """
    if angle_divisor not in (1.0, math.pi):
        raise ValueError(f"angle divisor must be 1 or pi, got {angle_divisor}")
    box = canonicalize(box)
    return NormalizedBox5D(
        cx=box.cx / size.width,
        cy=box.cy / size.height,
        w=box.w / size.width,
        h=box.h / size.height,
        theta=box.theta / angle_divisor,
        angle_divisor=angle_divisor,
    )
