"""Pairwise matching costs and scalar training losses for rotated boxes.

Covers the 5-D and XYWH L1 costs, the boundary-point Hausdorff cost, the
Gaussian divergence costs (KL, squared Wasserstein) with their bounded cost
map, polygon IoU costs, the focal classification cost/loss, and the weighted
composite cost and loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import (
    ImageSize,
    NormalizedBox5D,
    RotatedBox,
    boundary_points,
    canonicalize,
    griou,
    normalize_box,
    rotated_iou,
)

# epsilon inside logarithms of the focal terms
EPS_LOG = 1e-8
# constant of the bounded divergence cost map 1 - 1/(TAU + ln(1 + D))
TAU = 1.0
# covariance eigenvalues below this are treated as degenerate
MIN_EIGENVALUE = 1e-12


@dataclass(frozen=True, eq=False)
class Gaussian2:
    """2-D Gaussian with mean in pixels and SPD covariance in pixels^2."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        if abs(self.cov[0, 1] - self.cov[1, 0]) > 1e-12:
            raise ValueError("covariance must be symmetric")
        if self.cov[0, 0] <= 0 or np.linalg.det(self.cov) <= 0:
            raise ValueError("covariance must be positive definite")


class LocCostKind(Enum):
    """Location-term variants of the composite cost/loss."""

    L1_5D = "l1"
    XYWH_L1 = "xywh-l1"
    HAUSDORFF = "hausdorff"
    NONE = "none"


class IouCostKind(Enum):
    """Overlap-term variants of the composite cost/loss."""

    KLD = "kld"
    GWD = "gwd"
    RIOU = "riou"
    GRIOU = "griou"


@dataclass(frozen=True)
class CostWeights:
    """Component weights of the composite cost/loss."""

    lambda_cls: float = 2.0
    lambda_loc: float = 5.0
    lambda_iou: float = 5.0

    def __post_init__(self):
        for name in ("lambda_cls", "lambda_loc", "lambda_iou"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class LossBreakdown:
    """Unweighted loss components plus their weighted total."""

    cls: float
    loc: float
    iou: float
    total: float


def l1_cost_5d(a: NormalizedBox5D, b: NormalizedBox5D) -> float:
    """L1 over all five normalized components, raw angle difference.

    The angle difference is deliberately not wrapped: boxes at theta = eps and
    theta = pi - eps are nearly the same rectangle but score a near-maximal
    cost. Both inputs must be normalized with the pi angle divisor.
    """
    if a.angle_divisor != b.angle_divisor:
        raise ValueError(
            f"angle divisors differ: {a.angle_divisor} vs {b.angle_divisor}"
        )
    return (
        abs(a.cx - b.cx)
        + abs(a.cy - b.cy)
        + abs(a.w - b.w)
        + abs(a.h - b.h)
        + abs(a.theta - b.theta)
    )


def xywh_l1_cost(a: NormalizedBox5D, b: NormalizedBox5D) -> float:
    """L1 over center and size only; the angle never enters."""
    return abs(a.cx - b.cx) + abs(a.cy - b.cy) + abs(a.w - b.w) + abs(a.h - b.h)


def hausdorff_cost(
    a: RotatedBox, b: RotatedBox, count: int = 4, *, size: ImageSize
) -> float:
    """Symmetric Hausdorff distance between sampled boundary points.

    Points are sampled in pixel space and divided componentwise by
    (image width, image height), which preserves the angle information that
    coordinate-wise box normalization would destroy.
    """
    scale = np.array([size.width, size.height])
    pa = boundary_points(a, count) / scale
    pb = boundary_points(b, count) / scale
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=-1))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def box_to_gaussian(box: RotatedBox) -> Gaussian2:
    """Gaussian with the box center as mean and R diag((w/2)^2,(h/2)^2) R^T."""
    box = canonicalize(box)
    va = (box.w / 2.0) ** 2
    vb = (box.h / 2.0) ** 2
    c, s = math.cos(box.theta), math.sin(box.theta)
    off = c * s * (va - vb)
    cov = np.array([[c * c * va + s * s * vb, off], [off, s * s * va + c * c * vb]])
    return Gaussian2(mean=np.array([box.cx, box.cy]), cov=cov)


def _checked_gaussian(box: RotatedBox) -> Gaussian2:
    box = canonicalize(box)
    if min((box.w / 2.0) ** 2, (box.h / 2.0) ** 2) < MIN_EIGENVALUE:
        raise ValueError(
            f"degenerate box for Gaussian conversion: w={box.w}, h={box.h}"
        )
    return box_to_gaussian(box)


def _bounded_cost(divergence: float) -> float:
    return 1.0 - 1.0 / (TAU + math.log1p(divergence))


def kld_cost(a: RotatedBox, b: RotatedBox) -> float:
    """Bounded cost from KL(N_a || N_b) between the box Gaussians."""
    ga, gb = _checked_gaussian(a), _checked_gaussian(b)
    det_a = float(np.linalg.det(ga.cov))
    det_b = float(np.linalg.det(gb.cov))
    inv_b = np.array(
        [[gb.cov[1, 1], -gb.cov[0, 1]], [-gb.cov[1, 0], gb.cov[0, 0]]]
    ) / det_b
    dm = gb.mean - ga.mean
    quad = float(dm @ inv_b @ dm)
    trace = float(np.trace(inv_b @ ga.cov))
    divergence = 0.5 * (quad + trace + math.log(det_b / det_a) - 2.0)
    return _bounded_cost(max(divergence, 0.0))


def gwd_cost(a: RotatedBox, b: RotatedBox) -> float:
    """Bounded cost from the squared Gaussian Wasserstein distance.

    For 2x2 SPD matrices the Bures term reduces to
    tr(A) + tr(B) - 2 sqrt(tr(AB) + 2 sqrt(det A det B)).
    """
    ga, gb = _checked_gaussian(a), _checked_gaussian(b)
    dm = ga.mean - gb.mean
    tr_a = float(np.trace(ga.cov))
    tr_b = float(np.trace(gb.cov))
    tr_ab = float(np.trace(ga.cov @ gb.cov))
    dets = float(np.linalg.det(ga.cov)) * float(np.linalg.det(gb.cov))
    cross = math.sqrt(max(tr_ab + 2.0 * math.sqrt(max(dets, 0.0)), 0.0))
    divergence = float(dm @ dm) + tr_a + tr_b - 2.0 * cross
    return _bounded_cost(max(divergence, 0.0))


def riou_cost(a: RotatedBox, b: RotatedBox) -> float:
    """1 - rotated IoU, in [0, 1]."""
    return 1.0 - rotated_iou(a, b)


def griou_cost(a: RotatedBox, b: RotatedBox) -> float:
    """1 - generalized rotated IoU, in [0, 2)."""
    return 1.0 - griou(a, b)


def _check_scores(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"class scores must be a non-empty 1-D sequence, got shape {arr.shape}")
    if np.any(~np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1:
        raise ValueError("class scores must be finite and within [0, 1]")
    return arr


def _check_focal_params(alpha: float, gamma: float):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")


def focal_class_cost(
    scores, target_class: int, alpha: float = 0.25, gamma: float = 2.0
) -> float:
    """Focal matching cost for one class: positive term minus negative term.

    Strictly decreasing in the target-class probability and negative once the
    prediction is confident, so confident correct candidates are rewarded.
    """
    arr = _check_scores(scores)
    _check_focal_params(alpha, gamma)
    if not 0 <= target_class < arr.size:
        raise ValueError(f"target class {target_class} out of range for {arr.size} classes")
    p = float(arr[target_class])
    pos = alpha * (1.0 - p) ** gamma * -math.log(p + EPS_LOG)
    neg = (1.0 - alpha) * p**gamma * -math.log(1.0 - p + EPS_LOG)
    return pos - neg


def focal_loss(
    scores, target_class: int | None, alpha: float = 0.25, gamma: float = 2.0
) -> float:
    """Sigmoid focal loss summed over classes; target None means no-object."""
    arr = _check_scores(scores)
    _check_focal_params(alpha, gamma)
    if target_class is not None and not 0 <= target_class < arr.size:
        raise ValueError(f"target class {target_class} out of range for {arr.size} classes")
    total = 0.0
    for c, p in enumerate(arr):
        p = float(p)
        if target_class is not None and c == target_class:
            total += alpha * (1.0 - p) ** gamma * -math.log(p + EPS_LOG)
        else:
            total += (1.0 - alpha) * p**gamma * -math.log(1.0 - p + EPS_LOG)
    return total


def _loc_cost(
    pred_box: RotatedBox,
    gt_box: RotatedBox,
    loc: LocCostKind,
    size: ImageSize,
    hausdorff_points: int,
) -> float:
    if loc is LocCostKind.NONE:
        return 0.0
    if loc is LocCostKind.HAUSDORFF:
        return hausdorff_cost(pred_box, gt_box, hausdorff_points, size=size)
    na = normalize_box(pred_box, size, math.pi)
    nb = normalize_box(gt_box, size, math.pi)
    if loc is LocCostKind.L1_5D:
        return l1_cost_5d(na, nb)
    return xywh_l1_cost(na, nb)


def _iou_cost(pred_box: RotatedBox, gt_box: RotatedBox, iou: IouCostKind) -> float:
    if iou is IouCostKind.KLD:
        return kld_cost(pred_box, gt_box)
    if iou is IouCostKind.GWD:
        return gwd_cost(pred_box, gt_box)
    if iou is IouCostKind.RIOU:
        return riou_cost(pred_box, gt_box)
    return griou_cost(pred_box, gt_box)


def match_cost(
    pred: tuple[RotatedBox, "np.ndarray"],
    gt: tuple[RotatedBox, int],
    *,
    size: ImageSize,
    weights: CostWeights = CostWeights(),
    loc: LocCostKind = LocCostKind.HAUSDORFF,
    iou: IouCostKind = IouCostKind.KLD,
    hausdorff_points: int = 4,
    alpha: float = 0.25,
    gamma: float = 2.0,
) -> float:
    """Composite matching cost between a scored prediction and a ground truth.

    pred is (box, per-class scores); gt is (box, class id). Divergence terms
    are evaluated with the prediction as the first argument.
    """
    pred_box, pred_scores = pred
    gt_box, gt_class = gt
    # zero-weight slots are skipped outright; their product would be 0 anyway
    cls = focal_class_cost(pred_scores, gt_class, alpha, gamma) if weights.lambda_cls else 0.0
    loc_val = _loc_cost(pred_box, gt_box, loc, size, hausdorff_points) if weights.lambda_loc else 0.0
    iou_val = _iou_cost(pred_box, gt_box, iou) if weights.lambda_iou else 0.0
    return weights.lambda_cls * cls + weights.lambda_loc * loc_val + weights.lambda_iou * iou_val


def training_loss(
    pred: tuple[RotatedBox, "np.ndarray"],
    gt: tuple[RotatedBox, int],
    *,
    size: ImageSize,
    weights: CostWeights = CostWeights(),
    loc: LocCostKind = LocCostKind.HAUSDORFF,
    iou: IouCostKind = IouCostKind.KLD,
    hausdorff_points: int = 4,
    alpha: float = 0.25,
    gamma: float = 2.0,
) -> LossBreakdown:
    """Weighted training loss with the focal loss in the classification slot.

    The location and overlap kinds are configured independently of the ones
    used for matching; pass different kinds to mix conventions.
    """
    pred_box, pred_scores = pred
    gt_box, gt_class = gt
    cls = focal_loss(pred_scores, gt_class, alpha, gamma)
    loc_val = _loc_cost(pred_box, gt_box, loc, size, hausdorff_points)
    iou_val = _iou_cost(pred_box, gt_box, iou)
    total = weights.lambda_cls * cls + weights.lambda_loc * loc_val + weights.lambda_iou * iou_val
    return LossBreakdown(cls=cls, loc=loc_val, iou=iou_val, total=total)


@dataclass(frozen=True)
class CostConfig:
    """Bundle of everything needed to evaluate pairwise costs and losses."""

    size: ImageSize
    weights: CostWeights = CostWeights()
    loc: LocCostKind = LocCostKind.HAUSDORFF
    iou: IouCostKind = IouCostKind.KLD
    hausdorff_points: int = 4
    alpha: float = 0.25
    gamma: float = 2.0

    def _kwargs(self) -> dict:
        return dict(
            size=self.size,
            weights=self.weights,
            loc=self.loc,
            iou=self.iou,
            hausdorff_points=self.hausdorff_points,
            alpha=self.alpha,
            gamma=self.gamma,
        )

    def pair_cost(self, pred, gt) -> float:
        return match_cost(pred, gt, **self._kwargs())

    def pair_loss(self, pred, gt) -> LossBreakdown:
        return training_loss(pred, gt, **self._kwargs())
