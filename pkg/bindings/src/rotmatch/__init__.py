"""Array-in/array-out bindings over the rotbox matching toolkit.

Training loops hold boxes as K x 5 float arrays, not dataclasses. This
package converts at the boundary (double precision, row-major) and delegates
every computation to rotbox, so outputs are numerically identical to the
native calls. Nothing here keeps state between calls, and the heavy lifting
happens inside numpy/scipy kernels, which release the interpreter lock
during native computation.

Box rows are (cx, cy, w, h, theta) in pixels, theta in radians. Errors from
rotbox cross the boundary unchanged; rows that fail box validation raise
with the offending row index prefixed to the native message.
"""

import numpy as np

from rotbox.analysis import COST_KINDS, IOU_KINDS, LOC_KINDS, evaluate_cost
from rotbox.costs import CostConfig, CostWeights
from rotbox.denoising import adaptive_filter
from rotbox.geometry import ImageSize, RotatedBox
from rotbox.geometry import rotated_nms as _nms
from rotbox.matching import hungarian

__all__ = ["batch_cost", "assign", "aqd_filter", "rotated_nms"]

_PARAM_KEYS = ("image", "points")
_IMAGE_KINDS = ("l1", "xywh-l1", "hausdorff")


def _as_matrix(values, name: str, width: int = 5) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"{name} must be 2-D with {width} columns, got shape {arr.shape}")
    return arr


def _boxes(arr: np.ndarray, name: str) -> list[RotatedBox]:
    out = []
    for i, row in enumerate(arr):
        try:
            out.append(RotatedBox(*(float(x) for x in row)))
        except ValueError as exc:
            raise ValueError(f"{name} row {i}: {exc}") from exc
    return out


def _scores_matrix(values, name: str, count: int) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != count:
        raise ValueError(f"{name} must be 2-D with {count} rows, got shape {arr.shape}")
    return arr


def batch_cost(gts, candidates, kind: str, params=None) -> np.ndarray:
    """M x K matrix of one named cost between every gt/candidate pair.

    Rows index `gts`, columns index `candidates`; asymmetric kinds (kld) are
    evaluated candidate-versus-gt, the direction the matcher uses. `params`
    may carry `image` (width, height), required for the normalized kinds
    (l1, xywh-l1, hausdorff), and `points`, the per-edge boundary sample
    count for hausdorff.
    """
    if kind not in COST_KINDS:
        raise ValueError(f"unknown cost kind {kind!r}, expected one of {COST_KINDS}")
    params = dict(params or {})
    unknown = sorted(set(params) - set(_PARAM_KEYS))
    if unknown:
        raise ValueError(f"unknown params {unknown}, expected subset of {_PARAM_KEYS}")
    if kind in _IMAGE_KINDS and "image" not in params:
        raise ValueError(f"cost kind {kind!r} needs params['image'] = (width, height)")
    width, height = params.get("image", (1.0, 1.0))
    size = ImageSize(width=float(width), height=float(height))
    points = int(params.get("points", 4))
    gt_boxes = _boxes(_as_matrix(gts, "gts"), "gts")
    cand_boxes = _boxes(_as_matrix(candidates, "candidates"), "candidates")
    out = np.empty((len(gt_boxes), len(cand_boxes)), dtype=np.float64)
    for i, gt in enumerate(gt_boxes):
        for j, cand in enumerate(cand_boxes):
            out[i, j] = evaluate_cost(kind, cand, gt, size=size, points=points)
    return out


def assign(cost) -> tuple[np.ndarray, float]:
    """Optimal assignment of an M x K cost matrix.

    Returns (pairs, total): pairs is an M x 2 int64 array of (row, column)
    sorted by row, total the exact summed cost, both straight from the
    native solver.
    """
    result = hungarian(np.ascontiguousarray(cost, dtype=np.float64))
    pairs = np.array(sorted(result.pairs), dtype=np.int64).reshape(-1, 2)
    return pairs, result.total_cost


def _config(config) -> CostConfig:
    if isinstance(config, CostConfig):
        return config
    config = dict(config)
    try:
        width, height = config.pop("image")
    except KeyError:
        raise ValueError("config needs 'image' = (width, height)") from None
    kwargs = {"size": ImageSize(width=float(width), height=float(height))}
    if "weights" in config:
        kwargs["weights"] = CostWeights(*map(float, config.pop("weights")))
    if "loc" in config:
        name = config.pop("loc")
        if name not in LOC_KINDS:
            raise ValueError(f"unknown loc kind {name!r}, expected one of {sorted(LOC_KINDS)}")
        kwargs["loc"] = LOC_KINDS[name]
    if "iou" in config:
        name = config.pop("iou")
        if name not in IOU_KINDS:
            raise ValueError(f"unknown iou kind {name!r}, expected one of {sorted(IOU_KINDS)}")
        kwargs["iou"] = IOU_KINDS[name]
    if "points" in config:
        kwargs["hausdorff_points"] = int(config.pop("points"))
    if config:
        raise ValueError(f"unknown config keys {sorted(config)}")
    return CostConfig(**kwargs)


def aqd_filter(p_pos, p_pos_scores, preds, pred_scores, gts, gt_classes, config) -> np.ndarray:
    """M keep flags: true where a refined positive wins its own ground truth.

    `p_pos` and `gts` are M x 5 box arrays, `preds` N x 5; score arrays carry
    one class-probability row per box and `gt_classes` the M integer labels.
    `config` is a rotbox CostConfig or a mapping with `image` plus optional
    `weights` (cls, loc, iou), `loc`, `iou`, and `points` entries.
    """
    gt_arr = _as_matrix(gts, "gts")
    classes = np.ascontiguousarray(gt_classes)
    if classes.shape != (len(gt_arr),):
        raise ValueError(
            f"gt_classes must have shape ({len(gt_arr)},), got {classes.shape}"
        )
    if classes.dtype.kind not in "iu":
        raise ValueError(f"gt_classes must be integers, got dtype {classes.dtype}")
    pos_arr = _as_matrix(p_pos, "p_pos")
    if len(pos_arr) != len(gt_arr):
        raise ValueError(f"need one positive per ground truth, got {len(pos_arr)}/{len(gt_arr)}")
    pred_arr = _as_matrix(preds, "preds")
    pos_scores = _scores_matrix(p_pos_scores, "p_pos_scores", len(pos_arr))
    prd_scores = _scores_matrix(pred_scores, "pred_scores", len(pred_arr))

    positives = list(zip(_boxes(pos_arr, "p_pos"), pos_scores))
    predictions = list(zip(_boxes(pred_arr, "preds"), prd_scores))
    ground = list(zip(_boxes(gt_arr, "gts"), (int(c) for c in classes)))
    decision = adaptive_filter(positives, predictions, ground, _config(config))
    return np.array(decision.kept, dtype=bool)


def rotated_nms(boxes, scores, classes, iou_threshold: float) -> np.ndarray:
    """Kept indices after greedy same-class suppression, highest score first."""
    arr = _as_matrix(boxes, "boxes")
    score_arr = np.ascontiguousarray(scores, dtype=np.float64)
    class_arr = np.ascontiguousarray(classes)
    if score_arr.shape != (len(arr),):
        raise ValueError(f"scores must have shape ({len(arr)},), got {score_arr.shape}")
    if class_arr.shape != (len(arr),):
        raise ValueError(f"classes must have shape ({len(arr)},), got {class_arr.shape}")
    if class_arr.dtype.kind not in "iu":
        raise ValueError(f"classes must be integers, got dtype {class_arr.dtype}")
    detections = [
        (box, float(score_arr[i]), int(class_arr[i]))
        for i, box in enumerate(_boxes(arr, "boxes"))
    ]
    return np.array(_nms(detections, iou_threshold), dtype=np.int64)
