"""Cost-matrix assembly, optimal bipartite assignment, and duplicate measurement.

Assignments map M ground-truth rows injectively into K >= M candidate
columns; unassigned columns mean "no object". Totals are correctly-rounded
sums (math.fsum) so the solver and the exhaustive oracle agree exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .costs import CostConfig
from .geometry import RotatedBox, rotated_iou

# brute-force enumeration cap: P(8, 8) = 40320 injections
MAX_BRUTE_FORCE_SIDE = 8


@dataclass(frozen=True)
class Assignment:
    """Injective row-to-column assignment with its correctly-rounded total."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float


@dataclass(frozen=True)
class DuplicateReport:
    """Counts of same-class, high-overlap, lower-scored predictions."""

    per_class: dict[int, int]
    total: int
    duplicates: int
    rate: float


def build_cost_matrix(
    gts: Sequence[tuple[RotatedBox, int]],
    candidates: Sequence[tuple[RotatedBox, np.ndarray]],
    config: CostConfig,
) -> np.ndarray:
    """Dense M x K matrix with entry (i, j) = pair cost of candidate j vs gt i."""
    if len(gts) == 0 or len(candidates) == 0:
        raise ValueError("cost matrix needs at least one ground truth and one candidate")
    out = np.empty((len(gts), len(candidates)))
    for i, gt in enumerate(gts):
        for j, cand in enumerate(candidates):
            out[i, j] = config.pair_cost(cand, gt)
    return out


def _checked_matrix(cost) -> np.ndarray:
    arr = np.asarray(cost, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"cost matrix must be 2-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("cost matrix entries must be finite")
    return arr


def _total(cost: np.ndarray, cols: Sequence[int]) -> float:
    return math.fsum(cost[i, c] for i, c in enumerate(cols))


def hungarian(cost) -> Assignment:
    """Minimal-total assignment; equal-cost optima resolve to the
    lexicographically smallest pair sequence.

    Built on scipy's solver, then refined row by row: each row takes the
    smallest column index that still completes to the optimal total.
    """
    arr = _checked_matrix(cost)
    m, k = arr.shape
    if m > k:
        raise ValueError(f"infeasible assignment: {m} rows but only {k} columns")
    _, base_cols = linear_sum_assignment(arr)
    best = _total(arr, base_cols)
    chosen: list[int] = []
    free = list(range(k))
    for i in range(m):
        fallback: tuple[float, int] | None = None
        for c in free:
            rest = [col for col in free if col != c]
            if i == m - 1:
                cols = chosen + [c]
            else:
                sub = arr[np.ix_(range(i + 1, m), rest)]
                _, sub_cols = linear_sum_assignment(sub)
                cols = chosen + [c] + [rest[j] for j in sub_cols]
            total = _total(arr, cols)
            if total <= best:
                chosen.append(c)
                free.remove(c)
                fallback = None
                break
            if fallback is None or total < fallback[0]:
                fallback = (total, c)
        else:
            # sub-solver drift only; keep the cheapest candidate
            best, c = fallback
            chosen.append(c)
            free.remove(c)
    return Assignment(tuple(enumerate(chosen)), _total(arr, chosen))


def brute_force_assignment(cost) -> Assignment:
    """Exhaustive minimum over all injections, same tie-break as hungarian."""
    arr = _checked_matrix(cost)
    m, k = arr.shape
    if m > k:
        raise ValueError(f"infeasible assignment: {m} rows but only {k} columns")
    if k > MAX_BRUTE_FORCE_SIDE:
        raise ValueError(
            f"brute force is capped at {MAX_BRUTE_FORCE_SIDE} columns, got {k}"
        )
    perms = np.array(list(itertools.permutations(range(k), m)))
    totals = arr[0, perms[:, 0]].copy()
    for i in range(1, m):
        totals += arr[i, perms[:, i]]
    # accumulation error is far below this window; exact fsum decides inside it
    near = np.flatnonzero(totals <= totals.min() + 1e-9)
    best_total = math.inf
    best_cols = None
    for idx in near:  # ascending = lexicographic order of column tuples
        total = _total(arr, perms[idx])
        if total < best_total:
            best_total = total
            best_cols = perms[idx]
    return Assignment(tuple(enumerate(int(c) for c in best_cols)), best_total)


def duplicate_report(
    predictions: Sequence[tuple[RotatedBox, float, int]],
    score_threshold: float = 0.3,
    iou_threshold: float = 0.5,
) -> DuplicateReport:
    """Count predictions shadowed by a strictly higher-scored same-class one.

    Only predictions with score >= score_threshold participate; a prediction
    is a duplicate when some strictly higher-scored prediction of its class
    overlaps it with rotated IoU > iou_threshold.
    """
    for name, value in (("score_threshold", score_threshold), ("iou_threshold", iou_threshold)):
        if not 0 < value < 1:
            raise ValueError(f"{name} must be in (0, 1), got {value}")
    above = [
        (box, score, cls) for box, score, cls in predictions if score >= score_threshold
    ]
    per_class: dict[int, int] = {cls: 0 for _, _, cls in above}
    duplicates = 0
    for box, score, cls in above:
        shadowed = any(
            other_cls == cls
            and other_score > score
            and rotated_iou(box, other_box) > iou_threshold
            for other_box, other_score, other_cls in above
        )
        if shadowed:
            per_class[cls] += 1
            duplicates += 1
    total = len(above)
    rate = duplicates / total if total else 0.0
    return DuplicateReport(
        per_class=dict(sorted(per_class.items())),
        total=total,
        duplicates=duplicates,
        rate=rate,
    )
