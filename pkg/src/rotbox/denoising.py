"""Noised-query generation, denoising losses, and adaptive query filtering.

A denoising group pairs each ground truth with a lightly noised positive
query and a heavily noised negative query. The contrastive loss reconstructs
positives against their source and pushes negatives to background. The
adaptive variant first competes refined positives against the regular
predictions in one assignment and trains only the winners as positives.

Query refinement is normally a neural decoder; here it is a pluggable pure
transformation, with a parametric interpolation stand-in provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .costs import CostConfig, CostWeights, LossBreakdown, focal_loss
from .geometry import ImageSize, RotatedBox, canonicalize, rotated_iou
from .matching import build_cost_matrix, hungarian

# a noised side length never shrinks below this fraction of the original
MIN_SCALE_FACTOR = 0.05

GtPair = tuple[RotatedBox, int]
ScoredBox = tuple[RotatedBox, np.ndarray]
PredictionGenerator = Callable[
    [Sequence[GtPair], float, np.random.Generator], Sequence[ScoredBox]
]


@dataclass(frozen=True)
class DenoisingGroup:
    """Aligned positive and negative noised queries for a set of ground truths.

    For every index, the negative's noise magnitudes strictly exceed the
    positive's: positives draw from (0, level], negatives from (level, 2*level].
    """

    positives: tuple[GtPair, ...]
    negatives: tuple[GtPair, ...]
    source_gts: tuple[GtPair, ...]
    noise_level: float
    seed: int


@dataclass(frozen=True)
class FilterDecision:
    """Assignment outcome per ground truth: kept[i] means its own positive won."""

    matched: tuple[int, ...]
    kept: tuple[bool, ...]
    kept_fraction: float


@dataclass(frozen=True)
class DenoisingLossReport:
    """Loss buckets for one denoising group; total sums the active buckets."""

    pos_loss: float
    neg_loss: float
    filtered_background_loss: float
    filtered_bbox_loss: float
    total: float


def _signed(rng: np.random.Generator, low: float, high: float) -> float:
    magnitude = rng.uniform(low, high)
    return magnitude if rng.random() < 0.5 else -magnitude


def _noised_box(
    rng: np.random.Generator, box: RotatedBox, low: float, high: float
) -> RotatedBox:
    """Shift the center and rescale the sides; the angle is never noised."""
    if low == 0.0:
        dx = rng.uniform(-high, high)
        dy = rng.uniform(-high, high)
        fw = 1.0 + rng.uniform(-high, high)
        fh = 1.0 + rng.uniform(-high, high)
    else:
        dx = _signed(rng, low, high)
        dy = _signed(rng, low, high)
        fw = 1.0 + _signed(rng, low, high)
        fh = 1.0 + _signed(rng, low, high)
    return canonicalize(
        RotatedBox(
            cx=box.cx + dx * box.w / 2.0,
            cy=box.cy + dy * box.h / 2.0,
            w=box.w * max(fw, MIN_SCALE_FACTOR),
            h=box.h * max(fh, MIN_SCALE_FACTOR),
            theta=box.theta,
        )
    )


def _noised_label(rng: np.random.Generator, cls: int, num_classes: int) -> int:
    # half the queries carry label noise; those flip with probability 0.5
    if num_classes < 2:
        return cls
    if rng.random() < 0.5 and rng.random() < 0.5:
        return int((cls + 1 + rng.integers(num_classes - 1)) % num_classes)
    return cls


def generate_denoising_group(
    gts: Sequence[GtPair],
    noise_level: float,
    seed: int,
    *,
    label_noise: bool = True,
    num_classes: int | None = None,
) -> DenoisingGroup:
    """One positive and one negative noised query per ground truth.

    Positives noise the center by uniform(-level, level) half-sides and the
    sides by a uniform(1 - level, 1 + level) factor; negatives draw the same
    shapes with magnitudes from (level, 2 * level]. Scale factors are floored
    at MIN_SCALE_FACTOR so boxes stay valid. Deterministic under seed.
    """
    if len(gts) == 0:
        raise ValueError("denoising group needs at least one ground truth")
    if not 0 < noise_level <= 1:
        raise ValueError(f"noise_level must be in (0, 1], got {noise_level}")
    if num_classes is None:
        num_classes = max(cls for _, cls in gts) + 1
    rng = np.random.default_rng(seed)
    positives = []
    negatives = []
    for box, cls in gts:
        pos_box = _noised_box(rng, box, 0.0, noise_level)
        neg_box = _noised_box(rng, box, noise_level, 2.0 * noise_level)
        pos_cls = _noised_label(rng, cls, num_classes) if label_noise else cls
        neg_cls = _noised_label(rng, cls, num_classes) if label_noise else cls
        positives.append((pos_box, pos_cls))
        negatives.append((neg_box, neg_cls))
    return DenoisingGroup(
        positives=tuple(positives),
        negatives=tuple(negatives),
        source_gts=tuple((box, cls) for box, cls in gts),
        noise_level=noise_level,
        seed=seed,
    )


def generate_denoising_groups(
    gts: Sequence[GtPair],
    noise_level: float,
    seed: int,
    count: int,
    **kwargs,
) -> tuple[DenoisingGroup, ...]:
    """Independent groups seeded seed, seed + 1, ...; losses sum across them."""
    if count < 1:
        raise ValueError(f"group count must be >= 1, got {count}")
    return tuple(
        generate_denoising_group(gts, noise_level, seed + g, **kwargs)
        for g in range(count)
    )


def contrastive_denoising_loss(
    p_pos: Sequence[ScoredBox],
    p_neg: Sequence[ScoredBox],
    gts: Sequence[GtPair],
    config: CostConfig,
) -> DenoisingLossReport:
    """Reconstruct every positive against its own ground truth, push every
    negative to background; the assignment is the identity by construction."""
    if not len(p_pos) == len(p_neg) == len(gts):
        raise ValueError(
            f"aligned sequences required, got {len(p_pos)}/{len(p_neg)}/{len(gts)}"
        )
    pos = math.fsum(config.pair_loss(p, gt).total for p, gt in zip(p_pos, gts))
    neg = math.fsum(
        focal_loss(scores, None, config.alpha, config.gamma) for _, scores in p_neg
    )
    return DenoisingLossReport(
        pos_loss=pos,
        neg_loss=neg,
        filtered_background_loss=0.0,
        filtered_bbox_loss=0.0,
        total=math.fsum((pos, neg)),
    )


def filter_decision_from_costs(cost_matrix) -> FilterDecision:
    """Verdicts for a gts x (positives ++ predictions) cost matrix.

    Ground truth i is kept exactly when the optimal assignment hands row i
    its own positive, column i.
    """
    assignment = hungarian(cost_matrix)
    matched = tuple(c for _, c in assignment.pairs)
    kept = tuple(c == i for i, c in assignment.pairs)
    return FilterDecision(
        matched=matched, kept=kept, kept_fraction=sum(kept) / len(kept)
    )


def adaptive_filter(
    p_pos: Sequence[ScoredBox],
    predictions: Sequence[ScoredBox],
    gts: Sequence[GtPair],
    cost_config: CostConfig,
) -> FilterDecision:
    """Compete refined positives against predictions in a single assignment."""
    if len(p_pos) != len(gts):
        raise ValueError(f"need one positive per ground truth, got {len(p_pos)}/{len(gts)}")
    columns = list(p_pos) + list(predictions)
    return filter_decision_from_costs(build_cost_matrix(gts, columns, cost_config))


def _bbox_term(breakdown: LossBreakdown, weights: CostWeights) -> float:
    return weights.lambda_loc * breakdown.loc + weights.lambda_iou * breakdown.iou


def adaptive_denoising_loss(
    p_pos: Sequence[ScoredBox],
    p_neg: Sequence[ScoredBox],
    predictions: Sequence[ScoredBox],
    gts: Sequence[GtPair],
    cost_config: CostConfig,
    *,
    improved: bool = False,
    loss_config: CostConfig | None = None,
) -> DenoisingLossReport:
    """Denoising loss gated by the adaptive filter.

    Kept positives reconstruct their ground truth; filtered ones train as
    background, plus their box-regression term when improved is on, so
    geometry supervision survives the filter. Negatives always train as
    background.
    """
    if loss_config is None:
        loss_config = cost_config
    if len(p_neg) != len(gts):
        raise ValueError(f"need one negative per ground truth, got {len(p_neg)}/{len(gts)}")
    decision = adaptive_filter(p_pos, predictions, gts, cost_config)
    pos_terms: list[float] = []
    background_terms: list[float] = []
    bbox_terms: list[float] = []
    for i, (pred, gt) in enumerate(zip(p_pos, gts)):
        if decision.kept[i]:
            pos_terms.append(loss_config.pair_loss(pred, gt).total)
            continue
        background_terms.append(
            focal_loss(pred[1], None, loss_config.alpha, loss_config.gamma)
        )
        if improved:
            breakdown = loss_config.pair_loss(pred, gt)
            bbox_terms.append(_bbox_term(breakdown, loss_config.weights))
    neg = math.fsum(
        focal_loss(scores, None, loss_config.alpha, loss_config.gamma)
        for _, scores in p_neg
    )
    pos = math.fsum(pos_terms)
    background = math.fsum(background_terms)
    bbox = math.fsum(bbox_terms)
    return DenoisingLossReport(
        pos_loss=pos,
        neg_loss=neg,
        filtered_background_loss=background,
        filtered_bbox_loss=bbox,
        total=math.fsum((pos, neg, background, bbox)),
    )


def combine_reports(reports: Sequence[DenoisingLossReport]) -> DenoisingLossReport:
    """Sum loss buckets across independent denoising groups."""
    if len(reports) == 0:
        raise ValueError("need at least one report")
    pos = math.fsum(r.pos_loss for r in reports)
    neg = math.fsum(r.neg_loss for r in reports)
    background = math.fsum(r.filtered_background_loss for r in reports)
    bbox = math.fsum(r.filtered_bbox_loss for r in reports)
    return DenoisingLossReport(
        pos_loss=pos,
        neg_loss=neg,
        filtered_background_loss=background,
        filtered_bbox_loss=bbox,
        total=math.fsum((pos, neg, background, bbox)),
    )


@dataclass(frozen=True)
class RefinementSimulator:
    """Decoder stand-in: interpolate a noised query toward its source.

    accuracy 0 returns the query untouched, accuracy 1 returns the source
    geometry exactly. Scores put accuracy (floored at 0.05 so low-accuracy
    queries are merely unconfident, not anti-confident) on the target class
    and 0.1 * (1 - accuracy) elsewhere.
    """

    accuracy: float
    num_classes: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {self.num_classes}")

    def _scores(self, target: int) -> np.ndarray:
        scores = np.full(self.num_classes, 0.1 * (1.0 - self.accuracy))
        scores[target] = max(self.accuracy, 0.05)
        return scores

    def refine(self, query: GtPair, source: GtPair) -> ScoredBox:
        a = self.accuracy
        q, _ = query
        g, cls = source
        box = canonicalize(
            RotatedBox(
                cx=(1.0 - a) * q.cx + a * g.cx,
                cy=(1.0 - a) * q.cy + a * g.cy,
                w=(1.0 - a) * q.w + a * g.w,
                h=(1.0 - a) * q.h + a * g.h,
                theta=(1.0 - a) * q.theta + a * g.theta,
            )
        )
        return box, self._scores(cls)

    def refine_group(
        self, group: DenoisingGroup
    ) -> tuple[list[ScoredBox], list[ScoredBox]]:
        positives = [
            self.refine(q, s) for q, s in zip(group.positives, group.source_gts)
        ]
        negatives = [
            self.refine(q, s) for q, s in zip(group.negatives, group.source_gts)
        ]
        return positives, negatives


def synthetic_predictions(
    gts: Sequence[GtPair],
    accuracy: float,
    rng: np.random.Generator,
    num_classes: int,
) -> list[ScoredBox]:
    """One prediction per ground truth whose noise shrinks as accuracy grows.

    At accuracy 1 the geometry is exact and scores are near-certain; at 0 the
    center wanders up to a half-side and the score is barely above chance.
    """
    spread = 1.0 - accuracy
    out: list[ScoredBox] = []
    for box, cls in gts:
        jittered = _noised_box(rng, box, 0.0, spread) if spread > 0 else box
        scores = rng.uniform(0.0, 0.05, size=num_classes)
        scores[cls] = min(max(accuracy + rng.uniform(-0.05, 0.05), 0.02), 0.98)
        out.append((jittered, scores))
    return out


def simulate_training_trajectory(
    gts: Sequence[GtPair],
    steps: int,
    noise_level: float,
    accuracy_schedule: Callable[[int], float],
    prediction_generator: PredictionGenerator | None = None,
    seed: int = 0,
    *,
    cost_config: CostConfig | None = None,
    refinement_schedule: Callable[[int], float] | None = None,
    label_noise: bool = True,
    num_classes: int | None = None,
) -> list[tuple[int, float, float]]:
    """Kept fraction and prediction quality across a mock training run.

    Each step draws fresh predictions and a fresh denoising group at the
    scheduled accuracy, refines the positives, and runs the adaptive filter.
    Per-step randomness derives from (seed, step), so steps are independent.
    Returns (step, kept_fraction, mean_prediction_iou) triples.
    """
    if steps < 2:
        raise ValueError(f"need at least 2 steps, got {steps}")
    if num_classes is None:
        num_classes = max(cls for _, cls in gts) + 1
    if cost_config is None:
        cost_config = CostConfig(size=ImageSize(1024.0, 1024.0))
    out: list[tuple[int, float, float]] = []
    for step in range(steps):
        a = min(max(float(accuracy_schedule(step)), 0.0), 1.0)
        refine_a = a
        if refinement_schedule is not None:
            refine_a = min(max(float(refinement_schedule(step)), 0.0), 1.0)
        state = np.random.SeedSequence((seed, step)).generate_state(2)
        group = generate_denoising_group(
            gts,
            noise_level,
            int(state[0]),
            label_noise=label_noise,
            num_classes=num_classes,
        )
        rng = np.random.default_rng(int(state[1]))
        generator = prediction_generator
        if generator is None:
            predictions = synthetic_predictions(gts, a, rng, num_classes)
        else:
            predictions = list(generator(gts, a, rng))
        simulator = RefinementSimulator(accuracy=refine_a, num_classes=num_classes)
        refined_pos, _ = simulator.refine_group(group)
        decision = adaptive_filter(refined_pos, predictions, gts, cost_config)
        mean_iou = float(
            np.mean(
                [
                    max(rotated_iou(pred_box, gt_box) for pred_box, _ in predictions)
                    if predictions
                    else 0.0
                    for gt_box, _ in gts
                ]
            )
        )
        out.append((step, decision.kept_fraction, mean_iou))
    return out
