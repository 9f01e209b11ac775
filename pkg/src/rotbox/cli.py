"""Command-line surface: heatmaps, sweeps, matching, NMS, duplicate reports,
and adaptive-denoising simulations, all emitting CSV or box-set text."""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

import numpy as np

from .analysis import (
    COST_KINDS,
    FAMILIES,
    cost_kind_config,
    default_scenario,
    grid_spanning,
    matching_region_heatmap,
    run_sweep,
)
from .costs import CostConfig
from .denoising import simulate_training_trajectory
from .geometry import ImageSize, RotatedBox, rotated_nms
from .io import _g, format_heatmap, format_table, load_boxes, load_scenario
from .matching import build_cost_matrix, duplicate_report, hungarian

_DEMO_GTS = (
    (RotatedBox(300.0, 300.0, 120.0, 50.0, 0.4), 0),
    (RotatedBox(620.0, 340.0, 200.0, 80.0, 1.2), 1),
    (RotatedBox(500.0, 700.0, 90.0, 60.0, 0.0), 2),
    (RotatedBox(180.0, 760.0, 160.0, 40.0, 2.6), 0),
)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _parse_grid(spec: str) -> tuple[int, int]:
    parts = spec.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"grid must look like ROWSxCOLS, got {spec!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"grid must look like ROWSxCOLS, got {spec!r}") from None
    return rows, cols


def _scored_predictions(records) -> list[tuple[RotatedBox, float, int]]:
    out = []
    for i, record in enumerate(records, start=1):
        if record.score is None:
            raise ValueError(f"record {i}: missing field 'score'")
        out.append((record.box, record.score, record.cls))
    return out


def cmd_heatmap(args) -> None:
    if args.scenario is None:
        scenario = default_scenario(args.cost, points=args.points)
    else:
        scenario = load_scenario(args.scenario, args.cost, args.points)
    rows, cols = _parse_grid(args.grid)
    grid = grid_spanning(scenario.image, rows, cols)
    _emit(format_heatmap(matching_region_heatmap(scenario, grid)), args.out)


def cmd_sweep(args) -> None:
    build = FAMILIES[args.family]
    family = build(args.samples) if args.samples else build()
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    size = ImageSize(args.image, args.image)
    table = run_sweep(family, metrics, size=size, points=args.points)
    _emit(format_table(table.columns, table.rows), args.out)


def cmd_match(args) -> None:
    gt_records = load_boxes(args.gts)
    pred_records = load_boxes(args.preds)
    if not gt_records or not pred_records:
        raise ValueError("both box sets must be non-empty")
    num_classes = max(r.cls for r in gt_records + pred_records) + 1
    gts = [(r.box, r.cls) for r in gt_records]
    candidates = []
    for record in pred_records:
        scores = np.zeros(num_classes)
        scores[record.cls] = 0.5 if record.score is None else record.score
        candidates.append((record.box, scores))
    config = cost_kind_config(args.cost, ImageSize(args.image, args.image), args.points)
    assignment = hungarian(build_cost_matrix(gts, candidates, config))
    lines = ["gt,candidate"]
    lines.extend(f"{i},{j}" for i, j in assignment.pairs)
    lines.append(f"# total_cost,{_g(assignment.total_cost)}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_nms(args) -> None:
    records = load_boxes(args.preds)
    preds = _scored_predictions(records)
    indexed = [
        (i, item) for i, item in enumerate(preds) if item[1] >= args.score
    ]
    kept_local = rotated_nms([item for _, item in indexed], args.iou)
    lines = ["index,cx,cy,w,h,theta,class,score"]
    for local in kept_local:
        original, (box, score, cls) = indexed[local]
        lines.append(
            f"{original},{_g(box.cx)},{_g(box.cy)},{_g(box.w)},{_g(box.h)},"
            f"{_g(box.theta)},{cls},{_g(score)}"
        )
    _emit("\n".join(lines) + "\n", args.out)


def cmd_duplicates(args) -> None:
    records = load_boxes(args.preds)
    report = duplicate_report(
        _scored_predictions(records), args.score, args.iou
    )
    lines = ["class,duplicates"]
    lines.extend(f"{cls},{count}" for cls, count in report.per_class.items())
    lines.append(
        f"# total,{report.total},duplicates,{report.duplicates},rate,{_g(report.rate)}"
    )
    _emit("\n".join(lines) + "\n", args.out)


def cmd_aqd_sim(args) -> None:
    if args.gts is None:
        gts = list(_DEMO_GTS)
    else:
        gts = [(r.box, r.cls) for r in load_boxes(args.gts)]
        if not gts:
            raise ValueError("ground-truth box set must be non-empty")
    steps = args.steps
    config = CostConfig(size=ImageSize(args.image, args.image))
    trajectory = simulate_training_trajectory(
        gts,
        steps,
        args.noise_level,
        lambda s: s / (steps - 1),
        seed=args.seed,
        cost_config=config,
        refinement_schedule=lambda s: max(0.0, s / (steps - 1) - args.refine_lag),
    )
    _emit(
        format_table(("step", "kept_fraction", "mean_prediction_iou"), trajectory),
        args.out,
    )


def _add_common(parser, *, points=True, image=True, out=True) -> None:
    if points:
        parser.add_argument("--points", type=int, default=4, help="boundary samples per box")
    if image:
        parser.add_argument("--image", type=float, default=1024.0, help="square image side")
    if out:
        parser.add_argument("--out", default=None, help="output file (default stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotbox",
        description="Rotated-box matching analysis: heatmaps, sweeps, "
        "assignment, NMS, duplicates, and denoising simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("heatmap", help="matching-region margin grid")
    p.add_argument("--scenario", default=None, help="scenario JSON (default built-in)")
    p.add_argument("--cost", choices=COST_KINDS, default="hausdorff")
    p.add_argument("--grid", default="201x201", help="ROWSxCOLS")
    _add_common(p, image=False)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("sweep", help="cost curves over a box-pair family")
    p.add_argument("--family", choices=sorted(FAMILIES), required=True)
    p.add_argument("--metrics", default="hausdorff,l1", help="comma-separated metric names")
    p.add_argument("--samples", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("match", help="assign predictions to ground truths")
    p.add_argument("--gts", required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--cost", choices=COST_KINDS, default="hausdorff")
    _add_common(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("nms", help="greedy same-class suppression")
    p.add_argument("--preds", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--score", type=float, default=0.0, help="drop predictions below this score")
    _add_common(p, points=False, image=False)
    p.set_defaults(func=cmd_nms)

    p = sub.add_parser("duplicates", help="count shadowed same-class predictions")
    p.add_argument("--preds", required=True)
    p.add_argument("--score", type=float, default=0.3)
    p.add_argument("--iou", type=float, default=0.5)
    _add_common(p, points=False, image=False)
    p.set_defaults(func=cmd_duplicates)

    p = sub.add_parser("aqd-sim", help="adaptive-denoising training trajectory")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--noise-level", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gts", default=None, help="ground-truth box set (default demo)")
    p.add_argument("--refine-lag", type=float, default=0.5, help="refinement accuracy lag")
    _add_common(p, points=False)
    p.set_defaults(func=cmd_aqd_sim)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
