"""Text formats for box sets, heatmaps, sweep tables, and scenarios.

Reals are serialized with 17 significant digits, enough for every double to
round-trip bit-exactly. Parse failures raise ValueError naming the record or
line and the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import HeatmapGrid, Scenario, cost_kind_config
from .geometry import ImageSize, Point2, RotatedBox

_BOX_FIELDS = ("cx", "cy", "w", "h", "theta")


def _g(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True)
class BoxRecord:
    """One annotated box: geometry, class id, optional confidence."""

    box: RotatedBox
    cls: int
    score: float | None = None

    def __post_init__(self):
        if isinstance(self.cls, bool) or not isinstance(self.cls, int):
            raise ValueError(f"class must be an integer, got {self.cls!r}")
        if self.score is not None and not (
            isinstance(self.score, float) and 0.0 <= self.score <= 1.0
        ):
            raise ValueError(f"score must be a real in [0, 1], got {self.score!r}")


def _require_real(record: dict, name: str, where: str) -> float:
    if name not in record:
        raise ValueError(f"{where}: missing field {name!r}")
    value = record[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{where}: field {name!r} must be a real number")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{where}: field {name!r} must be finite")
    return value


def _require_int(record: dict, name: str, where: str) -> int:
    if name not in record:
        raise ValueError(f"{where}: missing field {name!r}")
    value = record[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{where}: field {name!r} must be an integer")
    return value


def _check_fields(record: dict, allowed: tuple[str, ...], where: str) -> None:
    if not isinstance(record, dict):
        raise ValueError(f"{where}: expected an object with named fields")
    for key in record:
        if key not in allowed:
            raise ValueError(f"{where}: unexpected field {key!r}")


def _parse_box(record: dict, where: str) -> RotatedBox:
    values = {name: _require_real(record, name, where) for name in _BOX_FIELDS}
    try:
        return RotatedBox(**values)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from exc


def parse_boxes(text: str) -> list[BoxRecord]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, list):
        raise ValueError("expected an array of box records")
    out: list[BoxRecord] = []
    for i, record in enumerate(data, start=1):
        where = f"record {i}"
        _check_fields(record, _BOX_FIELDS + ("class", "score"), where)
        box = _parse_box(record, where)
        cls = _require_int(record, "class", where)
        score = None
        if "score" in record:
            score = _require_real(record, "score", where)
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"{where}: field 'score' must be in [0, 1], got {score}")
        out.append(BoxRecord(box=box, cls=cls, score=score))
    return out


def format_boxes(records: Sequence[BoxRecord]) -> str:
    if not records:
        return "[]\n"
    lines = []
    for record in records:
        box = record.box
        parts = [f'"{name}": {_g(getattr(box, name))}' for name in _BOX_FIELDS]
        parts.append(f'"class": {record.cls}')
        if record.score is not None:
            parts.append(f'"score": {_g(record.score)}')
        lines.append("  {" + ", ".join(parts) + "}")
    return "[\n" + ",\n".join(lines) + "\n]\n"


def load_boxes(path) -> list[BoxRecord]:
    return parse_boxes(Path(path).read_text())


def save_boxes(records: Sequence[BoxRecord], path) -> None:
    Path(path).write_text(format_boxes(records))


def format_heatmap(grid: HeatmapGrid) -> str:
    header = (
        f"# {_g(grid.origin.x)},{_g(grid.origin.y)},{_g(grid.cell_size)},"
        f"{grid.rows},{grid.cols}"
    )
    lines = [header]
    for r in range(grid.rows):
        lines.append(",".join(_g(v) for v in grid.values[r]))
    return "\n".join(lines) + "\n"


def parse_heatmap(text: str) -> HeatmapGrid:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("line 1: expected '# origin_x,origin_y,cell_size,rows,cols'")
    head = lines[0][2:].split(",")
    if len(head) != 5:
        raise ValueError(f"line 1: expected 5 header fields, got {len(head)}")
    names = ("origin_x", "origin_y", "cell_size", "rows", "cols")
    parsed = []
    for name, raw in zip(names, head):
        try:
            parsed.append(int(raw) if name in ("rows", "cols") else float(raw))
        except ValueError as exc:
            raise ValueError(f"line 1: field {name!r} is not numeric: {raw!r}") from exc
    origin_x, origin_y, cell_size, rows, cols = parsed
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} value rows, got {len(lines) - 1}")
    values = np.empty((rows, cols))
    for r, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != cols:
            raise ValueError(f"line {r}: expected {cols} values, got {len(parts)}")
        for c, raw in enumerate(parts):
            try:
                v = float(raw)
            except ValueError as exc:
                raise ValueError(f"line {r}: value {c + 1} is not numeric: {raw!r}") from exc
            if not math.isfinite(v):
                raise ValueError(f"line {r}: value {c + 1} must be finite")
            values[r - 2, c] = v
    return HeatmapGrid(
        origin=Point2(origin_x, origin_y),
        cell_size=cell_size,
        rows=rows,
        cols=cols,
        values=values,
    )


def load_heatmap(path) -> HeatmapGrid:
    return parse_heatmap(Path(path).read_text())


def save_heatmap(grid: HeatmapGrid, path) -> None:
    Path(path).write_text(format_heatmap(grid))


def format_table(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, bool):
                cells.append(str(int(value)))
            elif isinstance(value, (int, np.integer)):
                cells.append(str(int(value)))
            else:
                cells.append(_g(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def save_table(columns: Sequence[str], rows: Sequence[Sequence], path) -> None:
    Path(path).write_text(format_table(columns, rows))


def parse_scenario(text: str, kind: str = "hausdorff", points: int = 4) -> Scenario:
    """Scenario JSON: image {w, h}, gt box + class, fixed box, moving {w, h, theta}.

    Both candidates get equal single-class scores so margins isolate geometry.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ValueError("expected a scenario object")
    _check_fields(data, ("image", "gt", "fixed", "moving"), "scenario")
    for name in ("image", "gt", "fixed", "moving"):
        if name not in data:
            raise ValueError(f"scenario: missing field {name!r}")
    _check_fields(data["image"], ("w", "h"), "image")
    image = ImageSize(
        _require_real(data["image"], "w", "image"),
        _require_real(data["image"], "h", "image"),
    )
    _check_fields(data["gt"], _BOX_FIELDS + ("class",), "gt")
    gt_box = _parse_box(data["gt"], "gt")
    gt_cls = _require_int(data["gt"], "class", "gt")
    _check_fields(data["fixed"], _BOX_FIELDS, "fixed")
    fixed_box = _parse_box(data["fixed"], "fixed")
    _check_fields(data["moving"], ("w", "h", "theta"), "moving")
    moving = tuple(_require_real(data["moving"], name, "moving") for name in ("w", "h", "theta"))
    scores = np.array([0.9])
    return Scenario(
        gt=(gt_box, gt_cls),
        fixed=(fixed_box, scores),
        moving_template=(moving[0], moving[1], moving[2], scores),
        config=cost_kind_config(kind, image, points),
    )


def load_scenario(path, kind: str = "hausdorff", points: int = 4) -> Scenario:
    return parse_scenario(Path(path).read_text(), kind, points)
