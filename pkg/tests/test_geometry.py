"""Geometry tests: canonical form, boundary sampling, polygon ops, IoU, NMS."""

import math

import numpy as np
import pytest

from rotbox.geometry import (
    ImageSize,
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
from oracles import (
    corners_of,
    dist_to_boundary,
    hausdorff_points,
    mc_iou,
    random_box,
    random_pair,
    shoelace,
)

SQ2 = math.sqrt(2.0)


# ---------------------------------------------------------------- construction


def test_box_rejects_nonpositive_sides():
    with pytest.raises(ValueError):
        RotatedBox(0, 0, -1, 2, 0)
    with pytest.raises(ValueError):
        RotatedBox(0, 0, 1, 0, 0)


def test_box_rejects_nonfinite_fields():
    with pytest.raises(ValueError):
        RotatedBox(math.nan, 0, 1, 1, 0)
    with pytest.raises(ValueError):
        RotatedBox(0, 0, 1, 1, math.inf)


def test_image_size_rejects_nonpositive():
    with pytest.raises(ValueError):
        ImageSize(0, 100)


# -------------------------------------------------------------- canonicalize


def test_canonicalize_keeps_canonical_box():
    box = RotatedBox(0, 0, 4, 2, 0)
    assert canonicalize(box) == box


def test_canonicalize_swaps_short_long_edges():
    out = canonicalize(RotatedBox(0, 0, 2, 4, 0))
    assert (out.w, out.h) == (4, 2)
    assert out.theta == pytest.approx(math.pi / 2, abs=0)


def test_canonicalize_wraps_angle():
    out = canonicalize(RotatedBox(0, 0, 4, 2, 3 * math.pi / 2))
    assert (out.w, out.h) == (4, 2)
    assert out.theta == pytest.approx(math.pi / 2, abs=1e-15)


def test_canonicalize_negative_angle():
    out = canonicalize(RotatedBox(0, 0, 4, 2, -1e-18))
    assert 0.0 <= out.theta < math.pi


def test_canonicalize_idempotent():
    rng = np.random.default_rng(7)
    for _ in range(500):
        raw = RotatedBox(
            cx=rng.uniform(-50, 50),
            cy=rng.uniform(-50, 50),
            w=rng.uniform(0.1, 40),
            h=rng.uniform(0.1, 40),
            theta=rng.uniform(-12.0, 12.0),
        )
        once = canonicalize(raw)
        twice = canonicalize(once)
        assert twice == once
        assert once.w >= once.h
        assert 0.0 <= once.theta < math.pi


# ----------------------------------------------------------- boundary_points


def test_corners_axis_aligned():
    pts = boundary_points(RotatedBox(0, 0, 2, 2, 0), 4)
    np.testing.assert_allclose(pts, [(-1, -1), (1, -1), (1, 1), (-1, 1)], atol=0)


def test_corners_plus_midpoints():
    pts = boundary_points(RotatedBox(0, 0, 2, 2, 0), 8)
    np.testing.assert_allclose(pts[0::2], [(-1, -1), (1, -1), (1, 1), (-1, 1)], atol=0)
    np.testing.assert_allclose(pts[1::2], [(0, -1), (1, 0), (0, 1), (-1, 0)], atol=1e-15)


def test_corners_rotated_square():
    box = RotatedBox(0, 0, 2, 2, math.pi / 4)
    pts = boundary_points(box, 4)
    np.testing.assert_allclose(pts, [(0, -SQ2), (SQ2, 0), (0, SQ2), (-SQ2, 0)], atol=1e-15)
    np.testing.assert_allclose(pts, corners_of(box), atol=1e-12)


def test_boundary_points_count_validation():
    box = RotatedBox(0, 0, 2, 2, 0)
    for count in (0, 3, 6, -4, 10):
        with pytest.raises(ValueError):
            boundary_points(box, count)


def test_points_lie_on_boundary_and_survive_half_turn():
    rng = np.random.default_rng(11)
    for _ in range(50):
        box = random_box(rng)
        flipped = RotatedBox(box.cx, box.cy, box.w, box.h, box.theta + math.pi)
        for count in (4, 8, 12, 32):
            pts = boundary_points(box, count)
            assert pts.shape == (count, 2)
            assert max(dist_to_boundary(p, box) for p in pts) < 1e-9
            assert hausdorff_points(pts, boundary_points(flipped, count)) < 1e-9


def test_square_corner_set_invariant_under_quarter_turn():
    rng = np.random.default_rng(13)
    for _ in range(50):
        side = rng.uniform(5, 200)
        theta = rng.uniform(0, math.pi)
        a = RotatedBox(100, 100, side, side, theta)
        b = RotatedBox(100, 100, side, side, theta + math.pi / 2)
        assert hausdorff_points(boundary_points(a, 4), boundary_points(b, 4)) < 1e-9


def test_32_point_placement_uniform_per_edge():
    box = RotatedBox(40, -3, 14, 6, 0.7)
    pts = boundary_points(box, 32)
    corners = corners_of(box)
    for edge in range(4):
        a = corners[edge]
        b = corners[(edge + 1) % 4]
        for j in range(8):
            expected = a + (j / 8.0) * (b - a)
            np.testing.assert_allclose(pts[edge * 8 + j], expected, atol=1e-9)


# ------------------------------------------------------- to_polygon and area


def test_polygon_area_identity():
    rng = np.random.default_rng(17)
    for _ in range(100):
        box = random_box(rng)
        assert polygon_area(to_polygon(box)) == pytest.approx(box.w * box.h, abs=1e-9)


def test_polygon_is_ccw():
    rng = np.random.default_rng(19)
    for _ in range(50):
        assert polygon_area(to_polygon(random_box(rng))) > 0


def test_rotated_polygon_area_matches_shoelace_oracle():
    box = RotatedBox(5, 5, 3, 1, math.pi / 6)
    poly = to_polygon(box)
    assert polygon_area(poly) == pytest.approx(3.0, abs=1e-12)
    assert polygon_area(poly) == pytest.approx(shoelace(corners_of(box)), abs=1e-12)


def test_polygon_area_degenerate():
    assert polygon_area(np.zeros((0, 2))) == 0.0
    assert polygon_area(np.array([(0, 0), (1, 1)])) == 0.0


# ------------------------------------------------------ polygon_intersection


def unit_square(cx, cy):
    return to_polygon(RotatedBox(cx, cy, 1, 1, 0))


def test_intersection_disjoint_is_empty():
    out = polygon_intersection(unit_square(0, 0), unit_square(5, 0))
    assert out.shape == (0, 2)


def test_intersection_with_self_keeps_area():
    sq = unit_square(0.3, -2.0)
    out = polygon_intersection(sq, sq)
    assert polygon_area(out) == pytest.approx(polygon_area(sq), abs=1e-9)


def test_intersection_offset_squares_quarter_area():
    out = polygon_intersection(unit_square(0, 0), unit_square(0.5, 0.5))
    assert polygon_area(out) == pytest.approx(0.25, abs=1e-12)


def test_intersection_area_bounds_and_symmetry():
    rng = np.random.default_rng(23)
    for _ in range(100):
        a, b = random_pair(rng)
        pa, pb = to_polygon(a), to_polygon(b)
        inter_ab = polygon_area(polygon_intersection(pa, pb))
        inter_ba = polygon_area(polygon_intersection(pb, pa))
        assert inter_ab >= 0.0
        assert inter_ab <= min(polygon_area(pa), polygon_area(pb)) + 1e-9
        assert inter_ab == pytest.approx(inter_ba, abs=1e-6 * max(1.0, inter_ab))


# ---------------------------------------------------------------- convex_hull


def test_hull_of_square_corners():
    sq = unit_square(0, 0)
    hull = convex_hull(sq)
    assert hull.shape == (4, 2)
    assert polygon_area(hull) == pytest.approx(1.0, abs=1e-12)


def test_hull_ignores_interior_point():
    pts = np.vstack([unit_square(0, 0), [(0.1, 0.05)]])
    assert polygon_area(convex_hull(pts)) == pytest.approx(1.0, abs=1e-12)


def test_hull_rejects_degenerate_input():
    with pytest.raises(ValueError):
        convex_hull(np.array([(0, 0), (1, 1)]))
    with pytest.raises(ValueError):
        convex_hull(np.array([(0, 0), (1, 1), (2, 2), (3, 3)]))


def test_hull_contains_all_points_of_two_boxes():
    rng = np.random.default_rng(29)
    for _ in range(50):
        a, b = random_pair(rng)
        pts = np.vstack([to_polygon(a), to_polygon(b)])
        hull = convex_hull(pts)
        assert polygon_area(hull) >= max(a.w * a.h, b.w * b.h) - 1e-9
        # every input point on or inside every hull edge
        n = len(hull)
        for i in range(n):
            p, q = hull[i], hull[(i + 1) % n]
            cross = (q[0] - p[0]) * (pts[:, 1] - p[1]) - (q[1] - p[1]) * (pts[:, 0] - p[0])
            assert cross.min() > -1e-6


# ---------------------------------------------------------------- rotated_iou


def test_iou_identical_is_exactly_one():
    box = RotatedBox(12, -4, 30, 11, 1.234)
    assert rotated_iou(box, box) == 1.0


def test_iou_disjoint_is_zero():
    assert rotated_iou(RotatedBox(0, 0, 2, 1, 0.3), RotatedBox(100, 100, 2, 1, 0.3)) == 0.0


def test_iou_square_vs_diagonal_square():
    a = RotatedBox(0, 0, 2, 2, 0)
    b = RotatedBox(0, 0, 2, 2, math.pi / 4)
    value = rotated_iou(a, b)
    # intersection is a regular octagon of area 8(sqrt(2)-1); the ratio
    # simplifies to 1/sqrt(2)
    assert value == pytest.approx(1 / SQ2, abs=1e-12)
    assert value == pytest.approx(mc_iou(a, b, n=1_000_000), abs=5e-3)


def test_iou_symmetric_and_bounded():
    rng = np.random.default_rng(31)
    for _ in range(100):
        a, b = random_pair(rng)
        v = rotated_iou(a, b)
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(rotated_iou(b, a), abs=1e-9)


def test_iou_matches_monte_carlo_spot_check():
    rng = np.random.default_rng(37)
    for _ in range(20):
        a, b = random_pair(rng)
        assert rotated_iou(a, b) == pytest.approx(mc_iou(a, b, n=200_000), abs=0.02)


# --------------------------------------------------------------------- griou


def test_griou_identical():
    box = RotatedBox(3, 3, 8, 2, 0.2)
    assert griou(box, box) == pytest.approx(1.0, abs=1e-12)


def test_griou_far_apart_approaches_minus_one():
    a = RotatedBox(0, 0, 10, 10, 0)
    b = RotatedBox(1000, 0, 10, 10, 0)
    v = griou(a, b)
    assert -1.0 < v < -0.9


def test_griou_adjacent_squares():
    a = RotatedBox(0.5, 0.5, 1, 1, 0)
    b = RotatedBox(1.5, 0.5, 1, 1, 0)
    assert griou(a, b) == 0.0


def test_griou_never_exceeds_iou():
    rng = np.random.default_rng(41)
    for _ in range(100):
        a, b = random_pair(rng)
        assert griou(a, b) <= rotated_iou(a, b) + 1e-12


def test_griou_equals_iou_for_contained_box():
    outer = RotatedBox(0, 0, 20, 10, 0.5)
    inner = RotatedBox(0, 0, 6, 3, 0.5)
    assert griou(outer, inner) == pytest.approx(rotated_iou(outer, inner), abs=1e-12)


# --------------------------------------------------------------- rotated_nms


def test_nms_identical_pair_keeps_higher_score():
    box = RotatedBox(5, 5, 4, 2, 0.1)
    kept = rotated_nms([(box, 0.9, 0), (box, 0.8, 0)], 0.5)
    assert kept == [0]


def test_nms_keeps_disjoint_boxes():
    dets = [
        (RotatedBox(0, 0, 2, 1, 0), 0.5, 0),
        (RotatedBox(50, 50, 2, 1, 0), 0.9, 0),
    ]
    assert rotated_nms(dets, 0.5) == [1, 0]


def test_nms_chain_revives_third_box():
    # A suppresses B; C exceeds the threshold only against B, which is gone,
    # so C survives.
    a = RotatedBox(0, 0, 10, 4, 0)
    b = RotatedBox(2, 0, 10, 4, 0)
    c = RotatedBox(4, 0, 10, 4, 0)
    assert rotated_iou(a, b) > 0.5 and rotated_iou(b, c) > 0.5 and rotated_iou(a, c) < 0.5
    kept = rotated_nms([(a, 0.9, 0), (b, 0.8, 0), (c, 0.7, 0)], 0.5)
    assert kept == [0, 2]


def test_nms_classes_do_not_suppress_each_other():
    box = RotatedBox(5, 5, 4, 2, 0.1)
    kept = rotated_nms([(box, 0.9, 0), (box, 0.8, 1)], 0.5)
    assert kept == [0, 1]


def test_nms_equal_scores_tie_break_by_index():
    box = RotatedBox(5, 5, 4, 2, 0.1)
    kept = rotated_nms([(box, 0.8, 0), (box, 0.8, 0)], 0.5)
    assert kept == [0]


def test_nms_threshold_validation():
    dets = [(RotatedBox(0, 0, 1, 1, 0), 0.5, 0)]
    for threshold in (0.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            rotated_nms(dets, threshold)


def test_nms_kept_set_is_valid():
    rng = np.random.default_rng(43)
    for _ in range(20):
        dets = [
            (random_box(rng, image_w=200, image_h=200), rng.random(), int(rng.integers(0, 3)))
            for _ in range(12)
        ]
        kept = rotated_nms(dets, 0.4)
        assert len(set(kept)) == len(kept)
        assert set(kept) <= set(range(len(dets)))
        for x in range(len(kept)):
            for y in range(x + 1, len(kept)):
                i, j = kept[x], kept[y]
                if dets[i][2] == dets[j][2]:
                    assert rotated_iou(dets[i][0], dets[j][0]) <= 0.4


# -------------------------------------------------------------- normalize_box


def test_normalize_box_pi_divisor():
    out = normalize_box(RotatedBox(50, 50, 20, 10, math.pi / 2), ImageSize(100, 100), math.pi)
    assert (out.cx, out.cy, out.w, out.h, out.theta) == (0.5, 0.5, 0.2, 0.1, 0.5)
    assert out.angle_divisor == math.pi


def test_normalize_box_unit_divisor_preserves_angle():
    out = normalize_box(RotatedBox(50, 50, 20, 10, math.pi / 2), ImageSize(100, 100), 1.0)
    assert out.theta == math.pi / 2


def test_normalize_box_rectangular_image():
    out = normalize_box(RotatedBox(100, 50, 40, 20, 0), ImageSize(200, 100), math.pi)
    assert (out.cx, out.cy, out.w, out.h, out.theta) == (0.5, 0.5, 0.2, 0.2, 0.0)


def test_normalize_box_canonicalizes_first():
    out = normalize_box(RotatedBox(0, 0, 2, 4, 0), ImageSize(100, 100), math.pi)
    assert (out.w, out.h) == (0.04, 0.02)
    assert out.theta == 0.5


def test_normalize_box_divisor_validation():
    with pytest.raises(ValueError):
        normalize_box(RotatedBox(0, 0, 2, 1, 0), ImageSize(100, 100), 2.0)
