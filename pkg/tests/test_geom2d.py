"""Rectilinear kernel tests; derived expectations use a grid rasterizer
oracle independent of the kernel's own arithmetic."""

import pytest

from brepforge.errors import (
    CollisionError,
    ConflictError,
    InvalidFootprintError,
    MustCleanFirstError,
    OffsetTooLargeError,
)
from brepforge.geom2d import (
    Footprint,
    Point2,
    Rect,
    VertexKind,
    classify_vertex,
    clean,
    decompose_rects,
    fill_notches,
    offset_loop,
    overlaps,
    polygon_area,
    to_metres,
    to_units,
    union_rect,
    vertex_kind_counts,
)

SQUARE = Footprint.from_metres([(0, 0), (4, 0), (4, 4), (0, 4)])
L_SHAPE = Footprint.from_metres([(0, 0), (6, 0), (6, 3), (3, 3), (3, 6), (0, 6)])


def raster_area_units(f: Footprint) -> int:
    """Oracle: count unit cells whose centre lies inside the loop."""
    bbox = f.bbox()
    count = 0
    for cx in range(bbox.x0, bbox.x1):
        for cy in range(bbox.y0, bbox.y1):
            # Cell centre (cx + .5, cy + .5); ray toward +x at half offset.
            crossings = 0
            for a, b in f.edges():
                if a.x != b.x:
                    continue
                lo, hi = sorted((a.y, b.y))
                if 2 * lo < 2 * cy + 1 < 2 * hi and 2 * a.x > 2 * cx + 1:
                    crossings += 1
            count += crossings % 2
    return count


def test_grid_snapping():
    assert to_units(2.4) == 24
    assert to_metres(24) == 2.4
    with pytest.raises(ValueError):
        to_units(2.45)


def test_area_unit_square():
    unit = Footprint.from_metres([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert polygon_area(unit) == 1.0


def test_area_square_scaled():
    assert polygon_area(SQUARE) == 16.0


def test_area_l_shape_two_rects():
    # Oracle: 6x3 plus 3x3 rectangles.
    assert polygon_area(L_SHAPE) == 6 * 3 + 3 * 3
    assert raster_area_units(L_SHAPE) == 2700


def test_degenerate_loop_rejected():
    with pytest.raises(InvalidFootprintError):
        Footprint(tuple([Point2(0, 0), Point2(10, 0), Point2(10, 10)]))


def test_classify_rectangle_all_convex():
    for i in range(4):
        assert classify_vertex(SQUARE, i) is VertexKind.CONVEX


def test_classify_l_reflex():
    reflex = L_SHAPE.vertices.index(Point2(30, 30))
    assert classify_vertex(L_SHAPE, reflex) is VertexKind.CONCAVE


def test_classify_counts_match_identity():
    n = len(L_SHAPE.vertices)
    convex, concave = vertex_kind_counts(L_SHAPE)
    assert (convex, concave) == ((n + 4) // 2, (n - 4) // 2) == (5, 1)


def test_classify_requires_clean():
    messy = Footprint.from_metres([(0, 0), (2, 0), (4, 0), (4, 4), (0, 4)])
    with pytest.raises(MustCleanFirstError):
        classify_vertex(messy, 1)


def test_union_coplanar_merge():
    u = union_rect(SQUARE, Rect.from_metres(4, 0, 8, 4))
    assert polygon_area(u) == 32.0
    assert len(u.vertices) == 4


def test_union_partial_side_eight_vertices():
    r = Rect.from_metres(4, 1, 7, 3)
    u = union_rect(SQUARE, r)
    assert len(u.vertices) == 8
    assert polygon_area(u) == 22.0
    assert raster_area_units(u) == raster_area_units(SQUARE) + r.area_units


def test_union_area_additive_exact():
    r = Rect.from_metres(4, 1, 7, 3)
    u = union_rect(SQUARE, r)
    assert abs(polygon_area(u) - (polygon_area(SQUARE) + r.area_m2)) <= 1e-9


def test_union_overlap_is_collision():
    with pytest.raises(CollisionError):
        union_rect(SQUARE, Rect.from_metres(3, 3, 6, 6))


def test_union_straddling_corner_rejected():
    with pytest.raises(ConflictError):
        union_rect(SQUARE, Rect.from_metres(4, 2, 7, 5))


def test_union_point_touch_rejected():
    with pytest.raises(ConflictError):
        union_rect(SQUARE, Rect.from_metres(4, 4, 6, 6))


def test_union_disjoint_rejected():
    with pytest.raises(ConflictError):
        union_rect(SQUARE, Rect.from_metres(5, 0, 8, 4))


def test_clean_collinear_midpoint():
    messy = Footprint.from_metres([(0, 0), (2, 0), (4, 0), (4, 4), (0, 4)])
    assert clean(messy).vertices == SQUARE.vertices


def test_clean_duplicate_vertex():
    messy = Footprint(
        (Point2(0, 0), Point2(40, 0), Point2(40, 0), Point2(40, 40), Point2(0, 40))
    )
    assert clean(messy).vertices == SQUARE.vertices


def test_clean_idempotent():
    assert clean(clean(L_SHAPE)).vertices == clean(L_SHAPE).vertices == L_SHAPE.vertices


def test_clean_collapse_error():
    line = Footprint(
        (Point2(0, 0), Point2(10, 0), Point2(20, 0), Point2(20, 10), Point2(0, 10))
    )
    # Removing the midpoint keeps 4 vertices; collapsing further must raise.
    slab = clean(line)
    assert len(slab.vertices) == 4
    with pytest.raises(InvalidFootprintError):
        clean(Footprint((Point2(0, 0), Point2(10, 0), Point2(10, 1), Point2(10, 0))))


SLIT = Footprint.from_metres(
    [(0, 0), (8, 0), (8, 4), (5, 4), (5, 3.7), (4.8, 3.7), (4.8, 4), (0, 4)]
)


def test_fill_notch_narrow_slit():
    filled = fill_notches(SLIT, to_units(0.5))
    assert len(filled.vertices) == len(SLIT.vertices) - 4
    assert raster_area_units(filled) == raster_area_units(SLIT) + 2 * 3


def test_fill_notch_square_noop():
    assert fill_notches(SQUARE, 5).vertices == SQUARE.vertices


def test_fill_notch_wide_slit_untouched():
    wide = Footprint.from_metres(
        [(0, 0), (8, 0), (8, 4), (5, 4), (5, 3.7), (4.2, 3.7), (4.2, 4), (0, 4)]
    )
    assert fill_notches(wide, 5).vertices == wide.vertices


def test_overlaps_edge_contact_false():
    assert not overlaps(SQUARE, Rect.from_metres(4, 0, 6, 2))


def test_overlaps_interior_true():
    assert overlaps(SQUARE, Rect.from_metres(3, 3, 6, 6))


def test_overlaps_disjoint_false():
    assert not overlaps(SQUARE, Rect.from_metres(9, 9, 11, 11))


def test_overlaps_agrees_with_rasterization():
    rects = [
        Rect.from_metres(1, 1, 2, 2),
        Rect.from_metres(3, 2.9, 7, 5),
        Rect.from_metres(5.9, 0, 9, 3),
        Rect.from_metres(3, 3, 3.1, 3.1),
        Rect.from_metres(-2, -2, 0, 6),
    ]
    for r in rects:
        expected = any(
            r.x0 <= cx < r.x1 and r.y0 <= cy < r.y1
            for cx in range(L_SHAPE.bbox().x0, L_SHAPE.bbox().x1)
            for cy in range(L_SHAPE.bbox().y0, L_SHAPE.bbox().y1)
            if raster_cell_inside(L_SHAPE, cx, cy)
        )
        assert overlaps(L_SHAPE, r) == expected, r


def raster_cell_inside(f: Footprint, cx: int, cy: int) -> bool:
    crossings = 0
    for a, b in f.edges():
        if a.x != b.x:
            continue
        lo, hi = sorted((a.y, b.y))
        if 2 * lo < 2 * cy + 1 < 2 * hi and 2 * a.x > 2 * cx + 1:
            crossings += 1
    return crossings % 2 == 1


def test_offset_square():
    outer, inner = offset_loop(SQUARE, 1)
    assert outer.bbox() == Rect(-1, -1, 41, 41)
    assert inner.bbox() == Rect(1, 1, 39, 39)


def test_offset_l_shape_raster_oracle():
    outer, inner = offset_loop(L_SHAPE, 1)
    assert raster_area_units(outer) == outer.area_units2() // 2
    assert raster_area_units(inner) == inner.area_units2() // 2
    perimeter = sum(abs(b.x - a.x) + abs(b.y - a.y) for a, b in L_SHAPE.edges())
    assert outer.area_units2() // 2 - inner.area_units2() // 2 == 2 * perimeter


def test_offset_nesting():
    outer, inner = offset_loop(L_SHAPE, 1)
    for p in inner.vertices:
        assert L_SHAPE.classify_point(p.x, p.y) != "outside"
    for p in L_SHAPE.vertices:
        assert outer.classify_point(p.x, p.y) == "inside"


def test_offset_too_large():
    with pytest.raises(OffsetTooLargeError):
        offset_loop(SQUARE, 30)


def test_decompose_tiles_exactly():
    rects = decompose_rects(L_SHAPE)
    assert sum(r.area_units for r in rects) * 2 == L_SHAPE.area_units2()
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            assert not rects[i].interior_intersects(rects[j])
