"""Axis-aligned B-rep kernel: solids as plane-bound faces with loop topology.

Solids are built from exact integer-grid boxes and represented as faces on
axis-aligned planes; loops store vertex ids, so watertightness is a pure
combinatorial check (every undirected edge used exactly twice, once per
direction).  Booleans are structural: hole insertion for through-openings
and per-plane region cancellation for merges — no floating-point CSG.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    AssemblyInconsistencyError,
    BooleanFailureError,
    EmptyMeshError,
    InvalidExtrusionError,
    MergeConflictError,
)
from .geom2d import Footprint, decompose_rects
from .regions import Region, merged_breakpoints, rasterize_loops, trace_region

AXIS_NAMES = "xyz"

# Right-handed in-plane frames (u_axis, v_axis) with u × v = outward normal.
FRAMES = {
    (0, +1): (1, 2),
    (0, -1): (2, 1),
    (1, +1): (2, 0),
    (1, -1): (0, 2),
    (2, +1): (0, 1),
    (2, -1): (1, 0),
}


class Box(NamedTuple):
    """Axis-aligned box in grid units."""

    x0: int
    y0: int
    z0: int
    x1: int
    y1: int
    z1: int

    def lo(self, axis: int) -> int:
        return self[axis]

    def hi(self, axis: int) -> int:
        return self[axis + 3]


@dataclass(frozen=True)
class BRepFace:
    """Planar face: outer loop CCW about the outward normal, holes CW."""

    axis: int
    offset: int
    sign: int
    outer: tuple[int, ...]
    inner: tuple[tuple[int, ...], ...] = ()

    @property
    def normal_name(self) -> str:
        return ("+" if self.sign > 0 else "-") + AXIS_NAMES[self.axis]

    def loops(self) -> Iterable[tuple[int, ...]]:
        yield self.outer
        yield from self.inner


@dataclass(frozen=True)
class BRepSolid:
    vertices: tuple[tuple[int, int, int], ...]
    faces: tuple[BRepFace, ...]
    label: str = "GOOD"


RawFace = tuple[int, int, int, list, list]  # axis, offset, sign, outer2d, holes2d


def _loop_to_3d(loop2d, axis: int, offset: int, sign: int):
    ua, va = FRAMES[(axis, sign)]
    out = []
    for u, v in loop2d:
        p = [0, 0, 0]
        p[axis] = offset
        p[ua] = int(u)
        p[va] = int(v)
        out.append(tuple(p))
    return out


def _loop_to_2d(coords, axis: int, sign: int):
    ua, va = FRAMES[(axis, sign)]
    return [(p[ua], p[va]) for p in coords]


def _finalize(raw_faces: Sequence[RawFace], label: str = "GOOD") -> BRepSolid:
    """Weld vertices, split T-junctions, and canonicalize ordering."""
    loops3d = []  # (axis, offset, sign, [outer coords], [hole coords ...])
    points: set[tuple[int, int, int]] = set()
    for axis, offset, sign, outer, holes in raw_faces:
        o3 = _loop_to_3d(outer, axis, offset, sign)
        h3 = [_loop_to_3d(h, axis, offset, sign) for h in holes]
        loops3d.append((axis, offset, sign, o3, h3))
        for loop in (o3, *h3):
            points.update(loop)

    # Index every vertex on its three grid lines so loop edges can be split
    # exactly where any other face has a corner.
    lines: dict[tuple[int, int, int], list[int]] = {}
    for x, y, z in points:
        lines.setdefault((0, y, z), []).append(x)
        lines.setdefault((1, x, z), []).append(y)
        lines.setdefault((2, x, y), []).append(z)
    for positions in lines.values():
        positions.sort()

    def split_loop(loop):
        out = []
        n = len(loop)
        for i in range(n):
            a, b = loop[i], loop[(i + 1) % n]
            out.append(a)
            diff = [k for k in range(3) if a[k] != b[k]]
            if len(diff) != 1:
                raise ValueError(f"loop edge {a}->{b} is not axis-parallel")
            ax = diff[0]
            if ax == 0:
                key = (0, a[1], a[2])
            elif ax == 1:
                key = (1, a[0], a[2])
            else:
                key = (2, a[0], a[1])
            lo, hi = sorted((a[ax], b[ax]))
            between = [t for t in lines[key] if lo < t < hi]
            if a[ax] > b[ax]:
                between.reverse()
            for t in between:
                p = list(a)
                p[ax] = t
                out.append(tuple(p))
        return out

    vertices = sorted(points)
    vid = {p: i for i, p in enumerate(vertices)}

    faces = []
    for axis, offset, sign, o3, h3 in loops3d:
        outer_ids = tuple(vid[p] for p in split_loop(o3))
        inner_ids = tuple(tuple(vid[p] for p in split_loop(h)) for h in h3)
        faces.append((axis, offset, sign, outer_ids, inner_ids))

    def rotate_min(loop: tuple[int, ...]) -> tuple[int, ...]:
        k = loop.index(min(loop))
        return loop[k:] + loop[:k]

    canon = []
    for axis, offset, sign, outer, inner in faces:
        outer = rotate_min(outer)
        inner = tuple(sorted(rotate_min(h) for h in inner))
        canon.append(BRepFace(axis, offset, sign, outer, inner))
    canon.sort(key=lambda f: (f.axis, f.offset, f.sign, f.outer))

    used = sorted({i for f in canon for loop in f.loops() for i in loop})
    remap = {old: new for new, old in enumerate(used)}
    final_faces = tuple(
        BRepFace(
            f.axis,
            f.offset,
            f.sign,
            tuple(remap[i] for i in f.outer),
            tuple(tuple(remap[i] for i in h) for h in f.inner),
        )
        for f in canon
    )
    final_vertices = tuple(vertices[i] for i in used)
    return BRepSolid(final_vertices, final_faces, label)


def _solid_to_raw(solid: BRepSolid) -> list[RawFace]:
    raw = []
    for f in solid.faces:
        coords = [solid.vertices[i] for i in f.outer]
        holes = [[solid.vertices[i] for i in h] for h in f.inner]
        raw.append(
            (f.axis, f.offset, f.sign, _loop_to_2d(coords, f.axis, f.sign),
             [_loop_to_2d(h, f.axis, f.sign) for h in holes])
        )
    return raw


def solid_from_boxes(positive: Sequence[Box], negative: Sequence[Box] = ()) -> BRepSolid:
    """Exact boundary of (∪ positive) \\ (∪ negative) on the integer grid."""
    if not positive:
        raise InvalidExtrusionError("no material boxes")
    boxes = list(positive) + list(negative)
    axes_pts = []
    for axis in range(3):
        axes_pts.append(merged_breakpoints([b.lo(axis) for b in boxes], [b.hi(axis) for b in boxes]))
    xs, ys, zs = axes_pts
    mat = np.zeros((len(xs) - 1, len(ys) - 1, len(zs) - 1), dtype=bool)

    def span(vals, lo, hi):
        return int(np.searchsorted(vals, lo)), int(np.searchsorted(vals, hi))

    for b in positive:
        ix = span(xs, b.x0, b.x1)
        iy = span(ys, b.y0, b.y1)
        iz = span(zs, b.z0, b.z1)
        mat[ix[0]:ix[1], iy[0]:iy[1], iz[0]:iz[1]] = True
    for b in negative:
        ix = span(xs, b.x0, b.x1)
        iy = span(ys, b.y0, b.y1)
        iz = span(zs, b.z0, b.z1)
        mat[ix[0]:ix[1], iy[0]:iy[1], iz[0]:iz[1]] = False
    if not mat.any():
        raise InvalidExtrusionError("material is empty after subtraction")

    raw: list[RawFace] = []
    for axis in range(3):
        vals = axes_pts[axis]
        others = [a for a in range(3) if a != axis]
        grids = {others[0]: axes_pts[others[0]], others[1]: axes_pts[others[1]]}
        n = mat.shape[axis]
        empty = np.zeros([mat.shape[a] for a in others], dtype=bool)
        for i in range(n + 1):
            below = np.take(mat, i - 1, axis=axis) if i > 0 else empty
            above = np.take(mat, i, axis=axis) if i < n else empty
            for sign, mask in ((+1, below & ~above), (-1, above & ~below)):
                if not mask.any():
                    continue
                ua, va = FRAMES[(axis, sign)]
                m = mask if (ua, va) == tuple(others) else mask.T
                region = Region(grids[ua], grids[va], m)
                for outer, holes in trace_region(region):
                    raw.append((axis, int(vals[i]), sign, outer, holes))
    return _finalize(raw)


def extrude_prism(
    outer: Footprint,
    z0: int,
    z1: int,
    holes: Sequence[Footprint] = (),
) -> BRepSolid:
    """Closed prism over a rectilinear polygon (optionally with holes)."""
    if z1 <= z0:
        raise InvalidExtrusionError(f"height range [{z0}, {z1}] is empty")
    pos = [Box(r.x0, r.y0, z0, r.x1, r.y1, z1) for r in decompose_rects(outer)]
    neg = [Box(r.x0, r.y0, z0, r.x1, r.y1, z1) for h in holes for r in decompose_rects(h)]
    return solid_from_boxes(pos, neg)


def _face_region(solid: BRepSolid, face: BRepFace, extra_points=()):
    loops = [[solid.vertices[i] for i in loop] for loop in face.loops()]
    loops2d = [_loop_to_2d(lp, face.axis, face.sign) for lp in loops]
    us = merged_breakpoints(
        [p[0] for lp in loops2d for p in lp], [p[0] for p in extra_points]
    )
    vs = merged_breakpoints(
        [p[1] for lp in loops2d for p in lp], [p[1] for p in extra_points]
    )
    return rasterize_loops(loops2d, us, vs)


def cut_opening(solid: BRepSolid, box: Box) -> BRepSolid:
    """Carve a rectangular opening whose box through-pierces one wall slab.

    The box's two large faces must coincide with two existing opposed faces
    and sit strictly inside their outer loops, clear of other openings; the
    cut adds one inner loop to each face plus four tunnel faces.
    """
    candidates = []
    for axis in range(3):
        ua_lo, va_lo = FRAMES[(axis, -1)]
        ua_hi, va_hi = FRAMES[(axis, +1)]
        lo_rect = (box.lo(ua_lo), box.lo(va_lo), box.hi(ua_lo), box.hi(va_lo))
        hi_rect = (box.lo(ua_hi), box.lo(va_hi), box.hi(ua_hi), box.hi(va_hi))
        lo_face = hi_face = None
        for fi, f in enumerate(solid.faces):
            if f.axis != axis:
                continue
            if f.sign == -1 and f.offset == box.lo(axis):
                corners = [(lo_rect[0], lo_rect[1]), (lo_rect[2], lo_rect[3])]
                region = _face_region(solid, f, corners)
                if region.rect_strictly_inside(*lo_rect):
                    lo_face = fi
            elif f.sign == +1 and f.offset == box.hi(axis):
                corners = [(hi_rect[0], hi_rect[1]), (hi_rect[2], hi_rect[3])]
                region = _face_region(solid, f, corners)
                if region.rect_strictly_inside(*hi_rect):
                    hi_face = fi
        if lo_face is not None and hi_face is not None:
            candidates.append((axis, lo_face, hi_face))
    if len(candidates) != 1:
        raise BooleanFailureError(
            f"opening box {box} does not pierce exactly one wall slab "
            f"({len(candidates)} candidate axes)"
        )
    axis, lo_fi, hi_fi = candidates[0]

    raw = _solid_to_raw(solid)

    def hole_loop(sign: int):
        ua, va = FRAMES[(axis, sign)]
        u0, v0 = box.lo(ua), box.lo(va)
        u1, v1 = box.hi(ua), box.hi(va)
        return [(u0, v0), (u0, v1), (u1, v1), (u1, v0)]  # CW: negative area

    raw[lo_fi][4].append(hole_loop(-1))
    raw[hi_fi][4].append(hole_loop(+1))

    b, c = [a for a in range(3) if a != axis]
    for cross, at_lo, at_hi in ((b, box.lo(b), box.hi(b)), (c, box.lo(c), box.hi(c))):
        for offset, sign in ((at_lo, +1), (at_hi, -1)):
            ua, va = FRAMES[(cross, sign)]
            lo = {axis: box.lo(axis), b: box.lo(b), c: box.lo(c)}
            hi = {axis: box.hi(axis), b: box.hi(b), c: box.hi(c)}
            loop = [
                (lo[ua], lo[va]),
                (hi[ua], lo[va]),
                (hi[ua], hi[va]),
                (lo[ua], hi[va]),
            ]
            raw.append((cross, offset, sign, loop, []))
    return _finalize(raw, solid.label)


def merge(solids: Sequence[BRepSolid]) -> BRepSolid:
    """Union solids that touch only along coincident coplanar face regions.

    Opposed face regions cancel where they coincide; same-normal regions in
    a shared plane are unioned.  Overlapping same-normal regions from two
    different solids indicate interpenetration and raise MergeConflictError.
    """
    if not solids:
        raise MergeConflictError("nothing to merge")
    planes: dict[tuple[int, int], list[tuple[int, int, RawFace]]] = {}
    for si, solid in enumerate(solids):
        for rf in _solid_to_raw(solid):
            axis, offset, sign = rf[0], rf[1], rf[2]
            planes.setdefault((axis, offset), []).append((si, sign, rf))

    raw_out: list[RawFace] = []
    for (axis, offset), entries in sorted(planes.items()):
        sources = {si for si, _, _ in entries}
        signs = {sign for _, sign, _ in entries}
        if len(sources) == 1 and len(signs) == 1:
            raw_out.extend(rf for _, _, rf in entries)
            continue
        # Work in the +1 frame; the -1 frame is the same plane with (u, v)
        # swapped, so -1 loops contribute swapped breakpoints and masks.
        pts_plus = [
            (p if sign > 0 else (p[1], p[0]))
            for _, sign, rf in entries
            for loop in (rf[3], *rf[4])
            for p in loop
        ]
        us = merged_breakpoints([p[0] for p in pts_plus])
        vs = merged_breakpoints([p[1] for p in pts_plus])
        acc = {+1: np.zeros((len(us) - 1, len(vs) - 1), dtype=bool)}
        acc[-1] = acc[+1].copy()
        acc_owner: dict[int, dict[int, np.ndarray]] = {+1: {}, -1: {}}
        for si, sign, rf in entries:
            if sign > 0:
                region = rasterize_loops([rf[3], *rf[4]], us, vs)
                mask = region.mask
            else:
                region = rasterize_loops([rf[3], *rf[4]], vs, us)
                mask = region.mask.T
            solid_mask = acc_owner[sign].setdefault(si, np.zeros_like(mask))
            solid_mask |= mask
        for sign, by_solid in acc_owner.items():
            ids = sorted(by_solid)
            for i, si in enumerate(ids):
                for sj in ids[i + 1 :]:
                    if (by_solid[si] & by_solid[sj]).any():
                        raise MergeConflictError(
                            f"solids {si} and {sj} interpenetrate in plane "
                            f"{AXIS_NAMES[axis]}={offset}"
                        )
                acc[sign] |= by_solid[si]
        plus = acc[+1] & ~acc[-1]
        minus = acc[-1] & ~acc[+1]
        for sign, mask in ((+1, plus), (-1, minus)):
            if not mask.any():
                continue
            if sign > 0:
                region = Region(us, vs, mask)
            else:
                region = Region(vs, us, mask.T)
            for outer, holes in trace_region(region):
                raw_out.append((axis, offset, sign, outer, holes))
    label = "GOOD" if all(s.label == "GOOD" for s in solids) else "DEFECT"
    return _finalize(raw_out, label)


def cut_through_slabs(
    solid: BRepSolid, rect: tuple[int, int, int, int], slabs: Sequence[tuple[int, int]]
) -> BRepSolid:
    """Remove a rectangular shaft from horizontal slabs.

    For each (z_bottom, z_top) slab the rect is subtracted from the upward
    faces at z_top and the downward faces at z_bottom, and four tunnel
    faces seal the rim.  The rect must be fully covered by faces at every
    targeted plane.
    """
    x0, y0, x1, y1 = rect
    raw = _solid_to_raw(solid)
    for zb, zt in slabs:
        for z, sign in ((zt, +1), (zb, -1)):
            keep, targets = [], []
            for rf in raw:
                (targets if rf[0] == 2 and rf[1] == z and rf[2] == sign else keep).append(rf)
            if not targets:
                raise AssemblyInconsistencyError(f"no slab face at z={z} sign={sign}")
            pts = [p for rf in targets for loop in (rf[3], *rf[4]) for p in loop]
            # Frame for +z is (x, y); for -z it is (y, x).
            if sign > 0:
                ru0, rv0, ru1, rv1 = x0, y0, x1, y1
            else:
                ru0, rv0, ru1, rv1 = y0, x0, y1, x1
            us = merged_breakpoints([p[0] for p in pts], (ru0, ru1))
            vs = merged_breakpoints([p[1] for p in pts], (rv0, rv1))
            region = Region.empty(us, vs)
            for rf in targets:
                region.mask |= rasterize_loops([rf[3], *rf[4]], us, vs).mask
            if not region.rect_filled(ru0, rv0, ru1, rv1):
                raise AssemblyInconsistencyError(
                    f"shaft rect not covered by slab faces at z={z}"
                )
            region.fill_rect(ru0, rv0, ru1, rv1, value=False)
            raw = keep
            for outer, holes in trace_region(region):
                raw.append((2, z, sign, outer, holes))
        for axis, offset, sign in ((0, x0, +1), (0, x1, -1), (1, y0, +1), (1, y1, -1)):
            ua, va = FRAMES[(axis, sign)]
            lo = {0: x0, 1: y0, 2: zb}
            hi = {0: x1, 1: y1, 2: zt}
            loop = [(lo[ua], lo[va]), (hi[ua], lo[va]), (hi[ua], hi[va]), (lo[ua], hi[va])]
            raw.append((axis, offset, sign, loop, []))
    return _finalize(raw, solid.label)


def is_watertight(solid: BRepSolid) -> tuple[bool, list[str]]:
    """Edge-manifold check: every undirected edge used twice, once per way."""
    uses: dict[tuple[int, int], list[int]] = {}
    problems: list[str] = []
    for fi, f in enumerate(solid.faces):
        for loop in f.loops():
            n = len(loop)
            if n < 4:
                problems.append(f"face {fi}: loop with {n} < 4 vertices")
            for i in range(n):
                a, b = loop[i], loop[(i + 1) % n]
                if a == b:
                    problems.append(f"face {fi}: degenerate edge at vertex {a}")
                    continue
                key = (a, b) if a < b else (b, a)
                uses.setdefault(key, []).append(1 if a < b else -1)
    for (a, b), dirs in uses.items():
        if len(dirs) != 2:
            problems.append(f"edge {a}-{b} used {len(dirs)} times")
        elif dirs[0] + dirs[1] != 0:
            problems.append(f"edge {a}-{b} traversed twice in the same direction")
    if not solid.faces:
        problems.append("solid has no faces")
    return (not problems), problems


@dataclass(frozen=True)
class TriMesh:
    """Triangulated surface in metres."""

    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64

    @property
    def areas(self) -> np.ndarray:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def triangulate(solid: BRepSolid) -> TriMesh:
    """Cell-decomposition triangulation on the solid's global grid.

    Faces are rasterized on the shared breakpoint grid so triangle edges of
    adjacent faces subdivide identically: a GOOD solid yields a closed mesh.
    """
    if not solid.faces:
        raise EmptyMeshError("solid has no faces")
    coords = np.asarray(solid.vertices, dtype=np.int64)
    axes_pts = [np.unique(coords[:, a]) for a in range(3)]
    vid: dict[tuple[int, int, int], int] = {}
    verts: list[tuple[int, int, int]] = []
    tris: list[tuple[int, int, int]] = []

    def vertex(p) -> int:
        i = vid.get(p)
        if i is None:
            i = len(verts)
            vid[p] = i
            verts.append(p)
        return i

    for f in solid.faces:
        ua, va = FRAMES[(f.axis, f.sign)]
        loops = [
            _loop_to_2d([solid.vertices[i] for i in loop], f.axis, f.sign)
            for loop in f.loops()
        ]
        region = rasterize_loops(loops, axes_pts[ua], axes_pts[va])
        us, vs = region.us, region.vs
        for iu, iv in np.argwhere(region.mask):
            u0, u1 = int(us[iu]), int(us[iu + 1])
            v0, v1 = int(vs[iv]), int(vs[iv + 1])
            quad = []
            for u, v in ((u0, v0), (u1, v0), (u1, v1), (u0, v1)):
                p = [0, 0, 0]
                p[f.axis] = f.offset
                p[ua] = u
                p[va] = v
                quad.append(vertex(tuple(p)))
            tris.append((quad[0], quad[1], quad[2]))
            tris.append((quad[0], quad[2], quad[3]))
    vertices = np.asarray(verts, dtype=np.float64) / 10.0
    return TriMesh(vertices, np.asarray(tris, dtype=np.int64))


def euler_characteristic(mesh: TriMesh) -> int:
    v = len(mesh.vertices)
    f = len(mesh.triangles)
    edges = set()
    for a, b, c in mesh.triangles:
        for p, q in ((a, b), (b, c), (c, a)):
            edges.add((min(p, q), max(p, q)))
    return v - len(edges) + f


def mesh_to_obj(mesh: TriMesh) -> str:
    """Wavefront OBJ text: v lines then 1-indexed f lines, LF endings."""
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {int(a) + 1} {int(b) + 1} {int(c) + 1}")
    return "\n".join(lines) + "\n"


def total_face_area_m2(solid: BRepSolid) -> float:
    total = 0
    for f in solid.faces:
        region = _face_region(solid, f)
        total += region.area_units()
    return total / 100.0


def drop_faces(solid: BRepSolid, indices: Iterable[int], label: str | None = None) -> BRepSolid:
    """Remove faces by index (used for defect injection); prunes orphan vertices."""
    drop = set(indices)
    kept = [f for i, f in enumerate(solid.faces) if i not in drop]
    used = sorted({i for f in kept for loop in f.loops() for i in loop})
    remap = {old: new for new, old in enumerate(used)}
    faces = tuple(
        BRepFace(
            f.axis,
            f.offset,
            f.sign,
            tuple(remap[i] for i in f.outer),
            tuple(tuple(remap[i] for i in h) for h in f.inner),
        )
        for f in kept
    )
    vertices = tuple(solid.vertices[i] for i in used)
    return BRepSolid(vertices, faces, label if label is not None else solid.label)
