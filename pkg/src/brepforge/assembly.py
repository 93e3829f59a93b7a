"""Building assembly: tiered storey stacking, slabs, atrium, entrance.

Storey k (bottom = 1) of an S-storey building reuses growth snapshot
S - k + 1, so the ground floor carries the most rooms and each floor above
drops exactly one — the per-floor pattern (S, S-1, ..., 1) that also
serves as the dataset's label oracle.  Every storey is a full-height prism
over its offset footprint with room voids, opening boxes, and a top slab;
solids merge into one body and the core shaft is opened through all slabs
above ground level.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .brep import Box, BRepSolid, cut_through_slabs, merge, solid_from_boxes
from .dataset import BuildingMeta
from .errors import (
    AssemblyInconsistencyError,
    BooleanFailureError,
    GrowthFailedError,
)
from .geom2d import Footprint, Rect, decompose_rects, offset_loop, polygon_area
from .grammar import GrowthTrace
from .rng import SeededRng
from .storey import (
    Opening,
    StoreyPlan,
    WallSegment,
    WindowTable,
    build_walls,
    generate_windows,
    place_doors,
    prune_windows,
)


@dataclass(frozen=True)
class BuildingConfig:
    """Vertical dimensions and entrance/slab rules in grid units of 0.1 m."""

    storey_height: int = 30
    slab_thickness: int = 2
    wall_thickness: int = 2
    ground_offset: int = 30
    entrance_min_wall: int = 40
    entrance_width: int = 12
    entrance_height: int = 24
    window_table: WindowTable = WindowTable()

    def __post_init__(self):
        if self.wall_thickness % 2:
            raise ValueError("wall thickness must be an even number of grid units")
        if self.slab_thickness >= self.storey_height:
            raise ValueError("slab thicker than the storey")


@dataclass
class Building:
    storeys: list[StoreyPlan]  # bottom to top
    solid: BRepSolid
    meta: BuildingMeta
    config: BuildingConfig


def order_storeys(trace: GrowthTrace) -> list[tuple[Footprint, list[Rect]]]:
    """Bottom-up (snapshot, rooms) pairs under the tiered-setback rule."""
    s = len(trace.snapshots)
    if s < 2:
        raise GrowthFailedError("need at least 2 snapshots to stack storeys")
    out = []
    for k in range(1, s + 1):
        idx = s - k  # snapshot s-k+1, zero-based
        out.append((trace.snapshots[idx], list(trace.rooms[: idx + 1])))
    return out


def build_storey_plan(
    snapshot: Footprint, rooms: list[Rect], core: Rect, config: BuildingConfig
) -> StoreyPlan:
    plan = StoreyPlan(
        footprint=snapshot,
        rooms=rooms,
        core=core,
        storey_height=config.storey_height,
    )
    plan.walls = build_walls(snapshot, rooms, core, config.wall_thickness)
    doors = place_doors(plan)
    windows = generate_windows(plan, config.window_table)
    plan.openings = doors + windows
    plan.openings = prune_windows(plan)
    return plan


def _centroid_numerators(f: Footprint) -> tuple[int, int, int]:
    """(Sx, Sy, area2) with centroid = (Sx, Sy) / (3 * area2), exact."""
    sx = sy = 0
    v = f.vertices
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        cross = a.x * b.y - b.x * a.y
        sx += (a.x + b.x) * cross
        sy += (a.y + b.y) * cross
    return sx, sy, f.area_units2()


def place_entrance(plan: StoreyPlan, config: BuildingConfig) -> Opening:
    """Entrance on the exterior wall nearest the footprint centroid.

    Walls longer than the minimum are preferred; with none, all exterior
    walls compete.  Distance comparison is exact integer arithmetic and
    ties break toward the lowest wall id.
    """
    exterior = [w for w in plan.walls if w.kind == "exterior"]
    if not exterior:
        raise AssemblyInconsistencyError("storey has no exterior walls")
    # A selected wall must host the opening with one unit of clearance at
    # each end, or its box would touch the perpendicular wall's corner.
    fits = [w for w in exterior if w.length >= config.entrance_width + 2]
    if not fits:
        raise AssemblyInconsistencyError("no exterior wall can host the entrance")
    candidates = [w for w in fits if w.length > config.entrance_min_wall]
    if not candidates:
        candidates = fits
    sx, sy, area2 = _centroid_numerators(plan.footprint)

    def distance_key(w: WallSegment):
        mx2, my2 = w.midpoint2()
        dx = 3 * area2 * mx2 - 2 * sx
        dy = 3 * area2 * my2 - 2 * sy
        return (dx * dx + dy * dy, w.wall_id)

    wall = min(candidates, key=distance_key)
    offset = (wall.length - config.entrance_width) // 2
    return Opening(
        wall.wall_id, "entrance", offset, config.entrance_width, 0, config.entrance_height
    )


def _opening_box(plan: StoreyPlan, opening: Opening, z_base: int, z_wall_top: int, t_half: int) -> Box:
    wall = plan.wall_by_id(opening.wall_id)
    z0 = z_base + opening.sill
    z1 = z0 + opening.height
    if z1 > z_wall_top or opening.offset < 0 or opening.offset + opening.width > wall.length:
        # Guards misconfigured window tables; walls end at the slab soffit.
        raise BooleanFailureError(f"opening {opening} does not fit wall {wall.wall_id}")
    if wall.along_y:
        y0 = wall.p1.y + opening.offset
        return Box(wall.p1.x - t_half, y0, z0, wall.p1.x + t_half, y0 + opening.width, z1)
    x0 = wall.p1.x + opening.offset
    return Box(x0, wall.p1.y - t_half, z0, x0 + opening.width, wall.p1.y + t_half, z1)


def storey_solid(plan: StoreyPlan, level: int, config: BuildingConfig) -> BRepSolid:
    """Watertight storey chunk: walls plus its top slab, voids open downward."""
    t_half = config.wall_thickness // 2
    zb = (level - 1) * config.storey_height
    zt = level * config.storey_height - config.slab_thickness
    z_top = level * config.storey_height
    dilated, _ = offset_loop(plan.footprint, t_half)
    positive = [Box(r.x0, r.y0, zb, r.x1, r.y1, z_top) for r in decompose_rects(dilated)]
    negative = []
    for rect in [plan.core] + plan.rooms:
        void = rect.eroded(t_half)
        negative.append(Box(void.x0, void.y0, zb, void.x1, void.y1, zt))
    for opening in plan.openings:
        negative.append(_opening_box(plan, opening, zb, zt, t_half))
    return solid_from_boxes(positive, negative)


def ground_slab(trace: GrowthTrace, config: BuildingConfig) -> BRepSolid:
    """Ground plane: the footprint bounding box dilated outward, extruded down."""
    bbox = trace.snapshots[-1].bbox().dilated(config.ground_offset)
    return solid_from_boxes(
        [Box(bbox.x0, bbox.y0, -config.slab_thickness, bbox.x1, bbox.y1, 0)]
    )


def cut_atrium(building: Building) -> Building:
    """Open the core shaft through every inter-storey slab and the roof.

    The ground slab stays closed; the shaft rectangle is the core interior,
    which the wall offset keeps strictly inside every slab face.
    """
    config = building.config
    core = building.storeys[0].core
    shaft = core.eroded(config.wall_thickness // 2)
    slabs = [
        (k * config.storey_height - config.slab_thickness, k * config.storey_height)
        for k in range(1, len(building.storeys) + 1)
    ]
    solid = cut_through_slabs(building.solid, (shaft.x0, shaft.y0, shaft.x1, shaft.y1), slabs)
    return replace(building, solid=solid)


def _building_meta(
    building_id: str,
    seed: int,
    trace: GrowthTrace,
    plans: list[StoreyPlan],
) -> BuildingMeta:
    s = len(plans)
    room_per_floor = [max(s - k, 0) for k in range(10)]
    room_total = s * (s + 1) // 2
    rooms = [
        [[r.width / 10.0, r.height / 10.0] for r in plan.rooms] for plan in plans
    ]
    openings = []
    for storey_idx, plan in enumerate(plans, start=1):
        for o in plan.openings:
            wall = plan.wall_by_id(o.wall_id)
            openings.append(
                {
                    "kind": o.kind,
                    "orientation": wall.orientation,
                    "width": o.width / 10.0,
                    "sill": o.sill / 10.0,
                    "height": o.height / 10.0,
                    "storey": storey_idx,
                }
            )
    total_area = sum(r.area_m2 for plan in plans for r in plan.rooms)
    return BuildingMeta(
        id=building_id,
        seed=seed,
        storey_count=s,
        room_total=room_total,
        room_per_floor=room_per_floor,
        rooms=rooms,
        openings=openings,
        avg_room_area=total_area / room_total,
        footprint_area=polygon_area(trace.snapshots[-1]),
    )


def assemble(trace: GrowthTrace, config: BuildingConfig, rng: SeededRng) -> Building:
    """Full building: plans, entrance, storey solids, merge, atrium, metadata."""
    plans = [
        build_storey_plan(snapshot, rooms, trace.core, config)
        for snapshot, rooms in order_storeys(trace)
    ]
    ground_plan = plans[0]
    entrance = place_entrance(ground_plan, config)
    wall = ground_plan.wall_by_id(entrance.wall_id)
    lo, hi = entrance.offset, entrance.offset + entrance.width
    kept = []
    for o in ground_plan.openings:
        if o.kind == "window" and o.wall_id == entrance.wall_id:
            # Entrance owns its façade strip; drop windows within one unit.
            if o.offset < hi + 1 and lo < o.offset + o.width + 1:
                continue
        kept.append(o)
    ground_plan.openings = kept + [entrance]

    solids = [ground_slab(trace, config)]
    solids += [storey_solid(plan, k, config) for k, plan in enumerate(plans, start=1)]
    merged = merge(solids)
    building = Building(
        storeys=plans,
        solid=merged,
        meta=_building_meta(f"bld{rng.stream:08d}", rng.stream, trace, plans),
        config=config,
    )
    return cut_atrium(building)
