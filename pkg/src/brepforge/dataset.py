"""Dataset plumbing: room filters, metadata records, file exports, statistics.

Exports are byte-stable: canonical JSON key order, compact separators, and
shortest-roundtrip float formatting.  The dataset matrix is written as an
NPY v1.0 file by a self-contained writer (header layout pinned here; any
standard reader recovers the float64 matrix bit-exactly).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .brep import AXIS_NAMES, BRepFace, BRepSolid, is_watertight, mesh_to_obj, triangulate
from .geom2d import to_units

META_COLUMNS = 14  # storey_count, room_total, avg_room_area, footprint_area, per-floor 1..10


@dataclass(frozen=True)
class FilterConfig:
    """Room-level acceptance thresholds (metres / m²)."""

    min_room_area: float = 8.0
    max_room_area: float = 80.0
    min_room_side: float = 2.0
    max_aspect_ratio: float = 4.0


@dataclass
class BuildingMeta:
    id: str
    seed: int
    storey_count: int
    room_total: int
    room_per_floor: list[int]  # zero-padded to 10 entries
    rooms: list[list[list[float]]]  # per storey: [width_m, height_m] per room
    openings: list[dict]
    avg_room_area: float
    footprint_area: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "seed": self.seed,
            "storey_count": self.storey_count,
            "room_total": self.room_total,
            "room_per_floor": self.room_per_floor,
            "rooms": self.rooms,
            "openings": self.openings,
            "avg_room_area": self.avg_room_area,
            "footprint_area": self.footprint_area,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BuildingMeta":
        return cls(
            id=d["id"],
            seed=d["seed"],
            storey_count=d["storey_count"],
            room_total=d["room_total"],
            room_per_floor=list(d["room_per_floor"]),
            rooms=d["rooms"],
            openings=d["openings"],
            avg_room_area=d["avg_room_area"],
            footprint_area=d["footprint_area"],
        )


@dataclass
class DatasetMeta:
    records: list[BuildingMeta] = field(default_factory=list)
    discard_log: list[tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "discards": [{"seed": s, "reason": r} for s, r in self.discard_log],
        }


DISCARD_REASONS = ("growth-failed", "boolean-failure", "room-filter", "unreachable-room")


def check_rooms(meta: BuildingMeta, cfg: FilterConfig) -> tuple[bool, list[str]]:
    """Validate every room instance against the filter thresholds."""
    violations = []
    for storey, rooms in enumerate(meta.rooms, start=1):
        for i, (w, h) in enumerate(rooms):
            area = w * h
            lo, hi = min(w, h), max(w, h)
            if not (cfg.min_room_area <= area <= cfg.max_room_area):
                violations.append(
                    f"storey {storey} room {i}: area {area:.2f} outside "
                    f"[{cfg.min_room_area}, {cfg.max_room_area}]"
                )
            if lo < cfg.min_room_side:
                violations.append(f"storey {storey} room {i}: side {lo:.2f} below {cfg.min_room_side}")
            if hi / lo > cfg.max_aspect_ratio:
                violations.append(
                    f"storey {storey} room {i}: aspect {hi / lo:.2f} above {cfg.max_aspect_ratio}"
                )
    return (not violations), violations


def check_solid(solid: BRepSolid) -> tuple[bool, list[str]]:
    return is_watertight(solid)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def solid_to_dict(solid: BRepSolid, building_id: str) -> dict:
    faces = []
    for f in solid.faces:
        entry = {
            "plane": {"normal": f.normal_name, "offset": f.offset / 10.0},
            "outer": list(f.outer),
        }
        if f.inner:
            entry["inner"] = [list(h) for h in f.inner]
        faces.append(entry)
    return {
        "id": building_id,
        "units": "m",
        "vertices": [[x / 10.0, y / 10.0, z / 10.0] for x, y, z in solid.vertices],
        "faces": faces,
        "label": solid.label,
    }


def solid_from_dict(d: dict) -> BRepSolid:
    vertices = tuple(
        (to_units(x), to_units(y), to_units(z)) for x, y, z in d["vertices"]
    )
    faces = []
    for f in d["faces"]:
        normal = f["plane"]["normal"]
        sign = +1 if normal[0] == "+" else -1
        axis = AXIS_NAMES.index(normal[1])
        faces.append(
            BRepFace(
                axis=axis,
                offset=to_units(f["plane"]["offset"]),
                sign=sign,
                outer=tuple(f["outer"]),
                inner=tuple(tuple(h) for h in f.get("inner", [])),
            )
        )
    return BRepSolid(vertices, tuple(faces), d.get("label", "GOOD"))


def export_building(building, out_dir: Path, write_obj: bool = False) -> list[Path]:
    """Write <id>.brep.json and <id>.meta.json (optionally <id>.obj)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = building.meta
    paths = []
    brep_path = out_dir / f"{meta.id}.brep.json"
    brep_path.write_text(canonical_json(solid_to_dict(building.solid, meta.id)) + "\n")
    paths.append(brep_path)
    meta_path = out_dir / f"{meta.id}.meta.json"
    meta_path.write_text(canonical_json(meta.to_dict()) + "\n")
    paths.append(meta_path)
    if write_obj:
        obj_path = out_dir / f"{meta.id}.obj"
        obj_path.write_text(mesh_to_obj(triangulate(building.solid)))
        paths.append(obj_path)
    return paths


def meta_matrix(ds: DatasetMeta) -> np.ndarray:
    rows = []
    for r in ds.records:
        rows.append(
            [r.storey_count, r.room_total, r.avg_room_area, r.footprint_area]
            + list(r.room_per_floor)
        )
    return np.asarray(rows, dtype="<f8")


def write_meta_npy(ds: DatasetMeta, path: Path) -> None:
    """NPY v1.0 writer: magic, version (1, 0), padded header, C-order f8 data."""
    if not ds.records:
        raise ValueError("refusing to write an empty dataset matrix")
    matrix = meta_matrix(ds)
    header = (
        "{'descr': '<f8', 'fortran_order': False, "
        f"'shape': {matrix.shape!r}, }}"
    )
    base = 6 + 2 + 2  # magic + version + header-length field
    pad = (64 - (base + len(header) + 1) % 64) % 64
    header = header + " " * pad + "\n"
    with open(path, "wb") as fh:
        fh.write(b"\x93NUMPY")
        fh.write(bytes([1, 0]))
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(matrix.tobytes(order="C"))


def write_dataset_meta(ds: DatasetMeta, path: Path) -> None:
    Path(path).write_text(canonical_json(ds.to_dict()) + "\n")


def load_dataset_meta(path: Path) -> DatasetMeta:
    d = json.loads(Path(path).read_text())
    return DatasetMeta(
        records=[BuildingMeta.from_dict(r) for r in d["records"]],
        discard_log=[(e["seed"], e["reason"]) for e in d["discards"]],
    )


def write_discards_csv(ds: DatasetMeta, path: Path) -> None:
    lines = ["seed,reason"] + [f"{s},{r}" for s, r in ds.discard_log]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class StatsReport:
    storey_hist: dict[int, int]
    room_area_hist: dict[int, int]  # 1 m² bins keyed by floor(area)
    footprint_hist: dict[int, int]  # 10 m² bins keyed by bin start
    room_area_mode: float  # centre of the modal 1 m² bin
    footprint_mode: float  # centre of the modal 10 m² bin

    def text(self) -> str:
        lines = ["storey histogram:"]
        for k in range(2, 11):
            lines.append(f"  {k:2d}: {self.storey_hist.get(k, 0)}")
        lines.append(f"room-area mode: {self.room_area_mode:.1f} m^2")
        lines.append(f"floor-area mode: {self.footprint_mode:.1f} m^2")
        return "\n".join(lines)

    def csv_rows(self) -> dict[str, list[str]]:
        return {
            "storeys": ["storeys,count"]
            + [f"{k},{v}" for k, v in sorted(self.storey_hist.items())],
            "room_area": ["bin_start_m2,count"]
            + [f"{k},{v}" for k, v in sorted(self.room_area_hist.items())],
            "footprint_area": ["bin_start_m2,count"]
            + [f"{k},{v}" for k, v in sorted(self.footprint_hist.items())],
        }


def stats(ds: DatasetMeta) -> StatsReport:
    if not ds.records:
        raise ValueError("no records to summarize")
    storey_hist: dict[int, int] = {}
    room_hist: dict[int, int] = {}
    fp_hist: dict[int, int] = {}
    for r in ds.records:
        storey_hist[r.storey_count] = storey_hist.get(r.storey_count, 0) + 1
        for rooms in r.rooms:
            for w, h in rooms:
                b = int(w * h)
                room_hist[b] = room_hist.get(b, 0) + 1
        fb = int(r.footprint_area // 10) * 10
        fp_hist[fb] = fp_hist.get(fb, 0) + 1
    room_mode = sorted(room_hist, key=lambda k: (-room_hist[k], k))[0]
    fp_mode = sorted(fp_hist, key=lambda k: (-fp_hist[k], k))[0]
    return StatsReport(
        storey_hist=storey_hist,
        room_area_hist=room_hist,
        footprint_hist=fp_hist,
        room_area_mode=room_mode + 0.5,
        footprint_mode=fp_mode + 5.0,
    )
