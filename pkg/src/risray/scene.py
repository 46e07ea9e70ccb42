"""Environment geometry: planar facets with materials, JSON loading, and a
parametric factory-hall generator (shell walls plus rows of storage racks).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class SceneError(ValueError):
    """Raised for malformed or inconsistent scene definitions."""


def _as_point(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise SceneError(f"{name} must be a finite 3-vector, got {value!r}")
    return arr


@dataclass
class Material:
    """Facet material: Fresnel parameters plus a flat per-traversal loss.

    eps_r is the relative permittivity (>= 1), sigma the conductivity in S/m,
    trans_loss_db the attenuation applied each time a ray passes through a
    facet of this material.
    """

    id: str
    eps_r: float
    sigma: float = 0.0
    trans_loss_db: float = 0.0

    def __post_init__(self):
        if not self.id:
            raise SceneError("material id must be non-empty")
        if not (self.eps_r >= 1.0):
            raise SceneError(f"material {self.id!r}: eps_r must be >= 1, got {self.eps_r}")
        if self.sigma < 0.0:
            raise SceneError(f"material {self.id!r}: sigma must be >= 0, got {self.sigma}")
        if self.trans_loss_db < 0.0:
            raise SceneError(
                f"material {self.id!r}: trans_loss_db must be >= 0, got {self.trans_loss_db}"
            )


@dataclass
class Surface:
    """Rectangular facet spanned by two perpendicular edge vectors.

    Points on the facet are origin + s*edge_u + t*edge_v for s, t in [0, 1].
    The unit normal is normalize(edge_u x edge_v); facets reflect on both sides.
    """

    origin: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    material_id: str

    def __post_init__(self):
        self.origin = _as_point(self.origin, "surface origin")
        self.edge_u = _as_point(self.edge_u, "surface edge_u")
        self.edge_v = _as_point(self.edge_v, "surface edge_v")
        lu = float(np.linalg.norm(self.edge_u))
        lv = float(np.linalg.norm(self.edge_v))
        if lu == 0.0 or lv == 0.0:
            raise SceneError("surface has a zero-length edge")
        if abs(float(np.dot(self.edge_u, self.edge_v))) >= 1e-9 * lu * lv:
            raise SceneError("surface edges must be perpendicular")

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.edge_u, self.edge_v)
        return n / np.linalg.norm(n)

    @property
    def area(self) -> float:
        return float(np.linalg.norm(self.edge_u) * np.linalg.norm(self.edge_v))

    def corners(self) -> np.ndarray:
        o, u, v = self.origin, self.edge_u, self.edge_v
        return np.array([o, o + u, o + u + v, o + v])


@dataclass
class Scene:
    """Immutable propagation environment: facets plus a material table.

    Safe to share read-only across parallel workers; do not mutate after
    construction.
    """

    surfaces: list[Surface]
    materials: dict[str, Material]
    bounds: tuple[np.ndarray, np.ndarray] = field(init=False)

    def __post_init__(self):
        for i, s in enumerate(self.surfaces):
            if s.material_id not in self.materials:
                raise SceneError(
                    f"surface {i} references unknown material {s.material_id!r}"
                )
        if self.surfaces:
            corners = np.concatenate([s.corners() for s in self.surfaces])
            self.bounds = (corners.min(axis=0), corners.max(axis=0))
        else:
            self.bounds = (np.zeros(3), np.zeros(3))
        self._pack = None  # lazy kernel-array cache, see risray.kernels

    def material_of(self, surface_index: int) -> Material:
        return self.materials[self.surfaces[surface_index].material_id]

    def to_json(self) -> str:
        """Serialize deterministically (sorted keys, repr floats)."""
        doc = {
            "materials": [
                {
                    "id": m.id,
                    "eps_r": m.eps_r,
                    "sigma": m.sigma,
                    "trans_loss_db": m.trans_loss_db,
                }
                for m in sorted(self.materials.values(), key=lambda m: m.id)
            ],
            "surfaces": [
                {
                    "origin": list(s.origin),
                    "u": list(s.edge_u),
                    "v": list(s.edge_v),
                    "material": s.material_id,
                }
                for s in self.surfaces
            ],
        }
        return json.dumps(doc, sort_keys=True)


DEFAULT_MATERIALS = {
    # Invented stand-ins; per-traversal losses are the knob that sets the
    # deep-shadow floor behind the racks.
    "concrete": Material("concrete", eps_r=5.31, sigma=0.066, trans_loss_db=12.0),
    "metal": Material("metal", eps_r=1.0, sigma=1.0e7, trans_loss_db=10.0),
}


@dataclass
class FactoryParams:
    """Parametric factory hall: shell at wall_h plus rack boxes at rack_h.

    Racks are laid out in rack_rows rows along y, racks_per_row boxes along x,
    centered on the floor with aisle_w gaps. All dimensions in meters.
    """

    floor_w: float = 60.0
    floor_l: float = 40.0
    wall_h: float = 5.0
    rack_h: float = 4.4
    rack_rows: int = 3
    racks_per_row: int = 5
    rack_w: float = 6.0
    rack_l: float = 2.0
    aisle_w: float = 4.0
    wall_material: str = "concrete"
    rack_material: str = "metal"

    def __post_init__(self):
        dims = {
            "floor_w": self.floor_w,
            "floor_l": self.floor_l,
            "wall_h": self.wall_h,
            "rack_h": self.rack_h,
            "rack_w": self.rack_w,
            "rack_l": self.rack_l,
            "aisle_w": self.aisle_w,
        }
        for name, value in dims.items():
            if not (value > 0.0):
                raise SceneError(f"factory {name} must be > 0, got {value}")
        if self.rack_rows < 0 or self.racks_per_row < 0:
            raise SceneError("rack counts must be >= 0")


def _rect(origin, u, v, material_id) -> Surface:
    return Surface(np.asarray(origin, float), np.asarray(u, float),
                   np.asarray(v, float), material_id)


def _box_faces(x0, y0, x1, y1, height, material_id) -> list[Surface]:
    # 4 side faces + top; bottom omitted (flush with floor, avoids a
    # coincident-plane ambiguity in the tracer).
    dx, dy = x1 - x0, y1 - y0
    return [
        _rect((x0, y0, 0.0), (dx, 0, 0), (0, 0, height), material_id),   # south
        _rect((x0, y1, 0.0), (dx, 0, 0), (0, 0, height), material_id),   # north
        _rect((x0, y0, 0.0), (0, dy, 0), (0, 0, height), material_id),   # west
        _rect((x1, y0, 0.0), (0, dy, 0), (0, 0, height), material_id),   # east
        _rect((x0, y0, height), (dx, 0, 0), (0, dy, 0), material_id),    # top
    ]


def build_factory(params: FactoryParams | None = None,
                  materials: dict[str, Material] | None = None) -> Scene:
    """Generate the factory scene. Pure: equal params give a byte-identical
    scene serialization."""
    if params is None:
        params = FactoryParams()
    mats = dict(DEFAULT_MATERIALS) if materials is None else dict(materials)
    for mid in (params.wall_material, params.rack_material):
        if mid not in mats:
            raise SceneError(f"factory references unknown material {mid!r}")

    w, l, h = params.floor_w, params.floor_l, params.wall_h
    wall = params.wall_material
    surfaces = [
        _rect((0, 0, 0), (w, 0, 0), (0, 0, h), wall),      # south wall y=0
        _rect((0, l, 0), (w, 0, 0), (0, 0, h), wall),      # north wall y=l
        _rect((0, 0, 0), (0, l, 0), (0, 0, h), wall),      # west wall x=0
        _rect((w, 0, 0), (0, l, 0), (0, 0, h), wall),      # east wall x=w
        _rect((0, 0, 0), (w, 0, 0), (0, l, 0), wall),      # floor
        _rect((0, 0, h), (w, 0, 0), (0, l, 0), wall),      # ceiling
    ]

    rows, per_row = params.rack_rows, params.racks_per_row
    if rows > 0 and per_row > 0:
        block_w = per_row * params.rack_w + (per_row - 1) * params.aisle_w
        block_l = rows * params.rack_l + (rows - 1) * params.aisle_w
        if block_w > w - 2 * params.aisle_w or block_l > l - 2 * params.aisle_w:
            raise SceneError(
                "rack block does not fit inside the floor with perimeter aisles: "
                f"{block_w:.2f} x {block_l:.2f} m in {w:.2f} x {l:.2f} m"
            )
        x_start = (w - block_w) / 2.0
        y_start = (l - block_l) / 2.0
        pitch_x = params.rack_w + params.aisle_w
        pitch_y = params.rack_l + params.aisle_w
        boxes = []
        for r in range(rows):
            for c in range(per_row):
                x0 = x_start + c * pitch_x
                y0 = y_start + r * pitch_y
                boxes.append((x0, y0, x0 + params.rack_w, y0 + params.rack_l))
        for (x0, y0, x1, y1) in boxes:
            for (a0, b0, a1, b1) in boxes:
                if (a0, b0) == (x0, y0):
                    continue
                if x0 < a1 and a0 < x1 and y0 < b1 and b0 < y1:
                    raise SceneError("rack layout produced overlapping boxes")
        for (x0, y0, x1, y1) in boxes:
            surfaces.extend(_box_faces(x0, y0, x1, y1, params.rack_h,
                                       params.rack_material))

    return Scene(surfaces=surfaces, materials=mats)


def _factory_params_from_dict(doc: dict) -> tuple[FactoryParams, dict[str, Material] | None]:
    fields = {k: doc[k] for k in (
        "floor_w", "floor_l", "wall_h", "rack_h", "rack_rows", "racks_per_row",
        "rack_w", "rack_l", "aisle_w", "wall_material", "rack_material",
    ) if k in doc}
    materials = None
    if "materials" in doc:
        materials = {m["id"]: Material(m["id"], m["eps_r"], m.get("sigma", 0.0),
                                       m.get("trans_loss_db", 0.0))
                     for m in doc["materials"]}
    return FactoryParams(**fields), materials


def scene_from_dict(doc: dict) -> Scene:
    """Build a Scene from a parsed scene document.

    Accepts either explicit geometry ("materials" + "surfaces" keys) or a
    parametric factory ("factory" key).
    """
    if "factory" in doc:
        params, materials = _factory_params_from_dict(doc["factory"])
        return build_factory(params, materials)
    try:
        materials = {m["id"]: Material(m["id"], m["eps_r"], m.get("sigma", 0.0),
                                       m.get("trans_loss_db", 0.0))
                     for m in doc["materials"]}
        surfaces = [Surface(s["origin"], s["u"], s["v"], s["material"])
                    for s in doc["surfaces"]]
    except KeyError as exc:
        raise SceneError(f"scene document missing key {exc}") from exc
    return Scene(surfaces=surfaces, materials=materials)


def load_scene(document: str) -> Scene:
    """Parse and validate a JSON scene document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneError("scene document must be a JSON object")
    return scene_from_dict(doc)


def load_scene_file(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scene(fh.read())
