"""Geometry kernel dispatch.

Packs a Scene into flat float64 arrays and routes the hot operations
(specular-path enumeration, segment blocking) to either the compiled
backend (risray._geom_cy) or the vectorized numpy fallback
(risray._geom_py). Selection happens once, at first use:

    RISRAY_BACKEND = auto (default) | python | cython

Both backends are kept numerically identical (same arithmetic, same
association, no fused reductions), so results do not depend on which one
is active.
"""

from __future__ import annotations

import os

import numpy as np

from . import _geom_py
from .scene import Scene

EDGE_EPS = _geom_py.EDGE_EPS

_active = None  # (module, name), settled lazily


def _load_cython():
    from . import _geom_cy  # ImportError if the extension was not built

    return _geom_cy, "cython"


def _select():
    global _active
    if _active is None:
        choice = os.environ.get("RISRAY_BACKEND", "auto").strip().lower() or "auto"
        if choice == "python":
            _active = (_geom_py, "python")
        elif choice == "cython":
            _active = _load_cython()
        elif choice == "auto":
            try:
                _active = _load_cython()
            except ImportError:
                _active = (_geom_py, "python")
        else:
            raise ValueError(
                f"RISRAY_BACKEND must be auto, python or cython, got {choice!r}"
            )
    return _active


def backend_name() -> str:
    """Name of the active geometry backend ('python' or 'cython')."""
    return _select()[1]


def use_backend(name: str | None) -> None:
    """Force a backend ('python'/'cython'), or None to re-select from the
    environment. Intended for tests and benchmarks."""
    global _active
    if name is None:
        _active = None
    elif name == "python":
        _active = (_geom_py, "python")
    elif name == "cython":
        _active = _load_cython()
    else:
        raise ValueError(f"unknown backend {name!r}")


class ScenePack:
    """Flat array view of a Scene consumed by the geometry backends.

    su_eps/sv_eps are EDGE_EPS expressed in the facet's (s, t) parameter
    units, so facet tests carry a metric 1e-9 m tolerance regardless of
    facet size.
    """

    def __init__(self, scene: Scene):
        n = len(scene.surfaces)
        self.n_surfaces = n
        origin = np.empty((n, 3))
        eu = np.empty((n, 3))
        ev = np.empty((n, 3))
        trans = np.empty(n)
        for i, s in enumerate(scene.surfaces):
            origin[i] = s.origin
            eu[i] = s.edge_u
            ev[i] = s.edge_v
            trans[i] = scene.materials[s.material_id].trans_loss_db
        cross = np.cross(eu, ev) if n else np.empty((n, 3))
        norms = np.linalg.norm(cross, axis=1) if n else np.empty(n)
        normal = cross / norms[:, None] if n else cross
        lu = np.linalg.norm(eu, axis=1) if n else np.empty(n)
        lv = np.linalg.norm(ev, axis=1) if n else np.empty(n)

        asc = np.ascontiguousarray
        self.origin = asc(origin)
        self.eu = asc(eu)
        self.ev = asc(ev)
        self.normal = asc(normal)
        self.plane_d = asc(
            origin[:, 0] * normal[:, 0]
            + origin[:, 1] * normal[:, 1]
            + origin[:, 2] * normal[:, 2]
        )
        self.inv_uu = asc(1.0 / (lu * lu))
        self.inv_vv = asc(1.0 / (lv * lv))
        self.su_eps = asc(EDGE_EPS / lu)
        self.sv_eps = asc(EDGE_EPS / lv)
        self.trans_loss_db = asc(trans)


def pack_scene(scene: Scene) -> ScenePack:
    pack = getattr(scene, "_pack", None)
    if pack is None:
        pack = ScenePack(scene)
        scene._pack = pack
    return pack


def _point(p) -> np.ndarray:
    return np.ascontiguousarray(p, dtype=np.float64)


def enumerate_specular(scene: Scene, tx, rx, max_order: int,
                       check_blocking: bool = True):
    """Enumerate valid specular paths up to max_order reflections.

    Returns (orders, surfs, points): per-path reflection counts, the
    flattened surface-index tuples, and the flattened reflection points.
    Path order is deterministic: reflection count ascending, then
    lexicographic surface tuple. With check_blocking, paths whose segments
    cross any other facet interior are dropped; without it every
    geometrically valid path is kept (crossings become transmissions
    downstream).
    """
    mod, _ = _select()
    return mod.enumerate_specular(pack_scene(scene), _point(tx), _point(rx),
                                  int(max_order), bool(check_blocking))


def any_crossing(scene: Scene, a, b) -> bool:
    """True if segment (a, b) crosses any facet interior; endpoint contact
    within EDGE_EPS does not count."""
    mod, _ = _select()
    return bool(mod.any_crossing(pack_scene(scene), _point(a), _point(b), -1, -1))


def segment_crossings(pack: ScenePack, a, b, excl_a: int = -1, excl_b: int = -1):
    """Facet-interior crossings of segment (a, b), sorted along the segment.

    Returns (surface_indices, t_values). excl_a/excl_b suppress the facets
    the endpoints sit on (adjacent reflection surfaces). Shared between
    backends: it only runs on final paths, outside the hot loop.
    """
    a = _point(a)
    b = _point(b)
    n = pack.normal
    if pack.n_surfaces == 0:
        return np.empty(0, dtype=np.intp), np.empty(0)
    da = a[0] * n[:, 0] + a[1] * n[:, 1] + a[2] * n[:, 2] - pack.plane_d
    db = b[0] * n[:, 0] + b[1] * n[:, 1] + b[2] * n[:, 2] - pack.plane_d
    hit = da * db < 0.0
    if excl_a >= 0:
        hit[excl_a] = False
    if excl_b >= 0:
        hit[excl_b] = False
    if not hit.any():
        return np.empty(0, dtype=np.intp), np.empty(0)
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    dz = b[2] - a[2]
    seg_len = np.sqrt(dx * dx + dy * dy + dz * dz)
    tmin = EDGE_EPS / seg_len
    denom = np.where(hit, da - db, 1.0)
    t = da / denom
    hit &= (t > tmin) & (t < 1.0 - tmin)
    px = a[0] + t * dx
    py = a[1] + t * dy
    pz = a[2] + t * dz
    ex = px - pack.origin[:, 0]
    ey = py - pack.origin[:, 1]
    ez = pz - pack.origin[:, 2]
    eu, ev = pack.eu, pack.ev
    s = (ex * eu[:, 0] + ey * eu[:, 1] + ez * eu[:, 2]) * pack.inv_uu
    tt = (ex * ev[:, 0] + ey * ev[:, 1] + ez * ev[:, 2]) * pack.inv_vv
    se, te = pack.su_eps, pack.sv_eps
    hit &= (s > se) & (s < 1.0 - se) & (tt > te) & (tt < 1.0 - te)
    idx = np.nonzero(hit)[0]
    order = np.lexsort((idx, t[idx]))
    idx = idx[order]
    return idx, t[idx]
