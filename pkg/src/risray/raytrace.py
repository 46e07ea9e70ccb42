"""Deterministic multipath finder.

Image-method enumeration of direct, specular-reflection and (optionally)
straight-line transmission paths between two points. No diffraction, no
diffuse scattering: through-facet leakage is represented only by the
transmission option, which attenuates without bending the ray.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import SPEED_OF_LIGHT
from .scene import Scene, Surface

MAX_REFLECTION_CAP = 3


class ReflectionCapError(ValueError):
    """max_reflections beyond the supported hard cap."""


@dataclass(frozen=True)
class Interaction:
    """One ray-surface event, in path order."""

    kind: str  # "reflection" | "transmission"
    surface_index: int
    point: np.ndarray


@dataclass(frozen=True)
class PropagationPath:
    tx: np.ndarray
    rx: np.ndarray
    interactions: tuple[Interaction, ...]
    length: float
    delay: float
    departure_dir: np.ndarray
    arrival_dir: np.ndarray
    tag: str = "conventional"

    @property
    def n_reflections(self) -> int:
        return sum(1 for i in self.interactions if i.kind == "reflection")

    @property
    def n_transmissions(self) -> int:
        return sum(1 for i in self.interactions if i.kind == "transmission")

    def vertices(self) -> np.ndarray:
        """Geometric polyline: tx, reflection points, rx. Transmissions do
        not bend the ray and contribute no vertex."""
        pts = [self.tx]
        pts += [i.point for i in self.interactions if i.kind == "reflection"]
        pts.append(self.rx)
        return np.array(pts)

    def surface_tuple(self) -> tuple[int, ...]:
        return tuple(i.surface_index for i in self.interactions
                     if i.kind == "reflection")


def _vec(p, name: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite 3-vector")
    return arr


def mirror_point(p, surface: Surface) -> np.ndarray:
    """Reflection of p across the surface's infinite plane."""
    p = _vec(p, "point")
    n = surface.normal
    sd = float(np.dot(p - surface.origin, n))
    return p - 2.0 * sd * n


def line_of_sight(scene: Scene, a, b) -> bool:
    """True iff segment (a, b) meets no facet interior; endpoint contact
    within 1e-9 m does not count as blockage."""
    a = _vec(a, "a")
    b = _vec(b, "b")
    if np.array_equal(a, b):
        raise ValueError("line_of_sight requires distinct endpoints")
    return not kernels.any_crossing(scene, a, b)


def trace_paths(scene: Scene, tx, rx, max_reflections: int = 2,
                allow_transmission: bool = False) -> list[PropagationPath]:
    """All valid image-method paths from tx to rx up to the given order.

    Every reflection point lies inside its finite facet; every sub-segment
    is unblocked, unless allow_transmission, in which case blocking facets
    become transmission interactions instead. Ordering is deterministic:
    by reflection count, then by surface-index tuple.
    """
    tx = _vec(tx, "tx")
    rx = _vec(rx, "rx")
    if np.array_equal(tx, rx):
        raise ValueError("trace_paths requires distinct endpoints")
    if not (0 <= max_reflections <= MAX_REFLECTION_CAP):
        raise ReflectionCapError(
            f"max_reflections must be in [0, {MAX_REFLECTION_CAP}], "
            f"got {max_reflections}"
        )

    orders, surfs, pts = kernels.enumerate_specular(
        scene, tx, rx, max_reflections, check_blocking=not allow_transmission
    )
    pack = kernels.pack_scene(scene)

    paths = []
    pos = 0
    for k in orders:
        tup = surfs[pos:pos + k]
        refl = pts[pos:pos + k]
        pos += k
        verts = np.empty((k + 2, 3))
        verts[0] = tx
        verts[1:k + 1] = refl
        verts[k + 1] = rx

        interactions: list[Interaction] = []
        length = 0.0
        for seg in range(k + 1):
            a = verts[seg]
            b = verts[seg + 1]
            length += float(np.linalg.norm(b - a))
            if allow_transmission:
                ea = int(tup[seg - 1]) if seg >= 1 else -1
                eb = int(tup[seg]) if seg < k else -1
                idx, ts = kernels.segment_crossings(pack, a, b, ea, eb)
                for i, t in zip(idx, ts):
                    interactions.append(
                        Interaction("transmission", int(i), a + t * (b - a))
                    )
            if seg < k:
                interactions.append(
                    Interaction("reflection", int(tup[seg]), verts[seg + 1].copy())
                )

        dep = verts[1] - verts[0]
        dep = dep / np.linalg.norm(dep)
        arr = verts[k + 1] - verts[k]
        arr = arr / np.linalg.norm(arr)
        paths.append(PropagationPath(
            tx=tx.copy(), rx=rx.copy(), interactions=tuple(interactions),
            length=length, delay=length / SPEED_OF_LIGHT,
            departure_dir=dep, arrival_dir=arr,
        ))
    return paths
