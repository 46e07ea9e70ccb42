"""Grid sweeps over target areas with optional panel assistance, and the
derived coverage statistics (CDF, threshold rates, mean gains)."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelSample, compose_channel, total_rx_power
from .em import CarrierSpec, dbm_from_mw, mw_from_dbm, path_amplitude
from .raytrace import trace_paths
from .ris import (RisConfig, RisPanel, design_phases, pair_directions,
                  ris_cascade, strongest_pair)
from .scene import Scene

COVERAGE_MODES = ("none", "fixed", "ms_specific")
DEFAULT_THRESHOLDS = (-105.0, -80.0)


@dataclass(frozen=True)
class TraceOptions:
    """Ray-tracing knobs shared by the direct link and both panel legs."""

    max_reflections: int = 2
    allow_transmission: bool = True


@dataclass(frozen=True)
class AreaSpec:
    """Rectangular measurement lattice at a fixed receiver height."""

    origin: tuple
    extent_x: float
    extent_y: float
    resolution: float = 2.0
    ms_height: float = 1.5

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        if len(origin) != 2 or not all(math.isfinite(v) for v in origin):
            raise ValueError("area origin must be a finite (x, y) pair")
        object.__setattr__(self, "origin", origin)
        if not (self.extent_x > 0.0 and self.extent_y > 0.0):
            raise ValueError("area extents must be > 0")
        if not (self.resolution > 0.0):
            raise ValueError(f"resolution must be > 0, got {self.resolution}")

    @property
    def shape(self) -> tuple:
        """(columns along x, rows along y)."""
        return (math.ceil(self.extent_x / self.resolution),
                math.ceil(self.extent_y / self.resolution))


def grid_points(area: AreaSpec) -> np.ndarray:
    """Lattice positions (N, 3), x index fastest, z = ms_height."""
    nx, ny = area.shape
    xs = area.origin[0] + area.resolution * np.arange(nx)
    ys = area.origin[1] + area.resolution * np.arange(ny)
    pts = np.empty((nx * ny, 3))
    pts[:, 0] = np.tile(xs, ny)
    pts[:, 1] = np.repeat(ys, nx)
    pts[:, 2] = area.ms_height
    return pts


@dataclass(frozen=True)
class CoverageGrid:
    area: AreaSpec
    points: np.ndarray
    power_dbm: np.ndarray
    meta: dict


class MeanGain(NamedTuple):
    gain_db: float
    n_used: int
    n_ignored: int


@dataclass(frozen=True)
class CoverageStats:
    cdf: tuple
    coverage_rate: dict
    mean_power: float          # dB-domain mean over finite points
    mean_power_linear: float   # 10 log10(mean mW), zeros included
    min_power: float


def channel_at(scene: Scene, bs, ms, carrier: CarrierSpec,
               options: TraceOptions | None = None,
               panel: RisPanel | None = None,
               config: RisConfig | None = None,
               paths_a=None, phase_mode: str = "planar",
               ff_mode: str = "warn") -> ChannelSample:
    """Full channel sample for one link.

    With a panel and config=None, phases are designed against this link's
    strongest pair (per-point configuration); a given config is used as-is
    (fixed configuration). paths_a may carry pre-traced source-to-panel
    paths so grid sweeps trace them once.
    """
    options = options or TraceOptions()
    conv_paths = trace_paths(scene, bs, ms, options.max_reflections,
                             options.allow_transmission)
    conv = [(p, path_amplitude(p, carrier, scene)) for p in conv_paths]
    ris_list: list = []
    if panel is not None:
        if paths_a is None:
            paths_a = trace_paths(scene, bs, panel.center,
                                  options.max_reflections,
                                  options.allow_transmission)
        paths_b = trace_paths(scene, panel.center, ms,
                              options.max_reflections,
                              options.allow_transmission)
        cfg = config
        if cfg is None and paths_a and paths_b:
            try:
                ia, ib = strongest_pair(paths_a, paths_b, panel, carrier,
                                        scene)
            except ValueError:
                cfg = None  # nothing illuminates the panel
            else:
                u_i, u_s = pair_directions(paths_a[ia], paths_b[ib])
                cfg = design_phases(panel, u_i, u_s, carrier.wavelength,
                                    mode="ms_specific", anchor=ms)
        if cfg is not None:
            ris_list = ris_cascade(paths_a, paths_b, panel, cfg, carrier,
                                   scene=scene, phase_mode=phase_mode,
                                   ff_mode=ff_mode)
    return compose_channel(conv, ris_list, carrier, bs=bs, ms=ms)


def _point_task(args) -> float:
    (scene, bs, ms, carrier, options, panel, config, paths_a,
     phase_mode, ff_mode, pt_dbm, sum_mode) = args
    sample = channel_at(scene, bs, ms, carrier, options=options, panel=panel,
                        config=config, paths_a=paths_a,
                        phase_mode=phase_mode, ff_mode=ff_mode)
    return total_rx_power(sample, pt_dbm, sum_mode)


def design_fixed(scene: Scene, bs, panel: RisPanel, anchor,
                 carrier: CarrierSpec,
                 options: TraceOptions | None = None):
    """Design a fixed configuration toward the anchor's strongest pair.

    Returns (config, paths_a) so callers can reuse the source-to-panel
    trace for every evaluated point.
    """
    options = options or TraceOptions()
    anchor_arr = np.asarray(anchor, dtype=float)
    paths_a = trace_paths(scene, np.asarray(bs, dtype=float), panel.center,
                          options.max_reflections, options.allow_transmission)
    paths_b = trace_paths(scene, panel.center, anchor_arr,
                          options.max_reflections, options.allow_transmission)
    ia, ib = strongest_pair(paths_a, paths_b, panel, carrier, scene)
    u_i, u_s = pair_directions(paths_a[ia], paths_b[ib])
    config = design_phases(panel, u_i, u_s, carrier.wavelength,
                           mode="fixed", anchor=anchor_arr)
    return config, paths_a


def compute_coverage(scene: Scene, bs, panel: RisPanel | None,
                     area: AreaSpec, mode: str, carrier: CarrierSpec,
                     pt_dbm: float = 30.0, *, anchor=None,
                     options: TraceOptions | None = None,
                     sum_mode: str = "coherent", phase_mode: str = "planar",
                     ff_mode: str = "warn", workers: int = 1) -> CoverageGrid:
    """Sweep the area lattice and record total RX power per point.

    mode "none" omits the panel term; "fixed" designs phases once toward
    the anchor's strongest pair; "ms_specific" re-designs per point.
    Results are gathered in lattice order whatever the worker count.
    """
    if mode not in COVERAGE_MODES:
        raise ValueError(f"mode must be one of {COVERAGE_MODES}, got {mode!r}")
    if mode != "none" and panel is None:
        raise ValueError(f"mode {mode!r} requires a panel")
    if mode == "fixed" and anchor is None:
        raise ValueError("fixed mode requires an anchor position")
    options = options or TraceOptions()
    bs = np.asarray(bs, dtype=float)
    pts = grid_points(area)

    paths_a = None
    config = None
    use_panel = panel if mode != "none" else None
    if use_panel is not None:
        if mode == "fixed":
            config, paths_a = design_fixed(scene, bs, use_panel, anchor,
                                           carrier, options)
        else:
            paths_a = trace_paths(scene, bs, use_panel.center,
                                  options.max_reflections,
                                  options.allow_transmission)

    tasks = [(scene, bs, p, carrier, options, use_panel, config, paths_a,
              phase_mode, ff_mode, pt_dbm, sum_mode) for p in pts]
    if workers <= 1:
        powers = [_point_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            powers = list(pool.map(_point_task, tasks, chunksize=chunk))

    meta = {
        "mode": mode,
        "ris": None if use_panel is None else f"{use_panel.nx}x{use_panel.ny}",
        "frequency_hz": carrier.frequency,
        "pt_dbm": pt_dbm,
        "sum": sum_mode,
    }
    return CoverageGrid(area=area, points=pts,
                        power_dbm=np.asarray(powers, dtype=float), meta=meta)


def cdf(grid: CoverageGrid) -> list:
    """Empirical CDF as (power dBm, cumulative probability) steps over the
    finite values; minus-infinity points count at the low end."""
    vals = np.asarray(grid.power_dbm, dtype=float)
    if vals.size == 0:
        raise ValueError("cdf of an empty grid")
    n = vals.size
    n_low = int(np.count_nonzero(np.isneginf(vals)))
    finite = vals[np.isfinite(vals)]
    uniq, counts = np.unique(finite, return_counts=True)
    cum = n_low + np.cumsum(counts)
    return [(float(v), float(c) / n) for v, c in zip(uniq, cum)]


def coverage_rate(grid: CoverageGrid, threshold: float) -> float:
    """Percentage of lattice points with power strictly above threshold."""
    vals = np.asarray(grid.power_dbm, dtype=float)
    if vals.size == 0:
        raise ValueError("coverage_rate of an empty grid")
    return 100.0 * float(np.count_nonzero(vals > threshold)) / vals.size


def mean_gain(grid_with: CoverageGrid, grid_without: CoverageGrid) -> MeanGain:
    """dB-domain mean power difference over points finite in both grids;
    points -inf in either grid are ignored and counted."""
    if grid_with.points.shape != grid_without.points.shape or \
            not np.array_equal(grid_with.points, grid_without.points):
        raise ValueError("grids must share one lattice")
    a = np.asarray(grid_with.power_dbm, dtype=float)
    b = np.asarray(grid_without.power_dbm, dtype=float)
    mask = np.isfinite(a) & np.isfinite(b)
    used = int(np.count_nonzero(mask))
    if used == 0:
        raise ValueError("no lattice point is covered in both grids")
    gain = float(a[mask].mean() - b[mask].mean())
    return MeanGain(gain_db=gain, n_used=used, n_ignored=a.size - used)


def coverage_stats(grid: CoverageGrid,
                   thresholds=DEFAULT_THRESHOLDS) -> CoverageStats:
    vals = np.asarray(grid.power_dbm, dtype=float)
    if vals.size == 0:
        raise ValueError("stats of an empty grid")
    finite = vals[np.isfinite(vals)]
    mean_db = float(finite.mean()) if finite.size else float("-inf")
    mw = np.array([mw_from_dbm(float(v)) for v in vals])
    mean_lin = dbm_from_mw(float(mw.mean()))
    return CoverageStats(
        cdf=tuple(cdf(grid)),
        coverage_rate={float(t): coverage_rate(grid, t) for t in thresholds},
        mean_power=mean_db,
        mean_power_linear=mean_lin,
        min_power=float(vals.min()),
    )
