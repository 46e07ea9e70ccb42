"""Command-line front end: scenario config ingestion, subcommand dispatch,
CSV emission, run manifests.

One JSON config per run; flags override scalar fields only. Exit codes:
0 success, 2 usage, 3 config validation, 4 runtime failure. All CSVs are
written whole via write-then-rename, '.' decimal, ',' separator, header
row first. RIS_SIM_SEED is reserved for future use; runs are
deterministic without it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .chamber import chamber_sweep, extract_lobes
from .channel import power_delay_profile
from .coverage import (AreaSpec, COVERAGE_MODES, DEFAULT_THRESHOLDS,
                       TraceOptions, channel_at, compute_coverage,
                       coverage_stats, design_fixed, grid_points)
from .em import CarrierSpec
from .ris import UC_MODELS, RisPanel, fraunhofer_distance
from .scene import Scene, SceneError, load_scene_file, scene_from_dict

SUM_MODES = ("coherent", "incoherent")
PHASE_MODES = ("planar", "exact")
FF_MODES = ("warn", "strict", "off")

_CHAMBER_DEFAULTS = {
    "tx_distance": 5.0,
    "rx_distance": 5.0,
    "theta_start": -90.0,
    "theta_stop": 90.0,
    "theta_step": 0.25,
    "n_lobes": 3,
}


class ConfigError(ValueError):
    """Scenario configuration failed validation (exit code 3)."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved run description plus its normalized echo document."""

    scene: Scene
    carrier: CarrierSpec
    pt_dbm: float
    bs: np.ndarray
    panel: RisPanel | None
    area: AreaSpec | None
    mode: str
    anchor: np.ndarray | None
    trace: TraceOptions
    sum_mode: str
    phase_mode: str
    ff_mode: str
    out_dir: str
    chamber: dict
    echo: dict


def _fail(msg: str) -> ConfigError:
    return ConfigError(msg)


def _scalar(cfg: dict, key: str, kind, default=None, required=False):
    if key not in cfg:
        if required:
            raise _fail(f"config missing required field {key!r}")
        return default
    try:
        val = kind(cfg[key])
    except (TypeError, ValueError):
        raise _fail(f"field {key!r} must be {kind.__name__}, "
                    f"got {cfg[key]!r}") from None
    if kind is float and not math.isfinite(val):
        raise _fail(f"field {key!r} must be finite, got {val}")
    return val


def _choice(cfg: dict, key: str, allowed, default):
    val = cfg.get(key, default)
    if val not in allowed:
        raise _fail(f"field {key!r} must be one of {allowed}, got {val!r}")
    return val


def _vec(cfg_val, name: str, n: int = 3) -> np.ndarray:
    try:
        arr = np.asarray(cfg_val, dtype=float)
    except (TypeError, ValueError):
        raise _fail(f"field {name!r} must be {n} numbers") from None
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise _fail(f"field {name!r} must be {n} finite numbers, "
                    f"got {cfg_val!r}")
    return arr


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise _fail(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _fail(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise _fail("config root must be a JSON object")
    return cfg


def _resolve_scene(cfg: dict, base_dir: str) -> Scene:
    doc = cfg.get("scene")
    if not isinstance(doc, dict):
        raise _fail("config needs a 'scene' object "
                    "(file reference, factory params, or inline surfaces)")
    try:
        if "file" in doc:
            path = doc["file"]
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            return load_scene_file(path)
        return scene_from_dict(doc)
    except (SceneError, OSError, json.JSONDecodeError, KeyError,
            TypeError) as exc:
        raise _fail(f"scene: {exc}") from exc


def _resolve_panel(cfg: dict, wavelength: float):
    """Returns (panel | None, normalized panel echo dict | None)."""
    doc = cfg.get("panel")
    if doc is None:
        return None, None
    if not isinstance(doc, dict):
        raise _fail("field 'panel' must be an object")
    for key in ("center", "normal", "x_axis", "nx", "ny",
                "dx_over_lambda", "dy_over_lambda"):
        if key not in doc:
            raise _fail(f"panel missing required field {key!r}")
    nx = _scalar(doc, "nx", int, required=True)
    ny = _scalar(doc, "ny", int, required=True)
    rx = _scalar(doc, "dx_over_lambda", float, required=True)
    ry = _scalar(doc, "dy_over_lambda", float, required=True)
    amp = _scalar(doc, "A", float, default=1.0)
    model = _choice(doc, "model", UC_MODELS, "tang2022")
    alpha = _scalar(doc, "alpha", float, default=1.0)
    center = _vec(doc["center"], "panel.center")
    normal = _vec(doc["normal"], "panel.normal")
    x_axis = _vec(doc["x_axis"], "panel.x_axis")
    try:
        panel = RisPanel(center=center, normal=normal, x_axis=x_axis,
                         nx=nx, ny=ny, dx=rx * wavelength,
                         dy=ry * wavelength, amplitude=amp,
                         model=model, alpha=alpha)
    except ValueError as exc:
        raise _fail(f"panel: {exc}") from exc
    echo = {"center": [float(v) for v in center],
            "normal": [float(v) for v in normal],
            "x_axis": [float(v) for v in x_axis],
            "nx": nx, "ny": ny,
            "dx_over_lambda": rx, "dy_over_lambda": ry,
            "A": amp, "model": model, "alpha": alpha}
    return panel, echo


def _resolve_area(cfg: dict):
    """Returns (area | None, normalized area echo dict | None)."""
    doc = cfg.get("area")
    if doc is None:
        return None, None
    if not isinstance(doc, dict):
        raise _fail("field 'area' must be an object")
    origin = _vec(doc.get("origin"), "area.origin", n=2)
    ex = _scalar(doc, "extent_x", float, required=True)
    ey = _scalar(doc, "extent_y", float, required=True)
    res = _scalar(doc, "resolution", float, default=2.0)
    height = _scalar(doc, "ms_height", float, default=1.5)
    if ex <= 0.0 or ey <= 0.0:
        raise _fail(f"area extents must be > 0, got {ex} x {ey}")
    if res <= 0.0:
        raise _fail(f"field 'area.resolution' must be > 0, got {res}")
    area = AreaSpec(origin=(float(origin[0]), float(origin[1])),
                    extent_x=ex, extent_y=ey, resolution=res,
                    ms_height=height)
    echo = {"origin": [float(origin[0]), float(origin[1])],
            "extent_x": ex, "extent_y": ey, "resolution": res,
            "ms_height": height}
    return area, echo


def _resolve_chamber(cfg: dict) -> dict:
    doc = cfg.get("chamber") or {}
    if not isinstance(doc, dict):
        raise _fail("field 'chamber' must be an object")
    unknown = set(doc) - set(_CHAMBER_DEFAULTS)
    if unknown:
        raise _fail(f"unknown chamber fields: {sorted(unknown)}")
    out = dict(_CHAMBER_DEFAULTS)
    for key, default in _CHAMBER_DEFAULTS.items():
        kind = int if isinstance(default, int) else float
        out[key] = _scalar(doc, key, kind, default=default)
    if out["tx_distance"] <= 0.0 or out["rx_distance"] <= 0.0:
        raise _fail("chamber distances must be > 0")
    if out["theta_step"] <= 0.0:
        raise _fail("field 'chamber.theta_step' must be > 0")
    if out["theta_stop"] <= out["theta_start"]:
        raise _fail("chamber theta_stop must exceed theta_start")
    if out["n_lobes"] < 1:
        raise _fail("field 'chamber.n_lobes' must be >= 1")
    return out


def resolve_config(cfg: dict, base_dir: str, command: str) -> ScenarioConfig:
    """Validate the raw config document against a subcommand's needs."""
    scene = _resolve_scene(cfg, base_dir)
    freq = _scalar(cfg, "frequency_hz", float, required=True)
    if freq <= 0.0:
        raise _fail(f"field 'frequency_hz' must be > 0, got {freq}")
    carrier = CarrierSpec(freq)
    pt = _scalar(cfg, "pt_dbm", float, default=30.0)
    bs = _vec(cfg.get("bs"), "bs") if "bs" in cfg else None
    mode = _choice(cfg, "mode", COVERAGE_MODES, "none")
    sum_mode = _choice(cfg, "sum", SUM_MODES, "coherent")
    phase_mode = _choice(cfg, "phase_mode", PHASE_MODES, "planar")
    ff_mode = _choice(cfg, "ff_mode", FF_MODES, "warn")
    panel, panel_echo = _resolve_panel(cfg, carrier.wavelength)
    area, area_echo = _resolve_area(cfg)
    anchor = _vec(cfg.get("anchor"), "anchor") if "anchor" in cfg else None

    tr = cfg.get("trace") or {}
    if not isinstance(tr, dict):
        raise _fail("field 'trace' must be an object")
    trace = TraceOptions(
        max_reflections=_scalar(tr, "max_reflections", int, default=2),
        allow_transmission=bool(tr.get("allow_transmission", True)),
    )
    chamber = _resolve_chamber(cfg)
    out_dir = cfg.get("out_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise _fail("field 'out_dir' must be a non-empty string")

    if command in ("coverage", "pdp", "ffcheck") and bs is None:
        raise _fail(f"{command} requires a 'bs' position")
    if command == "coverage" and area is None:
        raise _fail("coverage requires an 'area' block")
    if command in ("chamber", "ffcheck") and panel is None:
        raise _fail(f"{command} requires a 'panel' block")
    if command in ("coverage", "pdp"):
        if mode != "none" and panel is None:
            raise _fail(f"mode {mode!r} requires a 'panel' block")
        if mode == "fixed" and anchor is None:
            raise _fail("mode 'fixed' requires an 'anchor' position")

    echo = {
        "scene": json.loads(scene.to_json()),
        "frequency_hz": freq,
        "pt_dbm": pt,
        "mode": mode,
        "sum": sum_mode,
        "phase_mode": phase_mode,
        "ff_mode": ff_mode,
        "trace": {"max_reflections": trace.max_reflections,
                  "allow_transmission": trace.allow_transmission},
        "out_dir": out_dir,
    }
    if bs is not None:
        echo["bs"] = [float(v) for v in bs]
    if panel_echo is not None:
        echo["panel"] = panel_echo
    if area_echo is not None:
        echo["area"] = area_echo
    if anchor is not None:
        echo["anchor"] = [float(v) for v in anchor]
    if command == "chamber":
        echo["chamber"] = chamber

    return ScenarioConfig(scene=scene, carrier=carrier, pt_dbm=pt, bs=bs,
                          panel=panel, area=area, mode=mode, anchor=anchor,
                          trace=trace, sum_mode=sum_mode,
                          phase_mode=phase_mode, ff_mode=ff_mode,
                          out_dir=out_dir, chamber=chamber, echo=echo)


def _num(x: float, nd: int) -> str:
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return "%.*f" % (nd, round(x, nd) + 0.0)


def _csv(header: str, rows) -> bytes:
    return ("\n".join([header, *rows]) + "\n").encode("ascii")


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def run_coverage(sc: ScenarioConfig, workers: int) -> dict:
    grid = compute_coverage(sc.scene, sc.bs, sc.panel, sc.area, sc.mode,
                            sc.carrier, sc.pt_dbm, anchor=sc.anchor,
                            options=sc.trace, sum_mode=sc.sum_mode,
                            phase_mode=sc.phase_mode, ff_mode=sc.ff_mode,
                            workers=workers)
    stats = coverage_stats(grid)
    rows = [",".join((_num(x, 3), _num(y, 3), _num(z, 3), _num(p, 2)))
            for (x, y, z), p in zip(grid.points, grid.power_dbm)]
    srows = [
        "mean_dbm_db_domain," + _num(stats.mean_power, 2),
        "mean_dbm_linear_domain," + _num(stats.mean_power_linear, 2),
        "min_dbm," + _num(stats.min_power, 2),
    ]
    srows += ["rate_at_%g,%s" % (t, _num(stats.coverage_rate[t], 2))
              for t in DEFAULT_THRESHOLDS]
    return {"grid.csv": _csv("x_m,y_m,z_m,power_dbm", rows),
            "stats.csv": _csv("metric,value", srows)}


def run_pdp(sc: ScenarioConfig, ms: np.ndarray) -> dict:
    config = None
    paths_a = None
    panel = sc.panel if sc.mode != "none" else None
    if sc.mode == "fixed":
        config, paths_a = design_fixed(sc.scene, sc.bs, panel, sc.anchor,
                                       sc.carrier, sc.trace)
    sample = channel_at(sc.scene, sc.bs, ms, sc.carrier, options=sc.trace,
                        panel=panel, config=config, paths_a=paths_a,
                        phase_mode=sc.phase_mode, ff_mode=sc.ff_mode)
    pdp = power_delay_profile(sample, sc.pt_dbm)
    rows = ["%s,%s,%s" % (_num(d * 1e9, 4), _num(p, 2), tag)
            for d, p, tag in pdp.bins]
    return {"pdp.csv": _csv("delay_ns,power_dbm,tag", rows)}


def run_chamber(sc: ScenarioConfig) -> dict:
    ch = sc.chamber
    sweep = chamber_sweep(sc.panel, ch["tx_distance"], ch["rx_distance"],
                          sc.pt_dbm, sc.carrier,
                          (ch["theta_start"], ch["theta_stop"]),
                          ch["theta_step"], ff_mode=sc.ff_mode)
    lobes = extract_lobes(sweep, ch["n_lobes"])
    srows = ["%s,%s" % (_num(t, 2), _num(p, 2)) for t, p in sweep.samples]
    lrows = ["%d,%s,%s,%s" % (k + 1, _num(t, 2), _num(p, 2),
                              _num(p - lobes[0][1], 2))
             for k, (t, p) in enumerate(lobes)]
    return {"sweep.csv": _csv("theta_deg,power_dbm", srows),
            "lobes.csv": _csv("rank,theta_deg,power_dbm,relative_db", lrows)}


def run_ffcheck(sc: ScenarioConfig) -> dict:
    panel = sc.panel
    ff = fraunhofer_distance(panel, sc.carrier.wavelength)
    links = [("bs", sc.bs)]
    if sc.anchor is not None:
        links.append(("anchor", sc.anchor))
    if sc.area is not None:
        pts = grid_points(sc.area)
        xs = sorted({float(p[0]) for p in pts})
        ys = sorted({float(p[1]) for p in pts})
        z = sc.area.ms_height
        for tag, x, y in (("area_sw", xs[0], ys[0]),
                          ("area_se", xs[-1], ys[0]),
                          ("area_nw", xs[0], ys[-1]),
                          ("area_ne", xs[-1], ys[-1])):
            links.append((tag, np.array([x, y, z])))
    rows = []
    for tag, pos in links:
        d = float(np.linalg.norm(np.asarray(pos, dtype=float)
                                 - panel.center))
        verdict = "true" if d >= ff else "false"
        rows.append("%s,%s,%s,%s" % (tag, _num(d, 3), _num(ff, 3), verdict))
    return {"ffcheck.csv": _csv("link,distance_m,fraunhofer_m,far_field",
                                rows)}


def _write_outputs(out_dir: str, files: dict, manifest: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    digests = {}
    for name in sorted(files):
        _atomic_write(os.path.join(out_dir, name), files[name])
        digests[name] = hashlib.sha256(files[name]).hexdigest()
    manifest["outputs"] = digests
    body = (json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  body.encode("ascii"))


def _ms_arg(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"--ms wants x,y,z (three comma-separated numbers), got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--ms coordinates must be numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("--ms coordinates must be finite")
    return np.array(vals)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risray",
        description="Deterministic ray-tracing coverage simulator with a "
                    "far-field RIS scattering model.")
    parser.add_argument("--version", action="version",
                        version=f"risray {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("coverage", "sweep a target area and write grid.csv + stats.csv"),
        ("pdp", "per-path power delay profile at one receiver position"),
        ("chamber", "free-space scattering sweep, sweep.csv + lobes.csv"),
        ("ffcheck", "compare link distances against the Fraunhofer bound"),
    ]
    for name, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True,
                        help="path to the scenario JSON")
        sp.add_argument("--freq", type=float, default=None,
                        help="override carrier frequency [Hz]")
        sp.add_argument("--pt", type=float, default=None,
                        help="override transmit power [dBm]")
        sp.add_argument("--mode", choices=COVERAGE_MODES, default=None,
                        help="override RIS configuration mode")
        sp.add_argument("--out", default=None,
                        help="override output directory")
        sp.add_argument("--workers", type=int, default=1,
                        help="parallel worker cap (coverage sweeps)")
        if name == "pdp":
            sp.add_argument("--ms", type=_ms_arg, required=True,
                            help="receiver position x,y,z [m]")
    return parser


def _apply_overrides(cfg: dict, args) -> None:
    if args.freq is not None:
        cfg["frequency_hz"] = args.freq
    if args.pt is not None:
        cfg["pt_dbm"] = args.pt
    if args.mode is not None:
        cfg["mode"] = args.mode
    if args.out is not None:
        cfg["out_dir"] = args.out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        base_dir = os.path.dirname(os.path.abspath(args.config))
        sc = resolve_config(cfg, base_dir, args.command)
        if args.workers < 1:
            raise _fail(f"--workers must be >= 1, got {args.workers}")

        if args.command == "coverage":
            files = run_coverage(sc, args.workers)
        elif args.command == "pdp":
            files = run_pdp(sc, args.ms)
        elif args.command == "chamber":
            files = run_chamber(sc)
        else:
            files = run_ffcheck(sc)

        manifest = {
            "tool": "risray",
            "version": __version__,
            "command": args.command,
            "config": sc.echo,
            "wall_time_s": round(time.perf_counter() - t0, 3),
        }
        if args.command == "pdp":
            manifest["ms"] = [float(v) for v in args.ms]
        _write_outputs(sc.out_dir, files, manifest)
    except ConfigError as exc:
        print(f"risray: config error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"risray: error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
