"""Programmable scattering panel.

Unit-cell (UC) lattice geometry, the selectable UC scattering-strength
models, phase design for coherent beam alignment, the per-UC reflection
entries, and cascaded source-panel-destination path synthesis with radar-
equation normalization and far-field validity checks.

Conventions: incident/scatter unit vectors point AWAY from the panel
(toward the source / toward the destination); angles are measured from the
panel normal. The per-UC plane-wave geometric phase for a path pair is
phi_n = +(2 pi / lambda) (u_i + u_s) . r_n, so the designed configuration
beta_n = mod(-(2 pi / lambda) (u_i + u_s) . r_n, 2 pi) makes every cascade
term land on the same total phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .em import CarrierSpec, interaction_product
from .raytrace import Interaction, PropagationPath
from .scene import Scene

UC_MODELS = ("tang2020", "tang2022", "ellingson")

_FOUR_PI_POW32 = (4.0 * math.pi) ** 1.5

_FF_MESSAGE = ("link distance is inside the panel Fraunhofer bound "
               "2D^2/lambda; plane-wave per-UC phases may be inaccurate")


class FarFieldWarning(UserWarning):
    """A cascade leg violates the far-field bound (warn mode)."""


class FarFieldError(ValueError):
    """A cascade leg violates the far-field bound (strict mode)."""


def _unit(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite 3-vector")
    n = float(np.linalg.norm(arr))
    if n == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return arr / n


@dataclass(frozen=True)
class RisPanel:
    """Rectangular UC lattice centered at `center`, lying in the plane
    spanned by x_axis and normal x x_axis."""

    center: np.ndarray
    normal: np.ndarray
    x_axis: np.ndarray
    nx: int
    ny: int
    dx: float
    dy: float
    amplitude: float = 1.0
    model: str = "tang2022"
    alpha: float = 1.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.shape != (3,) or not np.all(np.isfinite(center)):
            raise ValueError("panel center must be a finite 3-vector")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "normal", _unit(self.normal, "panel normal"))
        object.__setattr__(self, "x_axis", _unit(self.x_axis, "panel x_axis"))
        if abs(float(np.dot(self.normal, self.x_axis))) >= 1e-9:
            raise ValueError("panel x_axis must be perpendicular to normal")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("UC counts must be >= 1")
        if not (self.dx > 0.0 and self.dy > 0.0):
            raise ValueError("UC widths must be > 0")
        if not (0.0 <= self.amplitude <= 1.0):
            raise ValueError(f"amplitude must be in [0, 1], got {self.amplitude}")
        if self.model not in UC_MODELS:
            raise ValueError(f"model must be one of {UC_MODELS}, got {self.model!r}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def k(self) -> int:
        return self.nx * self.ny

    @property
    def y_axis(self) -> np.ndarray:
        return np.cross(self.normal, self.x_axis)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.nx * self.dx, self.ny * self.dy)


@dataclass(frozen=True)
class RisConfig:
    """One programmable state: per-UC phases beta(n) in [0, 2 pi)."""

    beta: np.ndarray
    mode: str = "fixed"  # "fixed" | "ms_specific"
    anchor: np.ndarray | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 1 or beta.size < 1 or not np.all(np.isfinite(beta)):
            raise ValueError("beta must be a finite 1-d phase array")
        if np.any(beta < 0.0) or np.any(beta >= 2.0 * math.pi):
            raise ValueError("beta entries must lie in [0, 2 pi)")
        object.__setattr__(self, "beta", beta)
        if self.mode not in ("fixed", "ms_specific"):
            raise ValueError(f"mode must be 'fixed' or 'ms_specific', got {self.mode!r}")
        if self.anchor is not None:
            object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float))


def uc_positions(panel: RisPanel) -> np.ndarray:
    """UC centers, shape (K, 3), row-major with the x_axis index fastest."""
    ax = (np.arange(panel.nx) - (panel.nx - 1) / 2.0) * panel.dx
    ay = (np.arange(panel.ny) - (panel.ny - 1) / 2.0) * panel.dy
    a = np.tile(ax, panel.ny)
    b = np.repeat(ay, panel.nx)
    return (panel.center[None, :]
            + a[:, None] * panel.x_axis[None, :]
            + b[:, None] * panel.y_axis[None, :])


def _uc_offsets(panel: RisPanel) -> np.ndarray:
    return uc_positions(panel) - panel.center[None, :]


def uc_scattering(model: str, theta_i: float, theta_s: float,
                  wavelength: float, dx: float, dy: float,
                  alpha: float = 1.0, gain: float | None = None) -> float:
    """UC scattering strength g (meters, root of the UC radar cross
    section) for one of the selectable models.

    gain overrides the G factor of the models that have one (tang2020,
    ellingson); by default G = 2 (alpha + 1). tang2022 has no G factor.
    """
    for name, th in (("theta_i", theta_i), ("theta_s", theta_s)):
        if not (0.0 <= th <= math.pi / 2.0):
            raise ValueError(f"{name} must be in [0, pi/2], got {th}")
    ci = math.cos(theta_i)
    cs = math.cos(theta_s)
    if model == "tang2022":
        return math.sqrt(4.0 * math.pi * ci * cs) * dx * dy / wavelength
    g_factor = 2.0 * (alpha + 1.0) if gain is None else gain
    f_prod = (ci ** alpha) * (cs ** alpha)
    if model == "tang2020":
        return math.sqrt(dx * dy * g_factor * f_prod)
    if model == "ellingson":
        return g_factor * wavelength * math.sqrt(f_prod / (4.0 * math.pi))
    raise ValueError(f"model must be one of {UC_MODELS}, got {model!r}")


def fraunhofer_distance(panel: RisPanel, wavelength: float) -> float:
    """Far-field bound 2 D^2 / lambda with D the panel diagonal."""
    d = panel.diagonal
    return 2.0 * d * d / wavelength


def design_phases(panel: RisPanel, incident_dir, target_dir,
                  wavelength: float, mode: str = "fixed",
                  anchor=None) -> RisConfig:
    """Phase configuration that aligns every UC's cascade term for the
    (incident_dir, target_dir) geometry; both unit vectors point away from
    the panel and must lie on the illuminated half-space."""
    u_i = _unit(incident_dir, "incident_dir")
    u_s = _unit(target_dir, "target_dir")
    if float(np.dot(u_i, panel.normal)) <= 0.0:
        raise ValueError("incident direction is behind the panel")
    if float(np.dot(u_s, panel.normal)) <= 0.0:
        raise ValueError("target direction is behind the panel")
    w = u_i + u_s
    phase = (2.0 * math.pi / wavelength) * (_uc_offsets(panel) @ w)
    beta = np.mod(-phase, 2.0 * math.pi)
    # mod can emit 2*pi when the operand is a tiny negative number
    beta[beta >= 2.0 * math.pi] = 0.0
    return RisConfig(beta=beta, mode=mode, anchor=anchor)


def uniform_config(panel: RisPanel, mode: str = "fixed") -> RisConfig:
    """All-zero phases: the panel scatters as a flat specular plate."""
    return RisConfig(beta=np.zeros(panel.k), mode=mode)


def omega_entries(panel: RisPanel, config: RisConfig, theta_i: float,
                  theta_s: float, wavelength: float) -> np.ndarray:
    """Diagonal per-UC reflection entries g * A * e^{j beta(n)}; g is
    shared across UCs (far-field: one angle pair for the whole panel)."""
    if config.beta.size != panel.k:
        raise ValueError(
            f"config has {config.beta.size} phases for a {panel.k}-UC panel")
    g = uc_scattering(panel.model, theta_i, theta_s, wavelength,
                      panel.dx, panel.dy, panel.alpha)
    return g * panel.amplitude * np.exp(1j * config.beta)


def _leg_gammas(paths, scene: Scene | None, carrier: CarrierSpec,
                which: str) -> np.ndarray:
    gammas = np.empty(len(paths), dtype=complex)
    for i, p in enumerate(paths):
        if p.interactions:
            if scene is None:
                raise ValueError(
                    f"{which} path {i} has interactions; a scene is required "
                    "to resolve its coefficients")
            gammas[i] = interaction_product(p, carrier, scene)
        else:
            gammas[i] = 1.0
    return gammas


def _check_endpoints(paths, center: np.ndarray, end: str, which: str) -> None:
    for i, p in enumerate(paths):
        pt = p.rx if end == "rx" else p.tx
        if float(np.linalg.norm(pt - center)) > 1e-9:
            raise ValueError(
                f"{which} path {i} does not terminate on the panel center")


def ris_cascade(paths_a, paths_b, panel: RisPanel, config: RisConfig,
                carrier: CarrierSpec, scene: Scene | None = None,
                phase_mode: str = "planar",
                ff_mode: str = "warn") -> list[tuple[PropagationPath, complex]]:
    """Cascade every (source-side, destination-side) path pair through the
    panel.

    paths_a must terminate on the panel center (rx); paths_b must start
    there (tx). Pair amplitude:

        lambda / ((4 pi)^{3/2} d_a d_b) * e^{-j 2 pi (d_a + d_b)/lambda}
          * Gamma_a * Gamma_b * sum_n Omega(n, n) e^{j phi_n}

    with d the total leg lengths, Gamma the legs' accumulated interaction
    coefficients (scene required when legs have interactions), and phi_n
    the plane-wave per-UC phase (phase_mode="exact" switches to per-UC
    spherical distances on the final leg segments). Pairs arriving at or
    behind the panel plane on either side contribute nothing. Returned
    paths are tagged "ris" and carry a panel vertex (interaction kind
    "ris", surface_index -1). ff_mode: "warn" (default), "strict", "off".
    """
    if phase_mode not in ("planar", "exact"):
        raise ValueError(f"phase_mode must be 'planar' or 'exact', got {phase_mode!r}")
    if ff_mode not in ("warn", "strict", "off"):
        raise ValueError(f"ff_mode must be 'warn', 'strict' or 'off', got {ff_mode!r}")
    if config.beta.size != panel.k:
        raise ValueError(
            f"config has {config.beta.size} phases for a {panel.k}-UC panel")
    if not paths_a or not paths_b:
        return []
    center = panel.center
    _check_endpoints(paths_a, center, "rx", "source-side")
    _check_endpoints(paths_b, center, "tx", "destination-side")

    lam = carrier.wavelength
    k0 = 2.0 * math.pi / lam

    if ff_mode != "off":
        r_ff = fraunhofer_distance(panel, lam)
        near = min(min(p.length for p in paths_a),
                   min(p.length for p in paths_b))
        if near < r_ff:
            if ff_mode == "strict":
                raise FarFieldError(
                    f"leg distance {near:.3f} m is inside the far-field "
                    f"bound {r_ff:.3f} m")
            warnings.warn(_FF_MESSAGE, FarFieldWarning, stacklevel=2)

    gam_a = _leg_gammas(paths_a, scene, carrier, "source-side")
    gam_b = _leg_gammas(paths_b, scene, carrier, "destination-side")
    nrm = panel.normal
    u_a = np.array([-p.arrival_dir for p in paths_a])
    u_b = np.array([p.departure_dir for p in paths_b])
    cos_a = u_a @ nrm
    cos_b = u_b @ nrm
    keep_a = np.nonzero(cos_a > 0.0)[0]
    keep_b = np.nonzero(cos_b > 0.0)[0]
    if keep_a.size == 0 or keep_b.size == 0:
        return []

    offsets = _uc_offsets(panel)
    ej_beta = np.exp(1j * config.beta)
    amp_uc = panel.amplitude

    results: list[tuple[PropagationPath, complex]] = []
    if phase_mode == "planar":
        # one matmul for all kept pairs: phases (K, Pa*Pb)
        w = u_a[keep_a][:, None, :] + u_b[keep_b][None, :, :]
        phases = offsets @ w.reshape(-1, 3).T
        sums = (ej_beta[:, None] * np.exp(1j * (k0 * phases))).sum(axis=0)
        sums = sums.reshape(keep_a.size, keep_b.size)

    for ii, ia in enumerate(keep_a):
        pa = paths_a[ia]
        theta_a = math.acos(min(cos_a[ia], 1.0))
        va = pa.vertices()[-2]
        for jj, ib in enumerate(keep_b):
            pb = paths_b[ib]
            theta_b = math.acos(min(cos_b[ib], 1.0))
            g = uc_scattering(panel.model, theta_a, theta_b, lam,
                              panel.dx, panel.dy, panel.alpha)
            if phase_mode == "planar":
                ssum = sums[ii, jj]
            else:
                vb = pb.vertices()[1]
                da_uc = np.linalg.norm(offsets + center - va, axis=1)
                db_uc = np.linalg.norm(offsets + center - vb, axis=1)
                corr = (da_uc - np.linalg.norm(center - va)
                        + db_uc - np.linalg.norm(center - vb))
                ssum = (ej_beta * np.exp(-1j * (k0 * corr))).sum()
            d_a = pa.length
            d_b = pb.length
            pref = lam / (_FOUR_PI_POW32 * d_a * d_b)
            phase = -k0 * (d_a + d_b)
            amp = (pref * complex(math.cos(phase), math.sin(phase))
                   * gam_a[ia] * gam_b[ib] * (g * amp_uc * ssum))
            length = d_a + d_b
            path = PropagationPath(
                tx=pa.tx, rx=pb.rx,
                interactions=pa.interactions
                + (Interaction("ris", -1, center.copy()),)
                + pb.interactions,
                length=length, delay=length / SPEED_OF_LIGHT,
                departure_dir=pa.departure_dir, arrival_dir=pb.arrival_dir,
                tag="ris",
            )
            results.append((path, amp))
    return results


def strongest_pair(paths_a, paths_b, panel: RisPanel, carrier: CarrierSpec,
                   scene: Scene | None = None) -> tuple[int, int]:
    """Indices of the (source-side, destination-side) pair with the largest
    cascade amplitude under a hypothetically optimal configuration:
    |Gamma_a Gamma_b| g / (d_a d_b). Ties break to the shortest combined
    length, then to the lowest index pair."""
    if not paths_a or not paths_b:
        raise ValueError("strongest_pair requires non-empty path lists")
    gam_a = np.abs(_leg_gammas(paths_a, scene, carrier, "source-side"))
    gam_b = np.abs(_leg_gammas(paths_b, scene, carrier, "destination-side"))
    nrm = panel.normal
    best = None
    best_key = None
    for ia, pa in enumerate(paths_a):
        ca = -float(np.dot(pa.arrival_dir, nrm))
        if ca <= 0.0:
            continue
        theta_a = math.acos(min(ca, 1.0))
        for ib, pb in enumerate(paths_b):
            cb = float(np.dot(pb.departure_dir, nrm))
            if cb <= 0.0:
                continue
            theta_b = math.acos(min(cb, 1.0))
            g = uc_scattering(panel.model, theta_a, theta_b,
                              carrier.wavelength, panel.dx, panel.dy,
                              panel.alpha)
            metric = gam_a[ia] * gam_b[ib] * g / (pa.length * pb.length)
            dsum = pa.length + pb.length
            key = (-metric, dsum, ia, ib)
            if best_key is None or key < best_key:
                best_key = key
                best = (ia, ib)
    if best is None:
        raise ValueError("no path pair illuminates the panel")
    return best


def pair_directions(path_a: PropagationPath,
                    path_b: PropagationPath) -> tuple[np.ndarray, np.ndarray]:
    """Away-pointing (incident, scatter) unit vectors of a cascade pair,
    as consumed by design_phases."""
    return -path_a.arrival_dir, path_b.departure_dir
