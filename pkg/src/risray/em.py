"""Per-path electromagnetic response.

Free-space spreading with propagation phase, Fresnel reflection resolved
per facet for a vertically polarized link, flat per-traversal transmission
loss, and dBm conversions. Amplitudes are voltage gains: received field =
amplitude x transmitted field, phase convention e^{-j 2 pi d / lambda}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT, VACUUM_PERMITTIVITY
from .raytrace import PropagationPath
from .scene import Material, Scene

_Z = np.array([0.0, 0.0, 1.0])
_X = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class CarrierSpec:
    """Narrowband carrier."""

    frequency: float

    def __post_init__(self):
        if not (self.frequency > 0.0):
            raise ValueError(f"frequency must be > 0, got {self.frequency}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


def friis_gain(d: float, wavelength: float) -> complex:
    """Free-space voltage gain lambda/(4 pi d) with phase -2 pi d/lambda."""
    if not (d > 0.0):
        raise ValueError(f"distance must be > 0, got {d}")
    if not (wavelength > 0.0):
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    mag = wavelength / (4.0 * math.pi * d)
    phase = -2.0 * math.pi * d / wavelength
    return complex(mag * math.cos(phase), mag * math.sin(phase))


def complex_permittivity(material: Material, frequency: float) -> complex:
    """eps_r - j sigma / (2 pi f eps0), relative to vacuum."""
    return complex(
        material.eps_r,
        -material.sigma / (2.0 * math.pi * frequency * VACUUM_PERMITTIVITY),
    )


def fresnel_coeff(theta_inc: float, material: Material, wavelength: float,
                  polarization: str) -> complex:
    """Fresnel reflection coefficient, air onto the material half-space.

    theta_inc measured from the surface normal, in [0, pi/2). TM follows
    the convention whose normal-incidence value is -TE; the vertical-pol
    recombination in reflection_response is consistent with it.
    """
    if not (0.0 <= theta_inc < math.pi / 2.0):
        raise ValueError(f"theta_inc must be in [0, pi/2), got {theta_inc}")
    eps = complex_permittivity(material, SPEED_OF_LIGHT / wavelength)
    ct = math.cos(theta_inc)
    st = math.sin(theta_inc)
    root = np.sqrt(eps - st * st)
    if polarization == "TE":
        return complex((ct - root) / (ct + root))
    if polarization == "TM":
        return complex((eps * ct - root) / (eps * ct + root))
    raise ValueError(f"polarization must be 'TE' or 'TM', got {polarization!r}")


def _vertical_axis(k: np.ndarray) -> np.ndarray:
    # polarization axis of a vertically polarized isotropic antenna in the
    # plane transverse to propagation; x-axis fallback for vertical rays
    v = _Z - (_Z[0] * k[0] + _Z[1] * k[1] + _Z[2] * k[2]) * k
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n < 1e-12:
        return _X
    return v / n


def reflection_response(k_in: np.ndarray, k_out: np.ndarray,
                        normal: np.ndarray, material: Material,
                        wavelength: float) -> complex:
    """Scalar reflection coefficient seen by a vertically polarized link.

    k_in/k_out are unit propagation directions into and out of the bounce.
    The field is decomposed into TE/TM against the facet, each component
    reflected with its Fresnel coefficient, and re-projected onto the
    vertical axis of the outgoing ray.
    """
    n = normal
    if n[0] * k_in[0] + n[1] * k_in[1] + n[2] * k_in[2] > 0.0:
        n = -n
    ct = -(k_in[0] * n[0] + k_in[1] * n[1] + k_in[2] * n[2])
    ct = min(max(ct, 0.0), 1.0)
    theta = math.acos(ct)
    if theta >= math.pi / 2.0:
        return complex(-1.0)
    g_te = fresnel_coeff(theta, material, wavelength, "TE")
    te = np.cross(k_in, n)
    s = math.sqrt(te[0] * te[0] + te[1] * te[1] + te[2] * te[2])
    if s < 1e-9:
        # normal incidence: TE/TM degenerate
        return g_te
    g_tm = fresnel_coeff(theta, material, wavelength, "TM")
    te = te / s
    tm_i = np.cross(te, k_in)
    tm_r = np.cross(te, k_out)
    v_i = _vertical_axis(k_in)
    v_r = _vertical_axis(k_out)
    c_te = float(np.dot(v_i, te)) * float(np.dot(v_r, te))
    c_tm = float(np.dot(v_i, tm_i)) * float(np.dot(v_r, tm_r))
    return g_te * c_te + g_tm * c_tm


def transmission_factor(trans_loss_db: float) -> float:
    return 10.0 ** (-trans_loss_db / 20.0)


def interaction_product(path: PropagationPath, carrier: CarrierSpec,
                        scene: Scene) -> complex:
    """Product of all reflection and transmission coefficients along the
    path (no free-space factor)."""
    verts = path.vertices()
    gamma = complex(1.0)
    r = 0
    for inter in path.interactions:
        mat = scene.material_of(inter.surface_index)
        if inter.kind == "reflection":
            k_in = verts[r + 1] - verts[r]
            k_in = k_in / np.linalg.norm(k_in)
            k_out = verts[r + 2] - verts[r + 1]
            k_out = k_out / np.linalg.norm(k_out)
            nrm = scene.surfaces[inter.surface_index].normal
            gamma *= reflection_response(k_in, k_out, nrm, mat,
                                         carrier.wavelength)
            r += 1
        else:
            gamma *= transmission_factor(mat.trans_loss_db)
    return gamma


def path_amplitude(path: PropagationPath, carrier: CarrierSpec,
                   scene: Scene) -> complex:
    """Complex voltage gain of one path: Friis over the total unfolded
    length times every interaction coefficient; isotropic unit-gain
    antennas."""
    return friis_gain(path.length, carrier.wavelength) * interaction_product(
        path, carrier, scene)


def dbm_from_amplitude(a: complex, pt_dbm: float) -> float:
    """Received power for transmit power pt_dbm through voltage gain a;
    -inf for zero amplitude."""
    mag = abs(a)
    if mag == 0.0:
        return float("-inf")
    return pt_dbm + 20.0 * math.log10(mag)


def dbm_from_mw(p_mw: float) -> float:
    if p_mw < 0.0:
        raise ValueError(f"power must be >= 0 mW, got {p_mw}")
    if p_mw == 0.0:
        return float("-inf")
    return 10.0 * math.log10(p_mw)


def mw_from_dbm(p_dbm: float) -> float:
    if p_dbm == float("-inf"):
        return 0.0
    return 10.0 ** (p_dbm / 10.0)
