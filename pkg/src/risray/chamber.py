"""Anechoic-style panel validation: normal-incidence illumination, receiver
swept in angle in the panel's x-normal plane, lobe extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import compose_channel, total_rx_power
from .constants import SPEED_OF_LIGHT
from .em import CarrierSpec
from .raytrace import PropagationPath
from .ris import RisConfig, RisPanel, ris_cascade, uniform_config

__all__ = ["SweepResult", "chamber_sweep", "extract_lobes", "uniform_config"]


@dataclass(frozen=True)
class SweepResult:
    samples: tuple  # ((theta_s deg, power dBm), ...), uniform step
    setup: dict


def _free_leg(a: np.ndarray, b: np.ndarray) -> PropagationPath:
    d = float(np.linalg.norm(b - a))
    u = (b - a) / d
    return PropagationPath(tx=a, rx=b, interactions=(), length=d,
                           delay=d / SPEED_OF_LIGHT, departure_dir=u,
                           arrival_dir=u)


def chamber_sweep(panel: RisPanel, tx_distance: float, rx_distance: float,
                  pt_dbm: float, carrier: CarrierSpec,
                  theta_range=(-90.0, 90.0), step: float = 1.0,
                  config: RisConfig | None = None,
                  ff_mode: str = "off") -> SweepResult:
    """Free-space scattered power versus receive angle.

    The source sits on the panel normal at tx_distance (normal incidence);
    the receiver sweeps theta (degrees from the normal, positive toward
    x_axis) at rx_distance in the x-normal plane. config defaults to the
    uniform (specular-plate) state. Angles at or beyond 90 degrees read
    -inf (shadowed side).
    """
    if not (tx_distance > 0.0 and rx_distance > 0.0):
        raise ValueError("chamber distances must be > 0")
    if not (step > 0.0):
        raise ValueError(f"step must be > 0, got {step}")
    start, stop = float(theta_range[0]), float(theta_range[1])
    if not (stop > start):
        raise ValueError(f"invalid sweep range {theta_range}")
    if config is None:
        config = uniform_config(panel)

    c = panel.center
    tx = c + tx_distance * panel.normal
    leg_a = [_free_leg(tx, c)]

    n_steps = int(math.floor((stop - start) / step + 1e-9)) + 1
    samples = []
    for i in range(n_steps):
        theta = start + i * step
        if abs(theta) >= 90.0:
            # shadowed side; cos(90 deg) is not exactly zero in floats
            samples.append((theta, float("-inf")))
            continue
        rad = math.radians(theta)
        rx = c + rx_distance * (math.sin(rad) * panel.x_axis
                                + math.cos(rad) * panel.normal)
        leg_b = [_free_leg(c, rx)]
        pairs = ris_cascade(leg_a, leg_b, panel, config, carrier,
                            ff_mode=ff_mode)
        sample = compose_channel([], pairs, carrier, bs=tx, ms=rx)
        samples.append((theta, total_rx_power(sample, pt_dbm)))

    setup = {"panel": panel, "tx_distance": tx_distance,
             "rx_distance": rx_distance, "pt_dbm": pt_dbm,
             "carrier": carrier, "config": config}
    return SweepResult(samples=tuple(samples), setup=setup)


def extract_lobes(sweep: SweepResult, n: int) -> list:
    """The n largest local maxima as (theta deg, peak dBm), sorted by power
    descending.

    A sample is a local maximum when it exceeds both neighbors; plateau
    runs resolve to their lowest angle; endpoints count when higher than
    their single neighbor.
    """
    if n < 1:
        raise ValueError(f"lobe count must be >= 1, got {n}")
    s = sweep.samples
    peaks = []
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1][1] == s[i][1]:
            j += 1
        left_lower = i == 0 or s[i - 1][1] < s[i][1]
        right_lower = j == len(s) - 1 or s[j + 1][1] < s[i][1]
        interior = 0 < i or j < len(s) - 1  # a constant sweep has no lobes
        if left_lower and right_lower and interior and s[i][1] != float("-inf"):
            peaks.append(s[i])
        i = j + 1
    peaks.sort(key=lambda p: (-p[1], p[0]))
    if len(peaks) < n:
        raise ValueError(f"found {len(peaks)} local maxima, need {n}")
    return peaks[:n]
