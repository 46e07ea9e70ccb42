"""Channel composition: direct plus panel-cascade paths for one link, total
received power (coherent or incoherent) and power delay profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .em import CarrierSpec


@dataclass(frozen=True)
class ChannelSample:
    """All paths of one BS-MS link with their complex amplitudes."""

    bs: np.ndarray | None
    ms: np.ndarray | None
    conventional_paths: tuple
    ris_paths: tuple
    carrier: CarrierSpec

    @property
    def h(self) -> complex:
        """Scalar channel: sum of every path amplitude."""
        total = complex(0.0)
        for _, a in self.conventional_paths:
            total += a
        for _, a in self.ris_paths:
            total += a
        return total

    def amplitudes(self) -> np.ndarray:
        return np.array([a for _, a in self.conventional_paths]
                        + [a for _, a in self.ris_paths], dtype=complex)


@dataclass(frozen=True)
class Pdp:
    """Per-path impulses: (delay s, power dBm, tag), sorted by delay."""

    bins: tuple


def compose_channel(conv, ris, carrier: CarrierSpec,
                    bs=None, ms=None) -> ChannelSample:
    """Assemble a ChannelSample from (path, amplitude) lists; either list
    may be empty. Endpoints default to those of the first path given."""
    conv = tuple(conv)
    ris = tuple(ris)
    first = conv[0][0] if conv else (ris[0][0] if ris else None)
    if bs is None and first is not None:
        bs = first.tx
    if ms is None and first is not None:
        ms = first.rx
    return ChannelSample(
        bs=None if bs is None else np.asarray(bs, dtype=float),
        ms=None if ms is None else np.asarray(ms, dtype=float),
        conventional_paths=conv, ris_paths=ris, carrier=carrier,
    )


def total_rx_power(sample: ChannelSample, pt_dbm: float,
                   mode: str = "coherent") -> float:
    """Received power in dBm; -inf for an empty or fully cancelled sample.

    coherent: Pt + 20 log10 |sum a_i|; incoherent: Pt + 10 log10 (sum |a_i|^2).
    """
    if not math.isfinite(pt_dbm):
        raise ValueError(f"pt_dbm must be finite, got {pt_dbm}")
    amps = sample.amplitudes()
    if amps.size == 0:
        return float("-inf")
    if mode == "coherent":
        mag = abs(amps.sum())
        if mag == 0.0:
            return float("-inf")
        return pt_dbm + 20.0 * math.log10(mag)
    if mode == "incoherent":
        p = float((amps.real * amps.real + amps.imag * amps.imag).sum())
        if p == 0.0:
            return float("-inf")
        return pt_dbm + 10.0 * math.log10(p)
    raise ValueError(f"mode must be 'coherent' or 'incoherent', got {mode!r}")


def power_delay_profile(sample: ChannelSample, pt_dbm: float) -> Pdp:
    """One bin per path at its exact delay; no delay binning or windowing."""
    bins = []
    for path, a in sample.conventional_paths:
        bins.append((path.delay, _tap_dbm(a, pt_dbm), "conventional"))
    for path, a in sample.ris_paths:
        bins.append((path.delay, _tap_dbm(a, pt_dbm), "ris"))
    bins.sort(key=lambda b: b[0])
    return Pdp(bins=tuple(bins))


def _tap_dbm(a: complex, pt_dbm: float) -> float:
    mag = abs(a)
    if mag == 0.0:
        return float("-inf")
    return pt_dbm + 20.0 * math.log10(mag)
