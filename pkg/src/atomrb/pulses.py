"""Physical microwave pulses, BB1 expansion and two-level evolution.

A pulse rotates about the equatorial axis at azimuth ``phase`` (the
mathematical axis angle used by :func:`atomrb.su2.rotation`). The hardware
DDS phase in the gate tables is the negative of this angle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from atomrb.su2 import I2

RABI_DEFAULT = 2 * np.pi * 9.6e3  # rad/s


@dataclass(frozen=True)
class PhysicalPulse:
    phase: float
    area: float
    rabi: float = RABI_DEFAULT

    def __post_init__(self):
        if self.area < 0:
            raise ValueError("pulse area must be non-negative")
        if self.rabi <= 0:
            raise ValueError("Rabi frequency must be positive")

    @property
    def duration(self) -> float:
        return self.area / self.rabi

    @property
    def dds_phase(self) -> float:
        """Hardware phase, wrapped to (-pi, pi]."""
        return float(-np.angle(np.exp(1j * self.phase)))


@dataclass(frozen=True)
class PulseNoise:
    """Relative amplitude error and quasi-static detuning (rad/s)."""

    amplitude_error: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        if 1 + self.amplitude_error <= 0:
            raise ValueError("1 + amplitude_error must be positive")


NOISELESS = PulseNoise()


def bb1_angle(theta: float) -> float:
    if theta > 4 * np.pi:
        raise ValueError(f"BB1 undefined for area {theta} > 4 pi")
    return float(np.arccos(-theta / (4 * np.pi)))


def bb1_expand(pulse: PhysicalPulse) -> list[PhysicalPulse]:
    """Replace ``pulse`` by the four-pulse BB1 sequence in temporal order.

    The correction block follows the target rotation:
    ``R_phi(theta)``, ``R_{phi+b}(pi)``, ``R_{phi+3b}(2pi)``, ``R_{phi+b}(pi)``
    with ``b = arccos(-theta / 4 pi)``.
    """
    if pulse.area == 0:
        return []
    beta = bb1_angle(pulse.area)
    phi, rabi = pulse.phase, pulse.rabi
    return [
        pulse,
        PhysicalPulse(phi + beta, np.pi, rabi),
        PhysicalPulse(phi + 3 * beta, 2 * np.pi, rabi),
        PhysicalPulse(phi + beta, np.pi, rabi),
    ]


def expand_all(pulses: Iterable[PhysicalPulse], bb1: bool) -> list[PhysicalPulse]:
    if not bb1:
        return [p for p in pulses if p.area > 0]
    out: list[PhysicalPulse] = []
    for p in pulses:
        out.extend(bb1_expand(p))
    return out


def pulse_elements(phase, area, rabi, amplitude_error, detuning):
    """Entries ``(u00, u01, u10, u11)`` of constant-drive evolution.

    Broadcasts over array arguments, which is how shot batches are evolved.
    """
    drive = rabi * (1 + np.asarray(amplitude_error, dtype=float))
    detuning = np.asarray(detuning, dtype=float)
    gen = np.hypot(drive, detuning)
    half = 0.5 * gen * (area / rabi)
    c = np.cos(half)
    s = np.sin(half)
    with np.errstate(invalid="ignore", divide="ignore"):
        nt = np.where(gen > 0, drive / gen, 0.0)
        nz = np.where(gen > 0, detuning / gen, 0.0)
    e = np.exp(1j * phase)
    u00 = c - 1j * s * nz
    u11 = c + 1j * s * nz
    u01 = -1j * s * nt * np.conj(e)
    u10 = -1j * s * nt * e
    return u00, u01, u10, u11


def simulate_pulse(pulse: PhysicalPulse, noise: PulseNoise = NOISELESS) -> np.ndarray:
    """Exact rotating-frame propagator for one constant-amplitude pulse.

    The generalised Rabi frequency is ``sqrt((rabi (1+eps))^2 + delta^2)``
    and the pulse lasts ``area / rabi``.
    """
    u00, u01, u10, u11 = pulse_elements(
        pulse.phase, pulse.area, pulse.rabi, noise.amplitude_error, noise.detuning
    )
    return np.array([[u00, u01], [u10, u11]], dtype=complex)


def simulate_sequence(
    pulses: Sequence[PhysicalPulse], noise: PulseNoise = NOISELESS, bb1: bool = False
) -> np.ndarray:
    """Time-ordered product of pulse propagators with detuning held fixed."""
    u = I2.copy()
    for p in expand_all(pulses, bb1):
        u = simulate_pulse(p, noise) @ u
    return u


def evolve_batch(
    c0: np.ndarray,
    c1: np.ndarray,
    pulses: Sequence[PhysicalPulse],
    amplitude_error: np.ndarray,
    detuning: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate a batch of states through already-expanded ``pulses``.

    ``amplitude_error`` and ``detuning`` are per-state arrays (or scalars).
    Returns new ``(c0, c1)`` arrays.
    """
    for p in pulses:
        u00, u01, u10, u11 = pulse_elements(p.phase, p.area, p.rabi, amplitude_error, detuning)
        c0, c1 = u00 * c0 + u01 * c1, u10 * c0 + u11 * c1
    return c0, c1
