"""Pulse schedules, their exact rotating-frame evolution, and the photon-count readout model.

Drive Hamiltonian for one segment (cyclic MHz, ns; RWA):
    H = pi*delta*sigma_z + pi*rabi*(cos(phase) sigma_x + sin(phase) sigma_y)
Every segment is piecewise constant, so each propagator is a closed-form SU(2) element.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .bath import BathSpectrum, quadrature_nodes, sample_detunings
from .errors import ConfigurationError, InputError
from .quantum import DensityMatrix

__all__ = [
    "AXIS_PHASES",
    "PulseSegment",
    "PulseSequence",
    "Quadrature",
    "MonteCarlo",
    "parse_method",
    "rotation_pulse",
    "instant_rotation",
    "delay",
    "evolve",
    "ensemble_evolve",
    "SignalModel",
    "P0Estimate",
    "counts_from_p0",
    "p0_from_counts",
]

AXIS_PHASES = {"X": 0.0, "Y": 0.5 * np.pi, "-X": np.pi, "-Y": 1.5 * np.pi}
_KIND_CODES = {"delay": _kernels.DELAY, "pulse": _kernels.PULSE, "instant": _kernels.INSTANT}


@dataclass(frozen=True)
class PulseSegment:
    """One schedule element.

    ``kind`` is ``"pulse"`` (finite rectangular drive), ``"delay"`` (free evolution)
    or ``"instant"`` (ideal zero-duration rotation by ``angle``).
    """

    kind: str
    duration: float = 0.0  # ns
    phase: float = 0.0  # rad, 0 = X
    rabi: float = 0.0  # MHz
    angle: float = 0.0  # rad, instant only

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise InputError(f"unknown segment kind {self.kind!r}")
        if not np.isfinite(self.duration) or self.duration < 0:
            raise InputError(f"segment duration must be finite and >= 0, got {self.duration}")
        if self.kind == "pulse":
            if not self.duration > 0:
                raise InputError("pulse duration must be > 0")
            if not (np.isfinite(self.rabi) and self.rabi > 0):
                raise InputError("pulse rabi frequency must be > 0")
        if self.kind == "instant" and self.duration != 0:
            raise InputError("instant rotations have zero duration")

    @property
    def rotation_angle(self) -> float:
        """Nominal (zero-detuning) rotation angle in radians."""
        if self.kind == "pulse":
            return _kernels.TWO_PI_MHZ_NS * self.rabi * self.duration
        return self.angle

    def as_instant(self) -> "PulseSegment":
        if self.kind != "pulse":
            return self
        return PulseSegment("instant", phase=self.phase, angle=self.rotation_angle)


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.segments + tuple(other.segments), self.label or other.label)

    def __len__(self):
        return len(self.segments)

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def ideal(self) -> "PulseSequence":
        """Same schedule with every finite pulse replaced by an instantaneous rotation."""
        return PulseSequence(tuple(s.as_instant() for s in self.segments), self.label)

    @cached_property
    def arrays(self):
        segs = self.segments
        return (
            np.array([_KIND_CODES[s.kind] for s in segs], dtype=np.int64),
            np.array([s.phase for s in segs], dtype=np.float64),
            np.array([s.rabi for s in segs], dtype=np.float64),
            np.array([s.duration for s in segs], dtype=np.float64),
            np.array([s.angle for s in segs], dtype=np.float64),
        )


def _axis_phase(axis: str) -> float:
    try:
        return AXIS_PHASES[axis]
    except KeyError:
        raise InputError(f"axis must be one of {sorted(AXIS_PHASES)}, got {axis!r}") from None


def rotation_pulse(axis: str, angle: float, rabi: float) -> PulseSegment:
    """Finite pulse realising ``angle`` about ``axis``; duration = angle / (2 pi rabi)."""
    if not angle > 0:
        raise InputError(f"rotation angle must be > 0, got {angle}")
    if not rabi > 0:
        raise InputError(f"rabi frequency must be > 0, got {rabi}")
    return PulseSegment("pulse", duration=angle / (_kernels.TWO_PI_MHZ_NS * rabi), phase=_axis_phase(axis), rabi=rabi)


def instant_rotation(axis: str, angle: float) -> PulseSegment:
    return PulseSegment("instant", phase=_axis_phase(axis), angle=float(angle))


def delay(duration: float) -> PulseSegment:
    return PulseSegment("delay", duration=float(duration))


@dataclass(frozen=True)
class Quadrature:
    n_per_mode: int = 64

    def nodes(self, s: BathSpectrum):
        return quadrature_nodes(s, self.n_per_mode)

    def __str__(self):
        return f"quadrature:{self.n_per_mode}"


@dataclass(frozen=True)
class MonteCarlo:
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be >= 1")

    def nodes(self, s: BathSpectrum):
        return _mc_nodes(s, self.n_samples, self.seed)

    def __str__(self):
        return f"mc:{self.n_samples}"


@lru_cache(maxsize=16)
def _mc_nodes(s, n, seed):
    d = sample_detunings(s, n, np.random.default_rng(seed))
    w = np.full(n, 1.0 / n)
    d.setflags(write=False)
    w.setflags(write=False)
    return d, w


def parse_method(text: str, seed: int = 0):
    """``"quadrature:64"`` / ``"mc:100000"`` -> method object."""
    name, _, num = text.partition(":")
    try:
        n = int(num) if num else None
    except ValueError:
        raise ConfigurationError(f"bad method count in {text!r}") from None
    if name in ("quadrature", "quad"):
        return Quadrature(n or 64)
    if name in ("mc", "montecarlo"):
        return MonteCarlo(n or 100_000, seed)
    raise ConfigurationError(f"unknown method {text!r}; use quadrature:N or mc:N")


def _propagate(rho0: DensityMatrix, seq: PulseSequence, detunings, weights, backend=None):
    kernel = backend or _kernels.ensemble_average
    return kernel(*seq.arrays, detunings, weights, rho0.elements)


def evolve(rho0: DensityMatrix, seq: PulseSequence, delta: float) -> DensityMatrix:
    """Exact unitary evolution for one quasi-static detuning ``delta`` [MHz]."""
    out = _propagate(rho0, seq, np.array([float(delta)]), np.array([1.0]))
    return DensityMatrix.from_average(out)


def ensemble_evolve(rho0: DensityMatrix, seq: PulseSequence, s: BathSpectrum, method=Quadrature()) -> DensityMatrix:
    """Bath-averaged state: sum_k w_k U(d_k) rho0 U(d_k)^dagger."""
    if s.is_point_mass():
        return evolve(rho0, seq, s.active_modes()[0].center)
    detunings, weights = method.nodes(s)
    return DensityMatrix.from_average(_propagate(rho0, seq, detunings, weights))


@dataclass(frozen=True)
class SignalModel:
    """Photon counts per shot for the bright (c_max) and dark (c_min) states."""

    c_max: float
    c_min: float
    shots: int = 1_000_000

    def __post_init__(self):
        if not self.c_max > 0 or self.c_min < 0:
            raise InputError("need c_max > 0 and c_min >= 0")
        if not self.c_max > self.c_min:
            raise InputError("c_max must exceed c_min")
        if self.shots < 1:
            raise InputError("shots must be positive")


class P0Estimate(NamedTuple):
    p0: float
    out_of_range: bool


def counts_from_p0(p0: float, m: SignalModel, noisy: bool = False, seed=None) -> float:
    """Total counts over ``m.shots`` shots; Poisson-distributed when ``noisy``."""
    if not (-1e-9 <= p0 <= 1.0 + 1e-9):
        raise InputError(f"p0={p0} outside [0, 1]")
    mean = (m.c_min + p0 * (m.c_max - m.c_min)) * m.shots
    if not noisy:
        return float(mean)
    return float(np.random.default_rng(seed).poisson(max(mean, 0.0)))


def p0_from_counts(counts: float, m: SignalModel) -> P0Estimate:
    p0 = (counts / m.shots - m.c_min) / (m.c_max - m.c_min)
    return P0Estimate(float(p0), not (-0.05 <= p0 <= 1.05))
