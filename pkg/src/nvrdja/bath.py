"""Quasi-static structured dephasing bath.

A spectrum is a weighted sum of Gaussian detuning modes. Each mode is stored with
the width parameter ``w`` of the profile ``exp(-2 ((delta - center) / w)**2)``, so
the Gaussian standard deviation is ``w / 2``. A mode with ``w == 0`` is a point mass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from ._kernels import TWO_PI_MHZ_NS
from .errors import ConfigurationError, InputError

__all__ = [
    "Mode",
    "BathSpectrum",
    "PolarizationModel",
    "DEFAULT_SPLITTING_MHZ",
    "DEFAULT_ENVELOPE_NS",
    "sigma_for_envelope",
    "paper_default_spectrum",
    "coherence_function",
    "sample_detuning",
    "sample_detunings",
    "quadrature_nodes",
    "polarize_spectrum",
]

DEFAULT_SPLITTING_MHZ = 2.170
DEFAULT_ENVELOPE_NS = 1382.0
MAX_NODES_PER_MODE = 512


@dataclass(frozen=True)
class Mode:
    weight: float
    center: float  # MHz
    width: float  # MHz, profile parameter w (= 2 sigma)

    @property
    def sigma(self) -> float:
        return 0.5 * self.width


@dataclass(frozen=True)
class BathSpectrum:
    """Immutable multi-Gaussian detuning distribution. Weights are normalised to 1."""

    modes: tuple

    def __post_init__(self):
        modes = tuple(m if isinstance(m, Mode) else Mode(*m) for m in self.modes)
        if not modes:
            raise InputError("spectrum needs at least one mode")
        for m in modes:
            if not (np.isfinite(m.weight) and np.isfinite(m.center) and np.isfinite(m.width)):
                raise InputError(f"non-finite mode {m}")
            if m.weight < 0:
                raise InputError(f"negative mode weight {m.weight}")
            if m.width < 0:
                raise InputError(f"negative mode width {m.width}")
        total = sum(m.weight for m in modes)
        if total <= 0:
            raise InputError("mode weights must sum to a positive value")
        modes = tuple(Mode(m.weight / total, float(m.center), float(m.width)) for m in modes)
        object.__setattr__(self, "modes", modes)

    @classmethod
    def from_sigmas(cls, triples) -> "BathSpectrum":
        """Build from ``(weight, center MHz, sigma MHz)`` triples."""
        return cls(tuple(Mode(w, c, 2.0 * s) for w, c, s in triples))

    @classmethod
    def point_mass(cls, delta: float = 0.0) -> "BathSpectrum":
        return cls((Mode(1.0, float(delta), 0.0),))

    @classmethod
    def single_mode(cls, sigma: float, center: float = 0.0) -> "BathSpectrum":
        return cls((Mode(1.0, float(center), 2.0 * sigma),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.modes])

    @property
    def centers(self) -> np.ndarray:
        return np.array([m.center for m in self.modes])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([m.sigma for m in self.modes])

    def is_point_mass(self) -> bool:
        return len(self.active_modes()) == 1 and self.active_modes()[0].width == 0.0

    def active_modes(self) -> tuple:
        return tuple(m for m in self.modes if m.weight > 0)


@dataclass(frozen=True)
class PolarizationModel:
    """p(B) = min(1, (B / saturation_field) ** exponent); field in mT."""

    saturation_field: float = 35.0
    exponent: float = 1.0

    def __post_init__(self):
        if not self.saturation_field > 0:
            raise InputError("saturation_field must be > 0")
        if not self.exponent > 0:
            raise InputError("exponent must be > 0")

    def fraction(self, field: float) -> float:
        if field < 0 or not np.isfinite(field):
            raise InputError(f"magnetic field must be a finite value >= 0, got {field}")
        return float(min(1.0, (field / self.saturation_field) ** self.exponent))


def sigma_for_envelope(envelope_ns: float) -> float:
    """Gaussian sigma [MHz] whose coherence decays as exp(-t**2 / T**2).

    exp(-(2 pi sigma t)**2 / 2) = exp(-t**2/T**2)  =>  sigma = sqrt(2) / (2 pi T).
    """
    return np.sqrt(2.0) / (2.0 * np.pi * envelope_ns * 1e-3)


def paper_default_spectrum(
    splitting: float = DEFAULT_SPLITTING_MHZ, envelope_ns: float = DEFAULT_ENVELOPE_NS
) -> BathSpectrum:
    """Three equal-weight modes at (-splitting, 0, +splitting) from the 14N hyperfine triplet."""
    sigma = sigma_for_envelope(envelope_ns)
    return BathSpectrum.from_sigmas([(1.0, -splitting, sigma), (1.0, 0.0, sigma), (1.0, splitting, sigma)])


def coherence_function(s: BathSpectrum, t):
    """W(t) = <exp(i 2 pi delta t)> over the spectrum; t in ns (scalar or array)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for m in s.modes:
        if m.weight == 0:
            continue
        phase = TWO_PI_MHZ_NS * m.center * t
        env = np.exp(-0.5 * (TWO_PI_MHZ_NS * m.sigma * t) ** 2)
        out = out + m.weight * np.exp(1j * phase) * env
    return out[()] if out.ndim == 0 else out


def sample_detunings(s: BathSpectrum, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` detunings [MHz]: mode chosen by weight, then a Gaussian draw."""
    idx = rng.choice(len(s.modes), size=n, p=s.weights)
    z = rng.standard_normal(n)
    return s.centers[idx] + s.sigmas[idx] * z


def sample_detuning(s: BathSpectrum, rng: np.random.Generator) -> float:
    return float(sample_detunings(s, 1, rng)[0])


def _standard_normal_rule(n: int):
    # hermegauss overflows past ~170 nodes; Golub-Welsch on the Jacobi matrix is stable
    if n <= 150:
        x, w = hermegauss(n)
        return x, w / w.sum()
    off = np.sqrt(np.arange(1.0, n))
    x, vecs = np.linalg.eigh(np.diag(off, 1) + np.diag(off, -1))
    w = vecs[0] ** 2
    return x, w / w.sum()


def quadrature_nodes(s: BathSpectrum, n_per_mode: int):
    """Gauss-Hermite nodes per mode; returns ``(detunings, weights)`` arrays.

    Weights sum to 1. Zero-weight modes contribute no nodes.
    """
    n_per_mode = int(n_per_mode)
    if n_per_mode < 1:
        raise ConfigurationError("n_per_mode must be >= 1")
    if n_per_mode > MAX_NODES_PER_MODE:
        raise ConfigurationError(f"n_per_mode={n_per_mode} exceeds {MAX_NODES_PER_MODE}")
    x, w = _standard_normal_rule(n_per_mode)
    nodes, weights = [], []
    for m in s.active_modes():
        if m.width == 0.0:
            nodes.append(np.array([m.center]))
            weights.append(np.array([m.weight]))
        else:
            nodes.append(m.center + m.sigma * x)
            weights.append(m.weight * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    return nodes, weights / weights.sum()


def _destination_index(s: BathSpectrum) -> int:
    # the mode the drive is (re)centred on: nearest to zero detuning
    return int(np.argmin(np.abs(s.centers)))


def polarize_spectrum(s: BathSpectrum, field: float, model: PolarizationModel = PolarizationModel()) -> BathSpectrum:
    """Move a fraction p(B) of every non-destination mode's weight onto the centre mode."""
    p = model.fraction(field)
    if p == 0.0:
        return s
    dest = _destination_index(s)
    modes = list(s.modes)
    moved = 0.0
    for i, m in enumerate(modes):
        if i == dest:
            continue
        kept = 0.0 if p == 1.0 else m.weight * (1.0 - p)
        moved += m.weight - kept
        modes[i] = Mode(kept, m.center, m.width)
    d = modes[dest]
    modes[dest] = Mode(d.weight + moved, d.center, d.width)
    return BathSpectrum(tuple(modes))
