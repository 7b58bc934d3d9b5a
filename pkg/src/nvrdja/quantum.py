"""Two-level state algebra: density matrices, Bloch vectors, SU(2) rotations.

Rotation convention: R_n(theta) = exp(-i theta (n . sigma) / 2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidStateError

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "BlochVector",
    "DensityMatrix",
    "Rotation",
    "density_from_bloch",
    "bloch_from_density",
    "trace_distance",
    "apply_rotation",
    "population_p0",
    "X_AXIS",
    "Y_AXIS",
    "Z_AXIS",
]

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

STATE_TOL = 1e-12
# ensemble averages may drift this far below zero before we call it an error
PSD_HARD_TOL = 1e-9
BLOCH_TOL = 1e-9

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def validate(self) -> "BlochVector":
        if not all(np.isfinite(self)):
            raise InvalidStateError(f"non-finite Bloch vector {tuple(self)}")
        if self.norm > 1.0 + BLOCH_TOL:
            raise InvalidStateError(f"Bloch vector norm {self.norm:.6g} exceeds 1")
        return self


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable 2x2 qubit state. Validated on construction."""

    elements: np.ndarray
    tol: float = STATE_TOL

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.shape != (2, 2):
            raise InvalidStateError(f"expected 2x2 matrix, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise InvalidStateError("density matrix has non-finite entries")
        if np.max(np.abs(rho - rho.conj().T)) > self.tol:
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > self.tol:
            raise InvalidStateError(f"trace {np.trace(rho).real:.15g} != 1")
        evals = np.linalg.eigvalsh(rho)
        if evals[0] < -self.tol:
            raise InvalidStateError(f"negative eigenvalue {evals[0]:.3g}")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix":
        psi = np.asarray(ket, dtype=complex).reshape(2)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def ground(cls) -> "DensityMatrix":
        """|0><0|, the bright m_s = 0 state."""
        return cls(np.array([[1, 0], [0, 0]], dtype=complex))

    @classmethod
    def from_average(cls, rho) -> "DensityMatrix":
        """Wrap an ensemble-averaged matrix.

        Averaging exact unitary orbits only introduces round-off, so the result is
        symmetrised and renormalised; eigenvalues below ``-PSD_HARD_TOL`` are an error.
        """
        rho = np.asarray(rho, dtype=complex)
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.trace(rho).real
        evals = np.linalg.eigvalsh(rho)
        if evals[0] < -PSD_HARD_TOL:
            raise InvalidStateError(f"ensemble average not PSD (eigenvalue {evals[0]:.3g})")
        return cls(rho, tol=PSD_HARD_TOL)

    def bloch(self) -> BlochVector:
        return bloch_from_density(self)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.elements @ self.elements)))

    def allclose(self, other: "DensityMatrix", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.elements, other.elements, rtol=0.0, atol=atol))

    def __repr__(self):
        x, y, z = self.bloch()
        return f"DensityMatrix(bloch=({x:.6g}, {y:.6g}, {z:.6g}))"


@dataclass(frozen=True)
class Rotation:
    """Rotation by ``angle`` radians about the unit ``axis``."""

    axis: tuple
    angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        n = np.linalg.norm(axis)
        if not np.isfinite(self.angle) or n == 0.0 or not np.isfinite(n):
            raise InvalidStateError(f"invalid rotation axis={self.axis} angle={self.angle}")
        if abs(n - 1.0) > 1e-12:
            raise InvalidStateError(f"rotation axis norm {n!r} is not 1")
        object.__setattr__(self, "axis", tuple(float(a) for a in axis))

    @classmethod
    def about(cls, axis, angle) -> "Rotation":
        """Like the constructor but normalises ``axis`` first."""
        axis = np.asarray(axis, dtype=float)
        return cls(tuple(axis / np.linalg.norm(axis)), float(angle))

    def matrix(self) -> np.ndarray:
        nx, ny, nz = self.axis
        n_sigma = nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
        half = 0.5 * self.angle
        return np.cos(half) * I2 - 1j * np.sin(half) * n_sigma


def density_from_bloch(v) -> DensityMatrix:
    v = BlochVector(*map(float, v)).validate()
    rho = 0.5 * (I2 + v.x * SIGMA_X + v.y * SIGMA_Y + v.z * SIGMA_Z)
    return DensityMatrix(rho)


def bloch_from_density(rho: DensityMatrix) -> BlochVector:
    m = rho.elements
    return BlochVector(
        float(2.0 * m[0, 1].real),
        float(-2.0 * m[0, 1].imag),
        float((m[0, 0] - m[1, 1]).real),
    )


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Half the trace norm of rho1 - rho2."""
    diff = rho1.elements - rho2.elements
    evals = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(min(1.0, 0.5 * np.sum(np.abs(evals))))


def apply_rotation(rho: DensityMatrix, r: Rotation) -> DensityMatrix:
    u = r.matrix()
    out = u @ rho.elements @ u.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def population_p0(rho: DensityMatrix) -> float:
    """P0 = tr(|0><0| rho)."""
    return float(rho.elements[0, 0].real)
