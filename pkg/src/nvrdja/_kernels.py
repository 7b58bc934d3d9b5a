"""Hot loops for ensemble evolution.

Two interchangeable implementations of the same kernel:

* ``ensemble_average_numba`` -- ``@njit`` scalar loop over detunings,
* ``ensemble_average_numpy`` -- vectorised over detunings.

``ensemble_average`` points at the numba version unless numba is missing or the
environment variable ``NVRDJA_DISABLE_NUMBA`` is set to a truthy value.

Segments are passed as parallel arrays (struct-of-arrays):
kind (0 delay, 1 finite pulse, 2 instantaneous rotation), phase [rad],
rabi [MHz], duration [ns], angle [rad]. Frequencies are cyclic MHz, times ns.
"""
import os

import numpy as np

DELAY, PULSE, INSTANT = 0, 1, 2

# 2*pi * MHz * ns -> radians
TWO_PI_MHZ_NS = 2.0 * np.pi * 1e-3

_flag = os.environ.get("NVRDJA_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    njit = None

HAVE_NUMBA = njit is not None


def _jit(fn):
    return njit(cache=True)(fn) if HAVE_NUMBA else fn



@_jit
def _segment_unitary(kind, phase, rabi, duration, angle, delta):
    """Entries (u00, u01, u10, u11) of exp(-i theta/2 n.sigma) for one segment."""
    if kind == INSTANT:
        half = 0.5 * angle
        c = np.cos(half)
        s = np.sin(half)
        nx = np.cos(phase)
        ny = np.sin(phase)
        nz = 0.0
    elif kind == DELAY:
        half = 0.5 * TWO_PI_MHZ_NS * delta * duration
        return (complex(np.cos(half), -np.sin(half)), 0j, 0j, complex(np.cos(half), np.sin(half)))
    else:
        omega = np.sqrt(rabi * rabi + delta * delta)
        half = 0.5 * TWO_PI_MHZ_NS * omega * duration
        c = np.cos(half)
        s = np.sin(half)
        nx = rabi * np.cos(phase) / omega
        ny = rabi * np.sin(phase) / omega
        nz = delta / omega
    return (complex(c, -s * nz), complex(-s * ny, -s * nx), complex(s * ny, -s * nx), complex(c, s * nz))


@_jit
def _accumulate(kind, phase, rabi, duration, angle, detunings, weights, rho0):
    out = np.zeros((2, 2), dtype=np.complex128)
    r00 = rho0[0, 0]
    r01 = rho0[0, 1]
    r10 = rho0[1, 0]
    r11 = rho0[1, 1]
    for k in range(detunings.shape[0]):
        d = detunings[k]
        u00 = 1.0 + 0.0j
        u01 = 0.0j
        u10 = 0.0j
        u11 = 1.0 + 0.0j
        for s in range(kind.shape[0]):
            m00, m01, m10, m11 = _segment_unitary(kind[s], phase[s], rabi[s], duration[s], angle[s], d)
            a00 = m00 * u00 + m01 * u10
            a01 = m00 * u01 + m01 * u11
            a10 = m10 * u00 + m11 * u10
            a11 = m10 * u01 + m11 * u11
            u00, u01, u10, u11 = a00, a01, a10, a11
        # t = U rho0
        t00 = u00 * r00 + u01 * r10
        t01 = u00 * r01 + u01 * r11
        t10 = u10 * r00 + u11 * r10
        t11 = u10 * r01 + u11 * r11
        w = weights[k]
        # (U rho0) U^dagger
        out[0, 0] += w * (t00 * np.conj(u00) + t01 * np.conj(u01))
        out[0, 1] += w * (t00 * np.conj(u10) + t01 * np.conj(u11))
        out[1, 0] += w * (t10 * np.conj(u00) + t11 * np.conj(u01))
        out[1, 1] += w * (t10 * np.conj(u10) + t11 * np.conj(u11))
    return out


def ensemble_average_numpy(kind, phase, rabi, duration, angle, detunings, weights, rho0):
    """Weighted average of U(d) rho0 U(d)^dagger over detunings, vectorised."""
    d = np.asarray(detunings, dtype=np.float64)
    u00 = np.ones_like(d, dtype=np.complex128)
    u01 = np.zeros_like(u00)
    u10 = np.zeros_like(u00)
    u11 = np.ones_like(u00)
    for s in range(len(kind)):
        if kind[s] == DELAY:
            half = 0.5 * TWO_PI_MHZ_NS * d * duration[s]
            m00 = np.exp(-1j * half)
            m11 = np.conj(m00)
            u00, u01, u10, u11 = m00 * u00, m00 * u01, m11 * u10, m11 * u11
            continue
        if kind[s] == INSTANT:
            half = 0.5 * angle[s]
            c = np.full_like(d, np.cos(half))
            sn = np.full_like(d, np.sin(half))
            nx = np.cos(phase[s])
            ny = np.sin(phase[s])
            nz = 0.0
        else:
            omega = np.sqrt(rabi[s] ** 2 + d * d)
            half = 0.5 * TWO_PI_MHZ_NS * omega * duration[s]
            c = np.cos(half)
            sn = np.sin(half)
            nx = rabi[s] * np.cos(phase[s]) / omega
            ny = rabi[s] * np.sin(phase[s]) / omega
            nz = d / omega
        m00 = c - 1j * sn * nz
        m01 = -sn * ny - 1j * sn * nx
        m10 = sn * ny - 1j * sn * nx
        m11 = c + 1j * sn * nz
        u00, u01, u10, u11 = (
            m00 * u00 + m01 * u10,
            m00 * u01 + m01 * u11,
            m10 * u00 + m11 * u10,
            m10 * u01 + m11 * u11,
        )
    r = rho0
    t00 = u00 * r[0, 0] + u01 * r[1, 0]
    t01 = u00 * r[0, 1] + u01 * r[1, 1]
    t10 = u10 * r[0, 0] + u11 * r[1, 0]
    t11 = u10 * r[0, 1] + u11 * r[1, 1]
    w = np.asarray(weights, dtype=np.float64)
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = np.sum(w * (t00 * np.conj(u00) + t01 * np.conj(u01)))
    out[0, 1] = np.sum(w * (t00 * np.conj(u10) + t01 * np.conj(u11)))
    out[1, 0] = np.sum(w * (t10 * np.conj(u00) + t11 * np.conj(u01)))
    out[1, 1] = np.sum(w * (t10 * np.conj(u10) + t11 * np.conj(u11)))
    return out


def ensemble_average_numba(kind, phase, rabi, duration, angle, detunings, weights, rho0):
    """Same contract as :func:`ensemble_average_numpy`; sequential, fixed-order reduction."""
    if not HAVE_NUMBA:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    return _accumulate(
        np.ascontiguousarray(kind, dtype=np.int64),
        np.ascontiguousarray(phase, dtype=np.float64),
        np.ascontiguousarray(rabi, dtype=np.float64),
        np.ascontiguousarray(duration, dtype=np.float64),
        np.ascontiguousarray(angle, dtype=np.float64),
        np.ascontiguousarray(detunings, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(rho0, dtype=np.complex128),
    )


if not HAVE_NUMBA or _disabled:
    BACKEND = "numpy"
    ensemble_average = ensemble_average_numpy
else:
    BACKEND = "numba"
    ensemble_average = ensemble_average_numba
