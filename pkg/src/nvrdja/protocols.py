"""Experiment builders and runners: RDJA delay scan, echo-protected RDJA,
optimal-pair trace distance, single-qubit tomography, Rabi calibration and the
field-driven Markovian transition.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .analysis import TraceDistanceSeries, non_markovianity_revival_sum
from .bath import BathSpectrum, PolarizationModel, polarize_spectrum
from .errors import InputError
from .pulses import (
    PulseSequence,
    Quadrature,
    delay,
    ensemble_evolve,
    evolve,
    instant_rotation,
    rotation_pulse,
)
from .quantum import DensityMatrix, density_from_bloch, population_p0, trace_distance

__all__ = [
    "DEFAULT_RABI_MHZ",
    "Oracle",
    "ORACLES",
    "get_oracle",
    "ScanResult",
    "EchoScanResult",
    "MarkovTransitionResult",
    "build_rdja_sequence",
    "build_echo_rdja_sequence",
    "ideal_outcome",
    "success_probability",
    "echo_offset",
    "run_rdja_scan",
    "run_echo_scan",
    "run_trace_distance_experiment",
    "run_qst",
    "run_rabi_scan",
    "run_markov_transition",
]

DEFAULT_RABI_MHZ = 5.37
HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class Oracle:
    id: str
    phase: float
    kind: str  # "constant" | "balanced"


ORACLES = {
    "U1": Oracle("U1", 0.0, "constant"),
    "U2": Oracle("U2", 2 * np.pi, "constant"),
    "U3": Oracle("U3", 3 * np.pi, "balanced"),
    "U4": Oracle("U4", np.pi, "balanced"),
}


def get_oracle(o) -> Oracle:
    if isinstance(o, Oracle):
        if ORACLES.get(o.id) != o:
            raise InputError(f"unknown oracle {o!r}")
        return o
    try:
        return ORACLES[o]
    except KeyError:
        raise InputError(f"unknown oracle {o!r}; expected one of U1..U4") from None


def _pulse(axis, angle, rabi, ideal):
    return instant_rotation(axis, angle) if ideal else rotation_pulse(axis, angle, rabi)


def oracle_segments(o, rabi: float, ideal: bool = False) -> list:
    """(pi/2)_X, (phi)_Y, (-pi/2)_X in playing order; the Y pulse is omitted when phi = 0."""
    o = get_oracle(o)
    segs = [_pulse("X", HALF_PI, rabi, ideal)]
    if o.phase > 0:
        segs.append(_pulse("Y", o.phase, rabi, ideal))
    segs.append(_pulse("-X", HALF_PI, rabi, ideal))
    return segs


def _rdja_block(o, rabi, ideal):
    return [_pulse("X", HALF_PI, rabi, ideal)] + oracle_segments(o, rabi, ideal)


def build_rdja_sequence(o, tau: float, rabi: float = DEFAULT_RABI_MHZ, ideal: bool = False) -> PulseSequence:
    """Opening (pi/2)_X, oracle, delay ``tau`` [ns], readout (pi/2)_X."""
    if tau < 0:
        raise InputError("delay must be >= 0")
    o = get_oracle(o)
    segs = _rdja_block(o, rabi, ideal) + [delay(tau), _pulse("X", HALF_PI, rabi, ideal)]
    return PulseSequence(segs, f"rdja-{o.id}")


def build_echo_rdja_sequence(o, t1: float, t2: float, rabi: float = DEFAULT_RABI_MHZ, ideal: bool = False) -> PulseSequence:
    """RDJA block, delay t1, (pi)_X refocusing pulse, delay t2, readout (pi/2)_X."""
    if t1 < 0 or t2 < 0:
        raise InputError("echo delays must be >= 0")
    o = get_oracle(o)
    segs = _rdja_block(o, rabi, ideal) + [
        delay(t1),
        _pulse("X", np.pi, rabi, ideal),
        delay(t2),
        _pulse("X", HALF_PI, rabi, ideal),
    ]
    return PulseSequence(segs, f"echo-rdja-{o.id}")


def ideal_outcome(seq: PulseSequence) -> float:
    """P0 of ``seq`` from |0> with instantaneous pulses and no detuning."""
    return population_p0(evolve(DensityMatrix.ground(), seq.ideal(), 0.0))


def success_probability(p0, ideal_p0):
    """Probability of the correct answer: P0 when the ideal outcome is bright, else 1 - P0."""
    return p0 if ideal_p0 > 0.5 else 1.0 - p0


def _azimuth_slope(fn, eps=1e-4):
    a = fn(+eps)
    b = fn(-eps)
    dphi = np.angle(np.exp(1j * (np.arctan2(a[1], a[0]) - np.arctan2(b[1], b[0]))))
    return dphi / (2 * eps)


def echo_offset(o, rabi: float = DEFAULT_RABI_MHZ, ideal: bool = False) -> float:
    """Extra delay [ns] on the second echo arm that refocuses free precession to first order.

    Finite pulses precess the state as if part of their duration were free evolution.
    The refocusing condition t1 + s_block = t2 + s_readout gives t2 = t1 + offset, with
    s_block from the azimuth drift of the state leaving the RDJA block and s_readout
    from the drift of the readout's effective measurement axis.
    """
    if ideal:
        return 0.0
    o = get_oracle(o)
    block = PulseSequence(_rdja_block(o, rabi, False))
    readout = PulseSequence([_pulse("X", HALF_PI, rabi, False)])
    ground = DensityMatrix.ground()

    def state_xy(d):
        return evolve(ground, block, d).bloch()

    basis = [density_from_bloch(v) for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]

    def axis_xy(d):
        return [2.0 * population_p0(evolve(b, readout, d)) - 1.0 for b in basis]

    slope = _azimuth_slope(state_xy) + _azimuth_slope(axis_xy)
    return float(slope / _kernels.TWO_PI_MHZ_NS)


@dataclass
class ScanResult:
    scan_variable: np.ndarray  # ns
    curves: dict  # name -> P0 array
    contrast: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.scan_variable, dtype=float)
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise InputError("scan grid must be strictly increasing")
        self.scan_variable = grid


@dataclass
class EchoScanResult(ScanResult):
    """Echo scan reported against the echo condition: row ``t2`` means t2 - t1 = 0 at the echo."""

    success_constant: np.ndarray = None
    success_balanced: np.ndarray = None
    pos: np.ndarray = None


def _method_label(method):
    return str(method)


def run_rdja_scan(
    spectrum: BathSpectrum,
    rabi: float = DEFAULT_RABI_MHZ,
    taus=np.arange(0.0, 801.0, 10.0),
    method=Quadrature(64),
    ideal_pulses: bool = False,
    oracles=("U1", "U2", "U3", "U4"),
) -> ScanResult:
    """Ensemble P0 of every oracle at every delay; contrast = P0(U3) - P0(U1)."""
    taus = np.asarray(taus, dtype=float)
    ground = DensityMatrix.ground()
    curves = {}
    for name in oracles:
        curves[f"p0_{name.lower()}"] = np.array(
            [
                population_p0(ensemble_evolve(ground, build_rdja_sequence(name, t, rabi, ideal_pulses), spectrum, method))
                for t in taus
            ]
        )
    contrast = curves.get("p0_u3", np.full(taus.shape, np.nan)) - curves.get("p0_u1", np.full(taus.shape, np.nan))
    meta = {"rabi_mhz": rabi, "method": _method_label(method), "ideal_pulses": ideal_pulses}
    return ScanResult(taus, curves, contrast, meta)


def run_echo_scan(
    spectrum: BathSpectrum,
    rabi: float = DEFAULT_RABI_MHZ,
    t1: float = 170.0,
    t2_grid=None,
    method=Quadrature(64),
    ideal_pulses: bool = False,
    constant="U1",
    balanced="U3",
    align: bool = True,
) -> EchoScanResult:
    """Scan the second echo arm for a constant and a balanced oracle.

    With ``align`` each oracle's curve is shifted by its :func:`echo_offset` so the
    echo sits at reported ``t2 == t1`` for both. ``pos`` is the larger of the two
    success probabilities at each row.
    """
    if t2_grid is None:
        t2_grid = np.arange(max(0.0, t1 - 150.0), t1 + 151.0, 10.0)
    t2_grid = np.asarray(t2_grid, dtype=float)
    ground = DensityMatrix.ground()
    out, succ, offsets = {}, {}, {}
    for label, name in (("constant", constant), ("balanced", balanced)):
        off = echo_offset(name, rabi, ideal_pulses) if align else 0.0
        offsets[name] = off
        if np.any(t2_grid + off < 0):
            raise InputError(f"aligned t2 grid reaches negative delay for {name}")
        target = ideal_outcome(build_echo_rdja_sequence(name, t1, t1, rabi))
        p0 = np.array(
            [
                population_p0(
                    ensemble_evolve(ground, build_echo_rdja_sequence(name, t1, t2 + off, rabi, ideal_pulses), spectrum, method)
                )
                for t2 in t2_grid
            ]
        )
        out[f"p0_{label}"] = p0
        succ[label] = success_probability(p0, target)
    meta = {
        "rabi_mhz": rabi,
        "t1_ns": t1,
        "method": _method_label(method),
        "ideal_pulses": ideal_pulses,
        "constant": constant,
        "balanced": balanced,
        "offsets_ns": offsets,
        "aligned": align,
    }
    return EchoScanResult(
        t2_grid,
        out,
        out["p0_constant"] - out["p0_balanced"],
        meta,
        success_constant=succ["constant"],
        success_balanced=succ["balanced"],
        pos=np.maximum(succ["constant"], succ["balanced"]),
    )


def run_trace_distance_experiment(
    spectrum: BathSpectrum,
    rabi: float = DEFAULT_RABI_MHZ,
    times=np.arange(0.0, 2001.0, 10.0),
    method=Quadrature(64),
    ideal_pulses: bool = True,
) -> TraceDistanceSeries:
    """Trace distance between the (|0> -+ i|1>)/sqrt2 pair after free evolution t."""
    times = np.asarray(times, dtype=float)
    ground = DensityMatrix.ground()
    prep1 = _pulse("X", HALF_PI, rabi, ideal_pulses)
    prep2 = _pulse("-X", HALF_PI, rabi, ideal_pulses)
    values = np.empty(times.shape)
    for i, t in enumerate(times):
        r1 = ensemble_evolve(ground, PulseSequence([prep1, delay(t)]), spectrum, method)
        r2 = ensemble_evolve(ground, PulseSequence([prep2, delay(t)]), spectrum, method)
        values[i] = trace_distance(r1, r2)
    meta = {"rabi_mhz": rabi, "method": _method_label(method), "ideal_pulses": ideal_pulses}
    return TraceDistanceSeries(times, values, meta)


def run_qst(prep: PulseSequence, spectrum: BathSpectrum, method=Quadrature(64), readout_rabi=None) -> DensityMatrix:
    """Reconstruct the prepared state from three P0 readouts.

    z from P0 directly, x after (pi/2)_Y, y after (-pi/2)_X. Readout pulses are
    instantaneous unless ``readout_rabi`` is given.
    """
    ground = DensityMatrix.ground()
    ideal = readout_rabi is None

    def read(extra):
        seq = prep + PulseSequence(extra)
        return population_p0(ensemble_evolve(ground, seq, spectrum, method))

    z = 2.0 * read([]) - 1.0
    x = 1.0 - 2.0 * read([_pulse("Y", HALF_PI, readout_rabi, ideal)])
    y = 1.0 - 2.0 * read([_pulse("-X", HALF_PI, readout_rabi, ideal)])
    v = np.array([x, y, z])
    n = np.linalg.norm(v)
    if 1.0 < n <= 1.0 + 1e-9:
        v = v / n
    return density_from_bloch(v)


def run_rabi_scan(
    spectrum: BathSpectrum,
    rabi: float = DEFAULT_RABI_MHZ,
    durations=np.arange(0.0, 2001.0, 2.0),
    method=Quadrature(64),
) -> ScanResult:
    """P0 after a single X pulse of each duration."""
    durations = np.asarray(durations, dtype=float)
    ground = DensityMatrix.ground()
    p0 = np.empty(durations.shape)
    for i, t in enumerate(durations):
        if t == 0:
            p0[i] = 1.0
            continue
        seg = rotation_pulse("X", _kernels.TWO_PI_MHZ_NS * rabi * t, rabi)
        p0[i] = population_p0(ensemble_evolve(ground, PulseSequence([seg]), spectrum, method))
    meta = {"rabi_mhz": rabi, "method": _method_label(method)}
    return ScanResult(durations, {"p0": p0}, np.full(durations.shape, np.nan), meta)


@dataclass
class MarkovTransitionResult:
    fields: np.ndarray  # mT
    polarization: np.ndarray
    n_values: np.ndarray
    metadata: dict = field(default_factory=dict)


def run_markov_transition(
    spectrum: BathSpectrum,
    fields=np.arange(0.0, 51.0, 5.0),
    model: PolarizationModel = PolarizationModel(),
    times=np.arange(0.0, 1001.0, 1.0),
    method=Quadrature(64),
    rabi: float = DEFAULT_RABI_MHZ,
    ideal_pulses: bool = True,
    min_prominence: float = 0.0,
) -> MarkovTransitionResult:
    """Non-Markovianity of the optimal pair versus applied field."""
    fields = np.asarray(fields, dtype=float)
    pol, nvals = [], []
    for b in fields:
        s = polarize_spectrum(spectrum, b, model)
        series = run_trace_distance_experiment(s, rabi, times, method, ideal_pulses)
        nvals.append(non_markovianity_revival_sum(series, min_prominence).n_value)
        pol.append(model.fraction(b))
    meta = {
        "saturation_field_mT": model.saturation_field,
        "exponent": model.exponent,
        "window_ns": [float(times[0]), float(times[-1])],
        "method": _method_label(method),
    }
    return MarkovTransitionResult(fields, np.array(pol), np.array(nvals), meta)
