"""Post-processing of simulated or measured curves.

Local extrema, the two non-Markovianity estimators (revival sum and positive-increment
integral), the |(a + b cos 2 pi Delta t)| exp(-t^2/T^2) trace-distance fit, and a
zero-padded DFT peak finder.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._kernels import TWO_PI_MHZ_NS
from .errors import FitError, InputError

__all__ = [
    "TraceDistanceSeries",
    "Extremum",
    "NmResult",
    "FitParams",
    "DftPeak",
    "find_local_extrema",
    "non_markovianity_revival_sum",
    "non_markovianity_integral",
    "trace_distance_model",
    "fit_trace_distance",
    "dft_peak",
]


@dataclass
class TraceDistanceSeries:
    times: np.ndarray  # ns
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise InputError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise InputError("time grid must be strictly increasing")

    def __len__(self):
        return self.times.size


class Extremum(NamedTuple):
    index: int
    time: float
    value: float
    kind: str  # "min" | "max"


@dataclass
class NmResult:
    n_value: float
    extrema: list


def _as_series(series) -> TraceDistanceSeries:
    if isinstance(series, TraceDistanceSeries):
        return series
    values = np.asarray(series, dtype=float)
    return TraceDistanceSeries(np.arange(values.size, dtype=float), values)


def find_local_extrema(series, min_prominence: float = 0.0) -> list:
    """Alternating min/max list, endpoints included.

    Zig-zag detection with hysteresis: a turning point is confirmed once the signal
    has moved away from it by more than ``min_prominence`` (strictly, so plateaus
    never count at zero prominence). Sub-threshold wiggles are absorbed into the
    surrounding run, which is what keeps the kinds alternating.
    """
    s = _as_series(series)
    if min_prominence < 0:
        raise InputError("min_prominence must be >= 0")
    v = s.values
    n = v.size
    if n < 3:
        raise InputError("need at least 3 points to locate extrema")

    turning = []  # (index, kind)
    hi = lo = 0
    direction = 0
    for i in range(1, n):
        if direction == 0:
            if v[i] > v[hi]:
                hi = i
            if v[i] < v[lo]:
                lo = i
            up = v[i] - v[lo] > min_prominence
            down = v[hi] - v[i] > min_prominence
            if up and down:
                if lo < hi:
                    turning += [(lo, "min"), (hi, "max")]
                    direction, lo = -1, i
                else:
                    turning += [(hi, "max"), (lo, "min")]
                    direction, hi = 1, i
            elif up:
                turning.append((lo, "min"))
                direction = 1
                hi = lo + int(np.argmax(v[lo : i + 1]))
            elif down:
                turning.append((hi, "max"))
                direction = -1
                lo = hi + int(np.argmin(v[hi : i + 1]))
        elif direction == 1:
            if v[i] > v[hi]:
                hi = i
            elif v[hi] - v[i] > min_prominence:
                turning.append((hi, "max"))
                direction = -1
                lo = i
        else:
            if v[i] < v[lo]:
                lo = i
            elif v[i] - v[lo] > min_prominence:
                turning.append((lo, "min"))
                direction = 1
                hi = i

    if direction == 1:
        turning.append((hi, "max"))
    elif direction == -1:
        turning.append((lo, "min"))
    else:
        # flat within the threshold: report the two endpoints only
        kind0 = "max" if v[0] >= v[-1] else "min"
        turning = [(0, kind0), (n - 1, "min" if kind0 == "max" else "max")]

    flip = {"min": "max", "max": "min"}
    if turning[0][0] != 0:
        turning.insert(0, (0, flip[turning[0][1]]))
    if turning[-1][0] != n - 1:
        turning.append((n - 1, flip[turning[-1][1]]))
    return [Extremum(int(i), float(s.times[i]), float(v[i]), k) for i, k in turning]


def _quadfit(x, y):
    c = np.polyfit(x, y, 2)
    return c, float(np.sum((np.polyval(c, x) - y) ** 2))


def _refined_value(t, v, i, kind):
    """Sub-grid extremum value from a local quadratic.

    Minima are also tested as zero crossings of a signed curve (sign flipped on one
    side); a trace distance is |g| for smooth g, so its minima are often cusps that a
    coarse grid cannot sample.
    """
    if i < 2 or i > v.size - 3:
        return float(v[i])
    x = t[i - 2 : i + 3] - t[i]
    y = v[i - 2 : i + 3].copy()
    c, best = _quadfit(x, y)
    signed = False
    if kind == "min":
        for k in (2, 3):
            ys = y.copy()
            ys[k:] *= -1.0
            cs, r = _quadfit(x, ys)
            if r < best:
                c, best, signed = cs, r, True
    xs = np.linspace(x[1], x[3], 2001)
    q = np.polyval(c, xs)
    if signed:
        q = np.abs(q)
    return float(q.min() if kind == "min" else q.max())


def non_markovianity_revival_sum(series, min_prominence: float = 0.0, refine: bool = False) -> NmResult:
    """Sum of (local max - preceding local min) over every rise.

    ``refine`` replaces interior extremum values with sub-grid estimates; leave it off
    when the grid is fine, since only then does the result equal the
    positive-increment integral exactly.
    """
    s = _as_series(series)
    ext = find_local_extrema(s, min_prominence)
    if refine:
        ext = [
            e if e.index in (0, len(s) - 1) else e._replace(value=_refined_value(s.times, s.values, e.index, e.kind))
            for e in ext
        ]
    n = 0.0
    for lo, hi in zip(ext, ext[1:]):
        if lo.kind == "min":
            n += hi.value - lo.value
    return NmResult(max(0.0, n), ext)


def non_markovianity_integral(series) -> float:
    """Discretised integral of the positive part of dD/dt: sum of max(0, D[i+1] - D[i])."""
    s = _as_series(series)
    return float(np.sum(np.maximum(np.diff(s.values), 0.0)))


@dataclass
class FitParams:
    a: float
    b: float
    delta: float  # MHz
    T: float  # ns
    residual_rms: float
    iterations: int = 0
    trace: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.T > 0 or self.delta < 0:
            raise InputError(f"invalid fit parameters T={self.T}, delta={self.delta}")

    @property
    def ratio(self) -> float:
        return self.b / self.a


def trace_distance_model(t, a, b, delta, T):
    t = np.asarray(t, dtype=float)
    return np.abs(a + b * np.cos(TWO_PI_MHZ_NS * delta * t)) * np.exp(-((t / T) ** 2))


def _initial_ab(t, y, delta, T):
    """Grid over the shape ratio rho = a / (|a| + |b|); the overall scale is linear."""
    env = np.exp(-((t / T) ** 2))
    cosv = np.cos(TWO_PI_MHZ_NS * delta * t)
    best = None
    for rho in np.linspace(-1.0, 1.0, 801):
        f = np.abs(rho + (1.0 - abs(rho)) * cosv) * env
        ff = f @ f
        if ff == 0:
            continue
        c = (f @ y) / ff
        cost = float(np.sum((c * f - y) ** 2))
        if best is None or cost < best[0]:
            best = (cost, c * rho, c * (1.0 - abs(rho)))
    return float(best[1]), float(best[2])


def _initial_T(t, y, delta):
    period = 1e3 / delta
    k = np.round(t / period)
    pts = []
    for kk in np.unique(k):
        sel = k == kk
        j = np.argmax(y[sel])
        if y[sel][j] > 0:
            pts.append((t[sel][j], y[sel][j]))
    pts = np.array(pts)
    if len(pts) >= 2 and np.ptp(pts[:, 0]) > 0:
        slope, _ = np.polyfit(pts[:, 0] ** 2, np.log(pts[:, 1]), 1)
        if slope < 0:
            return float(np.sqrt(-1.0 / slope))
    return float(t[-1] - t[0])


def fit_trace_distance(series, max_iter: int = 200, rtol: float = 1e-8) -> FitParams:
    """Least-squares fit of |(a + b cos(2 pi Delta t))| exp(-t^2/T^2).

    Levenberg-Marquardt with a central-difference Jacobian (the model has kinks
    where a + b cos vanishes, so no analytic derivative is used). Initial Delta from
    the DFT peak of the detrended data, T from a log-envelope regression of the
    per-period maxima, and (a, b) from a shape grid with a linear scale solve.
    """
    s = _as_series(series)
    t, y = s.times, s.values
    if t.size < 8:
        raise InputError("need at least 8 points to fit")
    trend = np.polyval(np.polyfit(t, y, 1), t)
    delta0 = dft_peak(TraceDistanceSeries(t, y - trend)).frequency if _is_uniform(t) else None
    if delta0 is None or delta0 <= 0:
        raise InputError("could not estimate an oscillation frequency")
    if (t[-1] - t[0]) * delta0 * 1e-3 < 1.5:
        raise InputError("series spans fewer than 1.5 oscillation periods; fit is under-determined")
    T0 = _initial_T(t, y, delta0)
    a0, b0 = _initial_ab(t, y, delta0, T0)
    p = np.array([a0, b0, delta0, T0])

    def resid(q):
        return trace_distance_model(t, *q) - y

    r = resid(p)
    cost = float(r @ r)
    lam = 1e-3
    trace = [(0, cost, tuple(p))]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        h = 1e-7 * np.maximum(np.abs(p), 1e-3)
        J = np.empty((t.size, 4))
        for j in range(4):
            dp = np.zeros(4)
            dp[j] = h[j]
            J[:, j] = (resid(p + dp) - resid(p - dp)) / (2 * h[j])
        JtJ = J.T @ J
        g = J.T @ r
        improved = False
        for _ in range(30):
            step = np.linalg.solve(JtJ + lam * np.diag(np.maximum(np.diag(JtJ), 1e-12)), -g)
            trial = p + step
            if trial[3] <= 0 or trial[2] < 0:
                lam *= 10
                continue
            rt = resid(trial)
            ct = float(rt @ rt)
            if ct <= cost:
                improved = True
                break
            lam *= 10
        if not improved:
            # no downhill step at any damping: at a (possibly non-smooth) minimum
            converged = True
            break
        rel = np.max(np.abs(step) / np.maximum(np.abs(p), 1e-12))
        p, r, cost = trial, rt, ct
        lam = max(lam / 10, 1e-12)
        trace.append((it, cost, tuple(p)))
        if rel < rtol:
            converged = True
            break
    if not converged:
        raise FitError(f"fit did not converge in {max_iter} iterations", trace)
    a, b, delta, T = p
    if a + b < 0:
        a, b = -a, -b
    return FitParams(float(a), float(b), float(delta), float(T), float(np.sqrt(cost / t.size)), it, trace)


class DftPeak(NamedTuple):
    frequency: float  # MHz
    amplitude: float
    resolution: float  # MHz, spacing of the zero-padded frequency grid

    @property
    def is_flat(self) -> bool:
        return self.amplitude == 0.0


def _is_uniform(t):
    dt = np.diff(t)
    return bool(np.allclose(dt, dt[0], rtol=1e-9, atol=0))


def dft_peak(series, pad_factor: int = 16) -> DftPeak:
    """Strongest positive-frequency component of a uniformly sampled series (time in ns).

    Mean removed, Hann-windowed, zero-padded by ``pad_factor``, then refined by a
    3-point parabola on the log magnitude. ``amplitude`` is the tone amplitude.
    """
    s = _as_series(series)
    t, y = s.times, s.values
    if t.size < 4:
        raise InputError("need at least 4 samples")
    if not _is_uniform(t):
        raise InputError("dft_peak requires a uniform time grid")
    dt = t[1] - t[0]
    y = y - y.mean()
    n_pad = int(2 ** np.ceil(np.log2(t.size * pad_factor)))
    res = 1e3 / (n_pad * dt)
    if np.max(np.abs(y)) <= 1e-14 * max(1.0, np.max(np.abs(s.values))):
        return DftPeak(0.0, 0.0, res)
    win = np.hanning(t.size)
    mag = np.abs(np.fft.rfft(y * win, n_pad))
    k = int(np.argmax(mag[1:]) + 1)
    offset = 0.0
    if 1 <= k < mag.size - 1 and mag[k - 1] > 0 and mag[k + 1] > 0:
        l0, l1, l2 = np.log(mag[k - 1]), np.log(mag[k]), np.log(mag[k + 1])
        denom = l0 - 2 * l1 + l2
        if denom != 0:
            offset = 0.5 * (l0 - l2) / denom
    amp = 2.0 * mag[k] / win.sum()
    return DftPeak(float((k + offset) * res), float(amp), float(res))
