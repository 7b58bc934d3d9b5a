import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nvrdja.bath import BathSpectrum, Mode, paper_default_spectrum
from nvrdja.errors import ConfigurationError, InputError
from nvrdja.pulses import (
    MonteCarlo,
    PulseSegment,
    PulseSequence,
    Quadrature,
    SignalModel,
    counts_from_p0,
    delay,
    ensemble_evolve,
    evolve,
    instant_rotation,
    p0_from_counts,
    parse_method,
    rotation_pulse,
)
from nvrdja.quantum import DensityMatrix, SIGMA_X, SIGMA_Y, SIGMA_Z, density_from_bloch, trace_distance

from conftest import density_matrices

GROUND = DensityMatrix.ground()


def hamiltonian_unitary(seg, delta):
    """Oracle: matrix exponential of the rotating-frame Hamiltonian (rad/ns)."""
    if seg.kind == "instant":
        n = np.cos(seg.phase) * SIGMA_X + np.sin(seg.phase) * SIGMA_Y
        return expm(-0.5j * seg.angle * n)
    h = np.pi * 1e-3 * delta * SIGMA_Z
    if seg.kind == "pulse":
        h = h + np.pi * 1e-3 * seg.rabi * (np.cos(seg.phase) * SIGMA_X + np.sin(seg.phase) * SIGMA_Y)
    return expm(-1j * h * seg.duration)


def oracle_evolve(rho, seq, delta):
    u = np.eye(2, dtype=complex)
    for seg in seq.segments:
        u = hamiltonian_unitary(seg, delta) @ u
    return u @ rho @ u.conj().T


def test_pi_pulse_duration():
    assert rotation_pulse("X", np.pi, 5.37).duration == pytest.approx(93.110, abs=1e-3)
    assert rotation_pulse("X", np.pi / 2, 5.37).duration == pytest.approx(46.555, abs=1e-3)


def test_two_pi_is_identity_on_resonance():
    rho = density_from_bloch((0.3, -0.4, 0.5))
    out = evolve(rho, PulseSequence([rotation_pulse("Y", 2 * np.pi, 5.37)]), 0.0)
    assert out.allclose(rho, 1e-12)


def test_half_pi_y_on_ground():
    out = evolve(GROUND, PulseSequence([rotation_pulse("Y", np.pi / 2, 5.37)]), 0.0)
    assert out.bloch() == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)
    out = evolve(GROUND, PulseSequence([rotation_pulse("X", np.pi / 2, 5.37)]), 0.0)
    assert out.bloch() == pytest.approx((0.0, -1.0, 0.0), abs=1e-12)


@pytest.mark.parametrize("delta", [-3.0, -0.7, 0.0, 1.1, 4.2])
def test_rabi_formula(delta):
    rabi = 5.37
    for t in np.linspace(0.5, 400, 25):
        out = evolve(GROUND, PulseSequence([PulseSegment("pulse", t, 0.0, rabi)]), delta)
        eff = np.hypot(rabi, delta)
        p1 = rabi**2 / eff**2 * np.sin(np.pi * eff * 1e-3 * t) ** 2
        assert out.elements[1, 1].real == pytest.approx(p1, abs=1e-10)


@pytest.mark.parametrize("delta", [-2.17, 0.3, 1.0])
def test_ramsey_closed_form(delta):
    for tau in (0.0, 100.0, 350.0, 1000.0):
        seq = PulseSequence([instant_rotation("X", np.pi / 2), delay(tau), instant_rotation("X", np.pi / 2)])
        p0 = evolve(GROUND, seq, delta).elements[0, 0].real
        assert p0 == pytest.approx(0.5 * (1 - np.cos(2 * np.pi * 1e-3 * delta * tau)), abs=1e-12)


segments = st.one_of(
    st.builds(lambda t: delay(t), st.floats(0.0, 500.0)),
    st.builds(lambda a, ang, r: rotation_pulse(a, ang, r), st.sampled_from(["X", "Y", "-X", "-Y"]), st.floats(0.05, 7.0), st.floats(0.5, 20.0)),
    st.builds(lambda a, ang: instant_rotation(a, ang), st.sampled_from(["X", "Y", "-X", "-Y"]), st.floats(0.0, 7.0)),
)
sequences = st.lists(segments, min_size=0, max_size=6).map(PulseSequence)


@given(density_matrices(), sequences, st.floats(-5.0, 5.0))
def test_matches_matrix_exponential(rho, seq, delta):
    assert np.max(np.abs(evolve(rho, seq, delta).elements - oracle_evolve(rho.elements, seq, delta))) < 1e-10


@given(density_matrices(), density_matrices(), sequences)
def test_ensemble_evolution_is_cptp_and_contractive(r1, r2, seq):
    s = paper_default_spectrum()
    m = Quadrature(16)
    o1, o2 = ensemble_evolve(r1, seq, s, m), ensemble_evolve(r2, seq, s, m)
    assert np.trace(o1.elements).real == pytest.approx(1.0, abs=1e-12)
    assert np.min(np.linalg.eigvalsh(o1.elements)) > -1e-10
    assert trace_distance(o1, o2) <= trace_distance(r1, r2) + 1e-10
    assert o1.purity <= r1.purity + 1e-10


@given(density_matrices(), sequences, st.floats(-4.0, 4.0))
def test_point_mass_reduces_to_single_unitary(rho, seq, c):
    s = BathSpectrum.point_mass(c)
    assert ensemble_evolve(rho, seq, s).allclose(evolve(rho, seq, c), 1e-12)
    narrow = BathSpectrum([Mode(1.0, c, 1e-9)])
    assert ensemble_evolve(rho, seq, narrow, Quadrature(4)).allclose(evolve(rho, seq, c), 1e-9)


@given(density_matrices(), st.floats(0.0, 800.0), st.floats(0.0, 1.0), st.floats(-3.0, 3.0))
def test_delay_splits(rho, total, frac, delta):
    whole = evolve(rho, PulseSequence([delay(total)]), delta)
    split = evolve(rho, PulseSequence([delay(total * frac), delay(total * (1 - frac))]), delta)
    assert whole.allclose(split, 1e-10)


def test_sequence_helpers():
    seq = PulseSequence([rotation_pulse("X", np.pi / 2, 5.37), delay(100.0)], "a") + PulseSequence([instant_rotation("Y", np.pi)])
    assert len(seq) == 3
    assert seq.total_duration == pytest.approx(146.555, abs=1e-3)
    ideal = seq.ideal()
    assert [s.kind for s in ideal.segments] == ["instant", "delay", "instant"]
    assert ideal.segments[0].angle == pytest.approx(np.pi / 2)


def test_segment_validation():
    with pytest.raises(InputError):
        delay(-1.0)
    with pytest.raises(InputError):
        PulseSegment("pulse", 10.0, 0.0, 0.0)
    with pytest.raises(InputError):
        PulseSegment("warp")
    with pytest.raises(InputError):
        rotation_pulse("Z", np.pi, 5.0)
    with pytest.raises(InputError):
        rotation_pulse("X", np.pi, -1.0)


def test_parse_method():
    assert parse_method("quadrature:32") == Quadrature(32)
    assert parse_method("mc:1000", seed=4) == MonteCarlo(1000, 4)
    for bad in ("mc:abc", "grid:4"):
        with pytest.raises(ConfigurationError):
            parse_method(bad)


def test_monte_carlo_close_to_quadrature():
    s = paper_default_spectrum()
    seq = PulseSequence([rotation_pulse("X", np.pi / 2, 5.37), delay(300.0), rotation_pulse("X", np.pi / 2, 5.37)])
    q = ensemble_evolve(GROUND, seq, s, Quadrature(64)).elements[0, 0].real
    mc = ensemble_evolve(GROUND, seq, s, MonteCarlo(100_000, 1)).elements[0, 0].real
    assert abs(q - mc) < 0.01


def test_counts_round_trip():
    m = SignalModel(0.03, 0.021, 1_000_000)
    for p0 in (0.0, 0.25, 1.0):
        est = p0_from_counts(counts_from_p0(p0, m), m)
        assert est.p0 == pytest.approx(p0, abs=1e-12)
        assert not est.out_of_range


def test_poisson_relative_fluctuation():
    m = SignalModel(0.03, 0.021, 1_000_000)
    mean = counts_from_p0(0.5, m)
    draws = np.array([counts_from_p0(0.5, m, noisy=True, seed=k) for k in range(400)])
    rel = draws.std() / draws.mean()
    assert rel == pytest.approx(1 / np.sqrt(mean), rel=0.15)
    assert counts_from_p0(0.5, m, noisy=True, seed=3) == counts_from_p0(0.5, m, noisy=True, seed=3)


def test_out_of_range_flag():
    m = SignalModel(0.03, 0.021, 1000)
    assert p0_from_counts(0.03 * 1000 * 1.2, m).out_of_range
    with pytest.raises(InputError):
        counts_from_p0(1.5, m)
    with pytest.raises(InputError):
        SignalModel(0.02, 0.03)
