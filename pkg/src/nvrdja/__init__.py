"""Single spin qubit in a structured quasi-static dephasing bath.

Refined Deutsch-Jozsa runs, echo protection, trace-distance non-Markovianity and
the field-driven transition to Markovian dynamics.
"""
from ._kernels import BACKEND
from .analysis import (
    FitParams,
    NmResult,
    TraceDistanceSeries,
    dft_peak,
    find_local_extrema,
    fit_trace_distance,
    non_markovianity_integral,
    non_markovianity_revival_sum,
)
from .bath import (
    BathSpectrum,
    PolarizationModel,
    coherence_function,
    paper_default_spectrum,
    polarize_spectrum,
    quadrature_nodes,
    sample_detuning,
    sample_detunings,
)
from .errors import ConfigurationError, DslError, FitError, InputError, InvalidStateError, NvRdjaError
from .pulses import (
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
    rotation_pulse,
)
from .protocols import (
    ORACLES,
    build_echo_rdja_sequence,
    build_rdja_sequence,
    echo_offset,
    run_echo_scan,
    run_markov_transition,
    run_qst,
    run_rabi_scan,
    run_rdja_scan,
    run_trace_distance_experiment,
)
from .dsl import parse_dsl, serialize_dsl
from .quantum import (
    BlochVector,
    DensityMatrix,
    Rotation,
    apply_rotation,
    bloch_from_density,
    density_from_bloch,
    population_p0,
    trace_distance,
)

__version__ = "0.1.0"
