"""Command-line entry point: ``nvrdja <experiment> [--config FILE] [flags]``.

Exit codes: 0 success, 1 config/parse error, 2 runtime/numerical error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import protocols
from .analysis import (
    TraceDistanceSeries,
    dft_peak,
    fit_trace_distance,
    non_markovianity_integral,
    non_markovianity_revival_sum,
)
from .bath import PolarizationModel
from .dsl import EXPERIMENT_KINDS, DslDocument, ExperimentConfig, config_from_document, parse_dsl
from .errors import ConfigurationError, DslError, InputError, NvRdjaError
from .pulses import SignalModel, counts_from_p0, ensemble_evolve, p0_from_counts
from .quantum import DensityMatrix, population_p0
from .results import ExperimentResult, emit_json, emit_plot_data, read_series_csv

log = logging.getLogger("nvrdja")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

DEFAULT_GRIDS = {
    "rdja-scan": (0.0, 800.0, 10.0),
    "trace-distance": (0.0, 2000.0, 10.0),
    "non-markovianity": (0.0, 1400.0, 1.0),
    "fit": (0.0, 2000.0, 10.0),
    "markov-transition": (0.0, 1000.0, 1.0),
    "rabi": (0.0, 2000.0, 2.0),
}


def _apply_signal(cfg, columns, seed_offset=0):
    """Replace P0 columns by estimates from simulated photon counts."""
    if cfg.signal is None:
        return columns
    model = SignalModel(*cfg.signal)
    out = {}
    for k, (name, col) in enumerate(columns.items()):
        vals = []
        for i, p in enumerate(col):
            seed = None if not cfg.noisy else [cfg.seed, seed_offset + k, i]
            counts = counts_from_p0(float(np.clip(p, 0.0, 1.0)), model, cfg.noisy, seed)
            vals.append(p0_from_counts(counts, model).p0)
        out[name] = np.array(vals)
    return out


def _series(cfg, doc, spectrum):
    # simulated input for fit / N always uses instantaneous preparation pulses
    if cfg.input:
        t, v = read_series_csv(cfg.input)
        return TraceDistanceSeries(t, v, {"input": cfg.input})
    grid = cfg.grid_array(DEFAULT_GRIDS[cfg.kind])
    return protocols.run_trace_distance_experiment(spectrum, cfg.rabi, grid, cfg.method_obj(), True)


def run_experiment(cfg: ExperimentConfig, doc: DslDocument = None) -> ExperimentResult:
    """Dispatch one configured experiment; returns the tabular result (no I/O)."""
    cfg.validate()
    doc = doc or DslDocument()
    try:
        spectrum = doc.spectrum(cfg.spectrum_name)
    except KeyError:
        raise ConfigurationError(f"undefined spectrum {cfg.spectrum_name!r}") from None
    method = cfg.method_obj()
    kind = cfg.kind
    meta = {"spectrum": [dataclasses.astuple(m) for m in spectrum.modes]}

    if kind == "rdja-scan":
        taus = cfg.grid_array(DEFAULT_GRIDS[kind])
        res = protocols.run_rdja_scan(spectrum, cfg.rabi, taus, method, cfg.ideal_pulses)
        curves = _apply_signal(cfg, res.curves)
        contrast = curves["p0_u3"] - curves["p0_u1"]
        cols = ["tau_ns", "p0_u1", "p0_u2", "p0_u3", "p0_u4", "contrast"]
        rows = [
            (t, curves["p0_u1"][i], curves["p0_u2"][i], curves["p0_u3"][i], curves["p0_u4"][i], contrast[i])
            for i, t in enumerate(res.scan_variable)
        ]
        meta.update(res.metadata)
    elif kind == "echo-scan":
        grid = cfg.grid_array((max(0.0, cfg.t1 - 150.0), cfg.t1 + 150.0, 10.0))
        res = protocols.run_echo_scan(spectrum, cfg.rabi, cfg.t1, grid, method, cfg.ideal_pulses)
        curves = _apply_signal(cfg, {"p0_constant": res.curves["p0_constant"], "p0_balanced": res.curves["p0_balanced"]})
        pos = res.pos
        if cfg.signal:
            succ = []
            for label in ("constant", "balanced"):
                name = res.metadata[label]
                target = protocols.ideal_outcome(protocols.build_echo_rdja_sequence(name, cfg.t1, cfg.t1, cfg.rabi))
                succ.append(protocols.success_probability(curves[f"p0_{label}"], target))
            pos = np.maximum(*succ)
        cols = ["t2_ns", "p0_constant", "p0_balanced", "pos"]
        rows = [(t, curves["p0_constant"][i], curves["p0_balanced"][i], pos[i]) for i, t in enumerate(res.scan_variable)]
        meta.update(res.metadata)
    elif kind == "trace-distance":
        grid = cfg.grid_array(DEFAULT_GRIDS[kind])
        s = protocols.run_trace_distance_experiment(spectrum, cfg.rabi, grid, method, cfg.ideal_pulses)
        cols = ["t_ns", "trace_distance"]
        rows = list(zip(s.times, s.values))
        meta.update(s.metadata)
    elif kind == "non-markovianity":
        s = _series(cfg, doc, spectrum)
        nm = non_markovianity_revival_sum(s, cfg.prominence, cfg.refine)
        cols = ["n_revival_sum", "n_integral", "prominence"]
        rows = [(nm.n_value, non_markovianity_integral(s), cfg.prominence)]
        meta["extrema"] = [e._asdict() for e in nm.extrema]
        meta["window_ns"] = [float(s.times[0]), float(s.times[-1])]
    elif kind == "fit":
        s = _series(cfg, doc, spectrum)
        fp = fit_trace_distance(s)
        cols = ["a", "b", "delta_mhz", "T_ns", "residual_rms"]
        rows = [(fp.a, fp.b, fp.delta, fp.T, fp.residual_rms)]
        meta["iterations"] = fp.iterations
    elif kind == "markov-transition":
        model = PolarizationModel(cfg.saturation, cfg.exponent)
        window = cfg.grid_array(DEFAULT_GRIDS[kind])
        res = protocols.run_markov_transition(
            spectrum, cfg.field_array(), model, window, method, cfg.rabi, True, cfg.prominence
        )
        cols = ["field_mT", "polarization", "n_value"]
        rows = list(zip(res.fields, res.polarization, res.n_values))
        meta.update(res.metadata)
    elif kind == "rabi":
        grid = cfg.grid_array(DEFAULT_GRIDS[kind])
        res = protocols.run_rabi_scan(spectrum, cfg.rabi, grid, method)
        curves = _apply_signal(cfg, res.curves)
        cols = ["duration_ns", "p0"]
        rows = list(zip(res.scan_variable, curves["p0"]))
        peak = dft_peak(TraceDistanceSeries(res.scan_variable, curves["p0"]))
        meta.update(res.metadata)
        meta.update({"dft_frequency_mhz": peak.frequency, "dft_amplitude": peak.amplitude})
        meta["pi_time_ns"] = 1e3 / (2.0 * peak.frequency) if peak.frequency > 0 else None
    elif kind == "run-seq":
        if cfg.seq is None:
            raise ConfigurationError("run-seq needs a 'seq <name>' entry")
        if cfg.seq not in doc.sequences:
            raise ConfigurationError(f"undefined seq {cfg.seq!r}")
        seq = doc.sequence(cfg.seq, cfg.rabi, cfg.ideal_pulses)
        rho = ensemble_evolve(DensityMatrix.ground(), seq, spectrum, method)
        x, y, z = rho.bloch()
        cols = ["seq", "p0", "x", "y", "z"]
        rows = [(cfg.seq, population_p0(rho), x, y, z)]
        meta["total_duration_ns"] = seq.total_duration
    else:  # pragma: no cover - validate() rejects this
        raise ConfigurationError(f"unknown experiment {kind!r}")
    return ExperimentResult(kind, cols, rows, meta, cfg.to_dict())


def write_result(result: ExperimentResult, out, fmt: str) -> list:
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".csv", ".json") else out
    written = []
    if fmt in ("csv", "both"):
        written.append(emit_plot_data(result, stem.with_suffix(".csv")))
    if fmt in ("json", "both"):
        written.append(emit_json(result, stem.with_suffix(".json")))
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nvrdja", description="Spin-qubit RDJA / non-Markovianity simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="experiment", required=True)
    for kind in ("run",) + EXPERIMENT_KINDS:
        sp = sub.add_parser(kind, help="run the experiment in --config" if kind == "run" else f"{kind} experiment")
        sp.add_argument("--config", help="DSL file with spectra, sequences and an experiment block")
        sp.add_argument("--out", help="output path stem (.csv/.json appended)")
        sp.add_argument("--format", choices=("csv", "json", "both"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--method", help="quadrature:N or mc:N")
        sp.add_argument("--ideal-pulses", action="store_true", default=None)
        sp.add_argument("--spectrum", help="spectrum name (built-ins: default, resonant)")
        sp.add_argument("--rabi", type=float, help="Rabi frequency [MHz]")
        sp.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "STEP"), help="scan grid [ns]")
        sp.add_argument("--t1", type=float, help="first echo arm [ns] (echo-scan)")
        sp.add_argument("--input", help="two-column CSV of a measured trace distance (fit, non-markovianity)")
        sp.add_argument("--seq", help="sequence name (run-seq)")
    return p


def _load(args):
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise _IOFailure(f"cannot read config: {exc}") from exc
        doc = parse_dsl(text)
    else:
        doc = DslDocument()
    kind = None if args.experiment == "run" else args.experiment
    if kind is None and doc.experiment is None:
        raise ConfigurationError("'run' needs a config file with an experiment block")
    if kind is not None and doc.experiment is not None and doc.experiment.kind != kind:
        raise ConfigurationError(f"config describes {doc.experiment.kind!r}, not {kind!r}")
    cfg = config_from_document(doc, kind)
    overrides = {
        "out": args.out,
        "format": args.format,
        "seed": args.seed,
        "method": args.method,
        "ideal_pulses": args.ideal_pulses,
        "spectrum_name": args.spectrum,
        "rabi": args.rabi,
        "grid": tuple(args.grid) if args.grid else None,
        "t1": args.t1,
        "input": args.input,
        "seq": args.seq,
    }
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    if cfg.spectrum_name not in doc.spectra and cfg.spectrum_name not in ("default", "resonant"):
        raise ConfigurationError(f"undefined spectrum {cfg.spectrum_name!r}")
    if cfg.input and not Path(cfg.input).is_file():
        raise _IOFailure(f"input file not found: {cfg.input}")
    return doc, cfg.validate()


class _IOFailure(Exception):
    pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        doc, cfg = _load(args)
    except DslError as exc:
        print(f"error[{exc.code}] {args.config}:{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, InputError) as exc:
        print(f"error[{exc.code}] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"error[E_IO] {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        result = run_experiment(cfg, doc)
    except OSError as exc:
        print(f"error[E_IO] {exc}", file=sys.stderr)
        return EXIT_IO
    except (NvRdjaError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        code = getattr(exc, "code", "E_RUNTIME")
        print(f"error[{code}] {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = cfg.out or cfg.kind
    try:
        for path in write_result(result, out, cfg.format):
            log.info("wrote %s", path)
    except OSError as exc:
        print(f"error[E_IO] {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
