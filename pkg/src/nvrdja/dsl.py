"""Line-oriented text format for pulse sequences, bath spectra and experiment settings.

::

    # comments run to end of line
    rabi 5.37MHz
    method quadrature:64
    seed 7

    spectrum triple:
      mode 0.3333 -2.170MHz 0.1629MHz      # weight, center, sigma
      mode 0.3333 0MHz 0.1629MHz
      mode 0.3333 2.170MHz 0.1629MHz

    seq ramsey:
      pulse X 90                           # axis X|Y|-X|-Y, angle in degrees
      delay 400ns                          # ns or us, no space before the unit
      oracle U3                            # expands to the three oracle pulses

    experiment rdja-scan:
      spectrum triple                      # or the built-ins "default", "resonant"
      grid 0ns 800ns 10ns

Keywords are case-sensitive. Every error carries a code, line and column.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .bath import BathSpectrum, paper_default_spectrum
from .errors import DslError
from .pulses import (
    AXIS_PHASES,
    MonteCarlo,
    PulseSequence,
    Quadrature,
    SignalModel,
    delay,
    instant_rotation,
    rotation_pulse,
)

__all__ = [
    "EXPERIMENT_KINDS",
    "BUILTIN_SPECTRA",
    "ExperimentConfig",
    "DslDocument",
    "parse_dsl",
    "serialize_dsl",
    "parse_method_text",
    "config_from_document",
]

EXPERIMENT_KINDS = (
    "rdja-scan",
    "echo-scan",
    "trace-distance",
    "non-markovianity",
    "fit",
    "markov-transition",
    "rabi",
    "run-seq",
)
BUILTIN_SPECTRA = {
    "default": paper_default_spectrum,
    "resonant": lambda: BathSpectrum.point_mass(0.0),
}
ORACLE_PHASE_DEG = {"U1": 0.0, "U2": 360.0, "U3": 540.0, "U4": 180.0}
DEFAULT_RABI = 5.37

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_QUANTITY = re.compile(rf"^({_NUMBER})([A-Za-z]+)$")
_PLAIN = re.compile(rf"^{_NUMBER}$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")
_TIME_UNITS = {"ns": 1.0, "us": 1e3}
_ALL_UNITS = {"ns", "us", "ms", "s", "MHz", "kHz", "GHz", "Hz", "mT", "T", "G"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one experiment. Times in ns, fields in mT."""

    kind: str
    spectrum_name: str = "default"
    rabi: float = DEFAULT_RABI
    grid: tuple = None  # (start, stop, step) ns
    method: str = "quadrature:64"
    seed: int = 0
    ideal_pulses: bool = False
    t1: float = 170.0
    fields: tuple = (0.0, 50.0, 5.0)  # (start, stop, step) mT
    saturation: float = 35.0
    exponent: float = 1.0
    seq: str = None
    input: str = None
    prominence: float = 0.0
    refine: bool = False
    signal: tuple = None  # (c_max, c_min, shots)
    noisy: bool = False
    out: str = None
    format: str = "csv"

    def validate(self):
        from .errors import ConfigurationError

        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        for label, g in (("grid", self.grid), ("field", self.fields)):
            if g is None:
                continue
            start, stop, step = g
            if not step > 0:
                raise ConfigurationError(f"{label} step must be > 0")
            if not stop > start:
                raise ConfigurationError(f"{label} stop must exceed start")
        if self.format not in ("csv", "json", "both"):
            raise ConfigurationError(f"format must be csv, json or both, not {self.format!r}")
        if not self.rabi > 0:
            raise ConfigurationError("rabi frequency must be > 0")
        if self.signal is not None:
            SignalModel(*self.signal)
        parse_method_text(self.method, self.seed)
        return self

    def method_obj(self):
        return parse_method_text(self.method, self.seed)

    def grid_array(self, default):
        start, stop, step = self.grid if self.grid is not None else default
        return _inclusive_range(start, stop, step)

    def field_array(self):
        return _inclusive_range(*self.fields)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _inclusive_range(start, stop, step):
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def parse_method_text(text, seed=0):
    from .errors import ConfigurationError

    name, _, num = str(text).partition(":")
    if not num.isdigit():
        raise ConfigurationError(f"bad method {text!r}; use quadrature:N or mc:N")
    n = int(num)
    if name == "quadrature":
        return Quadrature(n)
    if name == "mc":
        return MonteCarlo(n, int(seed))
    raise ConfigurationError(f"unknown method {text!r}; use quadrature:N or mc:N")


@dataclass
class DslDocument:
    """Parsed file. Spectra are kept as written (weight, center MHz, sigma MHz) triples;
    sequences as ``("pulse", axis, degrees)`` / ``("delay", ns)`` items."""

    settings: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    experiment: ExperimentConfig = None

    @property
    def rabi(self) -> float:
        return self.settings.get("rabi", DEFAULT_RABI)

    def spectrum(self, name: str) -> BathSpectrum:
        if name in self.spectra:
            return BathSpectrum.from_sigmas(self.spectra[name])
        if name in BUILTIN_SPECTRA:
            return BUILTIN_SPECTRA[name]()
        raise KeyError(name)

    def sequence(self, name: str, rabi: float = None, ideal: bool = False) -> PulseSequence:
        rabi = self.rabi if rabi is None else rabi
        segs = []
        for item in self.sequences[name]:
            if item[0] == "delay":
                segs.append(delay(item[1]))
            else:
                _, axis, deg = item
                angle = math.radians(deg)
                segs.append(instant_rotation(axis, angle) if ideal else rotation_pulse(axis, angle, rabi))
        return PulseSequence(segs, name)


# ---------------------------------------------------------------- tokenizer


@dataclass(frozen=True)
class _Tok:
    text: str
    col: int  # 1-based


class _Line:
    def __init__(self, lineno, raw):
        self.lineno = lineno
        body = raw.split("#", 1)[0].rstrip()
        self.indent = len(body) - len(body.lstrip(" \t"))
        self.toks = [_Tok(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
        self.end_col = len(body) + 1

    def err(self, msg, tok=None, code="E_SYNTAX"):
        col = tok.col if tok is not None else (self.toks[0].col if self.toks else 1)
        return DslError(msg, self.lineno, col, code)

    def expect_args(self, n, usage):
        if len(self.toks) - 1 != n:
            # "400 ns": a bare number followed by a unit is a unit error at the number
            for num, unit in zip(self.toks[1:], self.toks[2:]):
                if _PLAIN.match(num.text) and unit.text in _ALL_UNITS:
                    raise self.err(f"{num.text!r} needs its unit attached, e.g. {num.text}{unit.text}", num, "E_BAD_UNIT")
            tok = self.toks[n + 1] if len(self.toks) > n + 1 else None
            if tok is None:
                raise DslError(f"expected: {usage}", self.lineno, self.end_col, "E_SYNTAX")
            raise self.err(f"unexpected token {tok.text!r}; expected: {usage}", tok)
        return self.toks[1:]


def _number(line, tok):
    if not _PLAIN.match(tok.text):
        raise line.err(f"malformed number {tok.text!r}", tok, "E_MALFORMED_NUMBER")
    return float(tok.text)


def _quantity(line, tok, units):
    m = _QUANTITY.match(tok.text)
    if not m:
        if _PLAIN.match(tok.text):
            raise line.err(f"{tok.text!r} needs a unit ({'|'.join(units)}) with no space", tok, "E_BAD_UNIT")
        raise line.err(f"malformed quantity {tok.text!r}", tok, "E_MALFORMED_NUMBER")
    value, unit = m.groups()
    if unit not in units:
        raise line.err(f"unit {unit!r} not allowed here; use {'|'.join(units)}", tok, "E_BAD_UNIT")
    return float(value) * units[unit]


def _name(line, tok):
    if not _NAME.match(tok.text):
        raise line.err(f"invalid name {tok.text!r}", tok, "E_SYNTAX")
    return tok.text


def _block_header(line, keyword):
    toks = line.toks
    if len(toks) != 2 or not toks[1].text.endswith(":") or len(toks[1].text) < 2:
        raise line.err(f"expected '{keyword} <name>:'", toks[1] if len(toks) > 1 else None)
    return _name(line, _Tok(toks[1].text[:-1], toks[1].col))


# ------------------------------------------------------------------ parser


def parse_dsl(text: str) -> DslDocument:
    doc = DslDocument()
    lines = [_Line(i + 1, raw) for i, raw in enumerate(text.splitlines())]
    lines = [ln for ln in lines if ln.toks]
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.indent:
            raise line.err("indented line outside a block", line.toks[0], "E_INDENT")
        kw = line.toks[0]
        body = []
        j = i + 1
        while j < len(lines) and lines[j].indent:
            body.append(lines[j])
            j += 1
        if kw.text in ("spectrum", "seq", "experiment") and line.toks[-1].text.endswith(":"):
            _parse_block(doc, line, body)
            i = j
            continue
        if body:
            raise body[0].err("indented line outside a block", body[0].toks[0], "E_INDENT")
        _parse_setting(doc, line)
        i = j
    return doc


def _parse_setting(doc, line):
    kw = line.toks[0]
    if kw.text == "rabi":
        (tok,) = line.expect_args(1, "rabi <float>MHz")
        value = _quantity(line, tok, {"MHz": 1.0})
        if not value > 0:
            raise line.err("rabi frequency must be > 0", tok, "E_VALUE")
        key = "rabi"
    elif kw.text == "method":
        (tok,) = line.expect_args(1, "method quadrature:N|mc:N")
        from .errors import ConfigurationError

        try:
            parse_method_text(tok.text)
        except ConfigurationError as exc:
            raise line.err(str(exc), tok, "E_VALUE") from None
        value = tok.text
        key = "method"
    elif kw.text == "seed":
        (tok,) = line.expect_args(1, "seed <int>")
        if not tok.text.isdigit():
            raise line.err(f"seed must be a non-negative integer, got {tok.text!r}", tok, "E_MALFORMED_NUMBER")
        value = int(tok.text)
        key = "seed"
    else:
        raise line.err(f"unknown keyword {kw.text!r}", kw, "E_UNKNOWN_KEYWORD")
    if key in doc.settings:
        raise line.err(f"setting {key!r} given twice", kw, "E_DUPLICATE_NAME")
    doc.settings[key] = value


def _parse_block(doc, header, body):
    kw = header.toks[0].text
    if kw == "experiment":
        _parse_experiment(doc, header, body)
        return
    name = _block_header(header, kw)
    table = doc.spectra if kw == "spectrum" else doc.sequences
    if name in table or (kw == "spectrum" and name in BUILTIN_SPECTRA):
        raise header.err(f"duplicate {kw} name {name!r}", header.toks[1], "E_DUPLICATE_NAME")
    if not body:
        raise DslError(f"{kw} {name!r} has an empty body", header.lineno, header.end_col, "E_SYNTAX")
    items = []
    for line in body:
        t0 = line.toks[0]
        if kw == "spectrum":
            if t0.text != "mode":
                raise line.err(f"unknown keyword {t0.text!r} in spectrum block", t0, "E_UNKNOWN_KEYWORD")
            w, c, s = line.expect_args(3, "mode <weight> <center>MHz <sigma>MHz")
            weight = _number(line, w)
            if weight < 0:
                raise line.err("mode weight must be >= 0", w, "E_VALUE")
            center = _quantity(line, c, {"MHz": 1.0})
            sigma = _quantity(line, s, {"MHz": 1.0})
            if sigma < 0:
                raise line.err("mode sigma must be >= 0", s, "E_VALUE")
            items.append((weight, center, sigma))
        else:
            items.extend(_parse_seq_item(line))
    if kw == "spectrum" and sum(w for w, _, _ in items) <= 0:
        raise header.err(f"spectrum {name!r} has zero total weight", header.toks[1], "E_VALUE")
    table[name] = tuple(items)


def _parse_seq_item(line):
    t0 = line.toks[0]
    if t0.text == "pulse":
        ax, ang = line.expect_args(2, "pulse <X|Y|-X|-Y> <angle_deg>")
        if ax.text not in AXIS_PHASES:
            raise line.err(f"axis must be X, Y, -X or -Y, got {ax.text!r}", ax, "E_VALUE")
        deg = _number(line, ang)
        if not deg > 0:
            raise line.err("pulse angle must be > 0", ang, "E_VALUE")
        return [("pulse", ax.text, deg)]
    if t0.text == "delay":
        (tok,) = line.expect_args(1, "delay <float>ns|us")
        ns = _quantity(line, tok, _TIME_UNITS)
        if ns < 0:
            raise line.err("delay must be >= 0", tok, "E_VALUE")
        return [("delay", ns)]
    if t0.text == "oracle":
        (tok,) = line.expect_args(1, "oracle <U1|U2|U3|U4>")
        if tok.text not in ORACLE_PHASE_DEG:
            raise line.err(f"unknown oracle {tok.text!r}", tok, "E_UNDEFINED_REF")
        phi = ORACLE_PHASE_DEG[tok.text]
        items = [("pulse", "X", 90.0)]
        if phi > 0:
            items.append(("pulse", "Y", phi))
        items.append(("pulse", "-X", 90.0))
        return items
    raise line.err(f"unknown keyword {t0.text!r} in seq block", t0, "E_UNKNOWN_KEYWORD")


_EXPERIMENT_KEYS = (
    "spectrum", "grid", "ideal-pulses", "t1", "field", "saturation", "exponent",
    "seq", "input", "prominence", "refine", "signal", "noisy", "out", "format",
)


def _parse_experiment(doc, header, body):
    toks = header.toks
    if len(toks) != 2 or not toks[1].text.endswith(":"):
        raise header.err("expected 'experiment <kind>:'", toks[1] if len(toks) > 1 else None)
    kind = toks[1].text[:-1]
    if kind not in EXPERIMENT_KINDS:
        raise header.err(f"unknown experiment kind {kind!r}", toks[1], "E_UNKNOWN_KEYWORD")
    if doc.experiment is not None:
        raise header.err("only one experiment block per file", toks[0], "E_DUPLICATE_NAME")
    settings = {"kind": kind}
    seen = set()
    for line in body:
        t0 = line.toks[0]
        key = t0.text
        if key not in _EXPERIMENT_KEYS:
            raise line.err(f"unknown keyword {key!r} in experiment block", t0, "E_UNKNOWN_KEYWORD")
        if key in seen:
            raise line.err(f"{key!r} given twice", t0, "E_DUPLICATE_NAME")
        seen.add(key)
        if key == "spectrum":
            (tok,) = line.expect_args(1, "spectrum <name>")
            if tok.text not in doc.spectra and tok.text not in BUILTIN_SPECTRA:
                raise line.err(f"undefined spectrum {tok.text!r}", tok, "E_UNDEFINED_REF")
            settings["spectrum_name"] = tok.text
        elif key == "seq":
            (tok,) = line.expect_args(1, "seq <name>")
            if tok.text not in doc.sequences:
                raise line.err(f"undefined seq {tok.text!r}", tok, "E_UNDEFINED_REF")
            settings["seq"] = tok.text
        elif key == "grid":
            toks3 = line.expect_args(3, "grid <start>ns <stop>ns <step>ns")
            g = tuple(_quantity(line, t, _TIME_UNITS) for t in toks3)
            _check_range(line, toks3, g)
            settings["grid"] = g
        elif key == "field":
            toks3 = line.expect_args(3, "field <start>mT <stop>mT <step>mT")
            g = tuple(_quantity(line, t, {"mT": 1.0}) for t in toks3)
            _check_range(line, toks3, g)
            if g[0] < 0:
                raise line.err("field must be >= 0", toks3[0], "E_VALUE")
            settings["fields"] = g
        elif key == "t1":
            (tok,) = line.expect_args(1, "t1 <float>ns|us")
            settings["t1"] = _quantity(line, tok, _TIME_UNITS)
        elif key == "saturation":
            (tok,) = line.expect_args(1, "saturation <float>mT")
            settings["saturation"] = _quantity(line, tok, {"mT": 1.0})
        elif key in ("exponent", "prominence"):
            (tok,) = line.expect_args(1, f"{key} <float>")
            settings[key] = _number(line, tok)
        elif key in ("ideal-pulses", "refine", "noisy"):
            line.expect_args(0, key)
            settings[key.replace("-", "_")] = True
        elif key == "signal":
            toks3 = line.expect_args(3, "signal <c_max> <c_min> <shots>")
            c_max, c_min, shots = (_number(line, t) for t in toks3)
            settings["signal"] = (c_max, c_min, int(shots))
        elif key in ("input", "out"):
            (tok,) = line.expect_args(1, f"{key} <path>")
            settings[key] = tok.text
        elif key == "format":
            (tok,) = line.expect_args(1, "format csv|json|both")
            if tok.text not in ("csv", "json", "both"):
                raise line.err(f"unknown format {tok.text!r}", tok, "E_VALUE")
            settings["format"] = tok.text
    doc.experiment = ExperimentConfig(**settings)


def _check_range(line, toks, g):
    start, stop, step = g
    if not step > 0:
        raise line.err("step must be > 0", toks[2], "E_VALUE")
    if not stop > start:
        raise line.err("stop must exceed start", toks[1], "E_VALUE")


# -------------------------------------------------------------- serializer


def _f(x) -> str:
    return repr(float(x))


def serialize_dsl(doc: DslDocument) -> str:
    out = []
    if "rabi" in doc.settings:
        out.append(f"rabi {_f(doc.settings['rabi'])}MHz")
    if "method" in doc.settings:
        out.append(f"method {doc.settings['method']}")
    if "seed" in doc.settings:
        out.append(f"seed {doc.settings['seed']}")
    for name, modes in doc.spectra.items():
        out.append("")
        out.append(f"spectrum {name}:")
        out.extend(f"  mode {_f(w)} {_f(c)}MHz {_f(s)}MHz" for w, c, s in modes)
    for name, items in doc.sequences.items():
        out.append("")
        out.append(f"seq {name}:")
        for item in items:
            if item[0] == "delay":
                out.append(f"  delay {_f(item[1])}ns")
            else:
                out.append(f"  pulse {item[1]} {_f(item[2])}")
    if doc.experiment is not None:
        out.append("")
        out.extend(_serialize_experiment(doc.experiment))
    return "\n".join(out).lstrip("\n") + "\n"


def _serialize_experiment(cfg: ExperimentConfig):
    default = ExperimentConfig(cfg.kind)
    lines = [f"experiment {cfg.kind}:"]
    if cfg.spectrum_name != default.spectrum_name:
        lines.append(f"  spectrum {cfg.spectrum_name}")
    if cfg.grid is not None:
        lines.append("  grid " + " ".join(f"{_f(v)}ns" for v in cfg.grid))
    if cfg.ideal_pulses:
        lines.append("  ideal-pulses")
    if cfg.t1 != default.t1:
        lines.append(f"  t1 {_f(cfg.t1)}ns")
    if cfg.fields != default.fields:
        lines.append("  field " + " ".join(f"{_f(v)}mT" for v in cfg.fields))
    if cfg.saturation != default.saturation:
        lines.append(f"  saturation {_f(cfg.saturation)}mT")
    if cfg.exponent != default.exponent:
        lines.append(f"  exponent {_f(cfg.exponent)}")
    if cfg.seq is not None:
        lines.append(f"  seq {cfg.seq}")
    if cfg.input is not None:
        lines.append(f"  input {cfg.input}")
    if cfg.prominence != default.prominence:
        lines.append(f"  prominence {_f(cfg.prominence)}")
    if cfg.refine:
        lines.append("  refine")
    if cfg.signal is not None:
        c_max, c_min, shots = cfg.signal
        lines.append(f"  signal {_f(c_max)} {_f(c_min)} {int(shots)}")
    if cfg.noisy:
        lines.append("  noisy")
    if cfg.out is not None:
        lines.append(f"  out {cfg.out}")
    if cfg.format != default.format:
        lines.append(f"  format {cfg.format}")
    return lines


def config_from_document(doc: DslDocument, kind: str = None) -> ExperimentConfig:
    """Experiment block merged with global settings (rabi, method, seed)."""
    cfg = doc.experiment if doc.experiment is not None else ExperimentConfig(kind or "rdja-scan")
    overrides = {}
    if "rabi" in doc.settings:
        overrides["rabi"] = doc.settings["rabi"]
    if "method" in doc.settings:
        overrides["method"] = doc.settings["method"]
    if "seed" in doc.settings:
        overrides["seed"] = doc.settings["seed"]
    if kind is not None:
        overrides["kind"] = kind
    return replace(cfg, **overrides)
