import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvrdja.dsl import DslDocument, ExperimentConfig, config_from_document, parse_dsl, serialize_dsl
from nvrdja.errors import ConfigurationError, DslError
from nvrdja.quantum import DensityMatrix, population_p0
from nvrdja.pulses import evolve


def test_three_segment_sequence():
    doc = parse_dsl("seq s:\n  pulse X 90\n  delay 400ns\n  pulse X 90\n")
    seq = doc.sequence("s")
    assert [s.kind for s in seq.segments] == ["pulse", "delay", "pulse"]
    assert seq.segments[1].duration == 400.0


def test_quarter_turn_duration():
    doc = parse_dsl("rabi 5.37MHz\nseq s:\n  pulse X 90\n")
    assert doc.sequence("s").segments[0].duration == pytest.approx(46.55, abs=0.01)


def test_microseconds_and_comments():
    doc = parse_dsl("# header\nseq s:   # trailing\n  delay 1.5us\n\n  delay 2ns\n")
    assert [s.duration for s in doc.sequence("s").segments] == [1500.0, 2.0]


def test_oracle_expansion():
    doc = parse_dsl("seq a:\n  oracle U1\nseq b:\n  oracle U3\n")
    assert doc.sequences["a"] == (("pulse", "X", 90.0), ("pulse", "-X", 90.0))
    assert doc.sequences["b"] == (("pulse", "X", 90.0), ("pulse", "Y", 540.0), ("pulse", "-X", 90.0))


def test_full_rdja_in_text_matches_ideal_outcome():
    doc = parse_dsl("seq r:\n  pulse X 90\n  oracle U4\n  delay 0ns\n  pulse X 90\n")
    p0 = population_p0(evolve(DensityMatrix.ground(), doc.sequence("r", ideal=True), 0.0))
    assert p0 == pytest.approx(1.0, abs=1e-12)


def test_spectrum_block():
    doc = parse_dsl("spectrum two:\n  mode 1 -1MHz 0.2MHz\n  mode 3 1MHz 0MHz\n")
    s = doc.spectrum("two")
    assert list(s.weights) == [0.25, 0.75]
    assert list(s.sigmas) == [0.2, 0.0]
    assert doc.spectrum("default").centers[2] == pytest.approx(2.17)


def err(text):
    with pytest.raises(DslError) as info:
        parse_dsl(text)
    e = info.value
    return e.code, e.line, e.column


@pytest.mark.parametrize(
    "text,expected",
    [
        ("seq s:\n  delay 400 ns\n", ("E_BAD_UNIT", 2, 9)),
        ("seq s:\n  delay 400ms\n", ("E_BAD_UNIT", 2, 9)),
        ("rabi 5.37\n", ("E_BAD_UNIT", 1, 6)),
        ("seq s:\n  pulse X 9O\n", ("E_MALFORMED_NUMBER", 2, 11)),
        ("seq s:\n  delay 4.0.0ns\n", ("E_MALFORMED_NUMBER", 2, 9)),
        ("seed x1\n", ("E_MALFORMED_NUMBER", 1, 6)),
        ("seq s:\n  Pulse X 90\n", ("E_UNKNOWN_KEYWORD", 2, 3)),
        ("rabbit 5MHz\n", ("E_UNKNOWN_KEYWORD", 1, 1)),
        ("spectrum q:\n  node 1 0MHz 1MHz\n", ("E_UNKNOWN_KEYWORD", 2, 3)),
        ("experiment sweep:\n  grid 0ns 1ns 1ns\n", ("E_UNKNOWN_KEYWORD", 1, 12)),
        ("seq s:\n  delay 1ns\nseq s:\n  delay 2ns\n", ("E_DUPLICATE_NAME", 3, 5)),
        ("rabi 5MHz\nrabi 6MHz\n", ("E_DUPLICATE_NAME", 2, 1)),
        ("spectrum default:\n  mode 1 0MHz 1MHz\n", ("E_DUPLICATE_NAME", 1, 10)),
        ("experiment rabi:\n  spectrum nope\n", ("E_UNDEFINED_REF", 2, 12)),
        ("experiment run-seq:\n  seq later\nseq later:\n  delay 1ns\n", ("E_UNDEFINED_REF", 2, 7)),
        ("seq s:\n  oracle U9\n", ("E_UNDEFINED_REF", 2, 10)),
        ("  rabi 5MHz\n", ("E_INDENT", 1, 3)),
        ("rabi 5MHz\n  seed 1\n", ("E_INDENT", 2, 3)),
        ("seq s:\n  pulse Z 90\n", ("E_VALUE", 2, 9)),
        ("seq s:\n  pulse X -90\n", ("E_VALUE", 2, 11)),
        ("experiment rdja-scan:\n  grid 0ns 10ns 0ns\n", ("E_VALUE", 2, 17)),
        ("seq s:\n  pulse X\n", ("E_SYNTAX", 2, 10)),
        ("seq s:\n  delay 1ns 2ns\n", ("E_SYNTAX", 2, 13)),
        ("seq s:\n", ("E_SYNTAX", 1, 7)),
        ("seq bad name:\n  delay 1ns\n", ("E_SYNTAX", 1, 5)),
    ],
)
def test_error_locations(text, expected):
    assert err(text) == expected


def test_error_message_has_location():
    with pytest.raises(DslError) as info:
        parse_dsl("seq s:\n  delay 400 ns\n")
    assert str(info.value).startswith("2:9:")


def test_experiment_block_and_merge():
    text = (
        "rabi 5.0MHz\nmethod mc:2000\nseed 9\n"
        "experiment echo-scan:\n  t1 0.2us\n  grid 100ns 300ns 10ns\n  ideal-pulses\n  format both\n"
    )
    cfg = config_from_document(parse_dsl(text))
    assert cfg.kind == "echo-scan" and cfg.t1 == 200.0 and cfg.ideal_pulses
    assert (cfg.rabi, cfg.method, cfg.seed, cfg.format) == (5.0, "mc:2000", 9, "both")
    assert cfg.grid_array(None)[-1] == 300.0


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ExperimentConfig("rdja-scan", grid=(0.0, 10.0, -1.0)).validate()
    with pytest.raises(ConfigurationError):
        ExperimentConfig("rdja-scan", method="grid:3").validate()
    with pytest.raises(ConfigurationError):
        ExperimentConfig("teleport").validate()


finite = st.floats(0.001, 1e4, allow_nan=False).map(lambda x: float(np.float64(x)))
names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True)
seq_items = st.one_of(
    st.tuples(st.just("pulse"), st.sampled_from(["X", "Y", "-X", "-Y"]), finite),
    st.tuples(st.just("delay"), st.floats(0.0, 1e5)),
)
modes = st.tuples(st.floats(0.01, 10.0), st.floats(-50.0, 50.0), st.floats(0.0, 5.0))


@st.composite
def documents(draw):
    doc = DslDocument()
    if draw(st.booleans()):
        doc.settings["rabi"] = draw(finite)
    if draw(st.booleans()):
        doc.settings["method"] = draw(st.sampled_from(["quadrature:16", "mc:500"]))
    if draw(st.booleans()):
        doc.settings["seed"] = draw(st.integers(0, 2**32))
    for n in draw(st.lists(names, max_size=3, unique=True)):
        if n not in ("default", "resonant"):
            doc.spectra[n] = tuple(draw(st.lists(modes, min_size=1, max_size=3)))
    for n in draw(st.lists(names, max_size=3, unique=True)):
        doc.sequences[n] = tuple(draw(st.lists(seq_items, min_size=1, max_size=5)))
    if draw(st.booleans()):
        kw = {"kind": draw(st.sampled_from(["rdja-scan", "echo-scan", "markov-transition"]))}
        if draw(st.booleans()):
            start = draw(st.floats(0.0, 100.0))
            kw["grid"] = (start, start + draw(st.floats(1.0, 1000.0)), draw(st.floats(0.5, 50.0)))
        kw["ideal_pulses"] = draw(st.booleans())
        kw["t1"] = draw(st.floats(0.0, 1000.0))
        kw["prominence"] = draw(st.floats(0.0, 0.5))
        kw["format"] = draw(st.sampled_from(["csv", "json", "both"]))
        if doc.spectra and draw(st.booleans()):
            kw["spectrum_name"] = sorted(doc.spectra)[0]
        doc.experiment = ExperimentConfig(**kw)
    return doc


@given(documents())
def test_parse_serialize_round_trip(doc):
    text = serialize_dsl(doc)
    again = parse_dsl(text)
    assert again == doc
    assert serialize_dsl(again) == text
