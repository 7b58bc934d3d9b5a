import csv
import json

import numpy as np
import pytest

from nvrdja.cli import main
from nvrdja.results import ExperimentResult, to_csv_text


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def test_rdja_scan_resonant_contrast_is_one(tmp_path):
    code, out = run(tmp_path, "rdja-scan", "--spectrum", "resonant", "--ideal-pulses", "--grid", "0", "200", "50")
    assert code == 0
    header, rows = read_csv(out.with_suffix(".csv"))
    assert header == ["tau_ns", "p0_u1", "p0_u2", "p0_u3", "p0_u4", "contrast"]
    assert [float(r[-1]) for r in rows] == [1.0] * 5


def test_echo_scan_columns(tmp_path):
    code, out = run(tmp_path, "echo-scan", "--grid", "150", "190", "10", "--method", "quadrature:16")
    assert code == 0
    header, rows = read_csv(out.with_suffix(".csv"))
    assert header == ["t2_ns", "p0_constant", "p0_balanced", "pos"]
    assert len(rows) == 5
    pos = [float(r[3]) for r in rows]
    assert pos[2] == max(pos)


def test_echo_scan_with_signal_model(tmp_path):
    cfg = tmp_path / "e.nvr"
    cfg.write_text("experiment echo-scan:\n  grid 160ns 180ns 10ns\n  signal 0.03 0.021 1000000\n")
    code, out = run(tmp_path, "run", "--config", str(cfg), "--method", "quadrature:16")
    assert code == 0
    _, rows = read_csv(out.with_suffix(".csv"))
    assert float(rows[1][3]) > 0.97


def test_trace_distance_closed_form(tmp_path):
    code, out = run(tmp_path, "trace-distance", "--ideal-pulses", "--grid", "0", "1400", "10")
    assert code == 0
    _, rows = read_csv(out.with_suffix(".csv"))
    t = np.array([float(r[0]) for r in rows])
    d = np.array([float(r[1]) for r in rows])
    closed = np.abs(1 / 3 + 2 / 3 * np.cos(2 * np.pi * 2.17e-3 * t)) * np.exp(-((t / 1382.0) ** 2))
    assert np.max(np.abs(d - closed)) < 1e-6


def test_non_markovianity_and_fit(tmp_path):
    code, out = run(tmp_path, "non-markovianity", "--grid", "0", "1400", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out.with_suffix(".json").read_text())
    assert doc["schema_version"] == 1
    assert doc["columns"] == ["n_revival_sum", "n_integral", "prominence"]
    n_rev, n_int, _ = doc["rows"][0]
    assert abs(n_rev - n_int) < 1e-9

    code, out = run(tmp_path, "fit", name="fit")
    assert code == 0
    header, rows = read_csv(out.with_suffix(".csv"))
    assert header == ["a", "b", "delta_mhz", "T_ns", "residual_rms"]
    a, b, delta, T, _ = map(float, rows[0])
    assert (delta, T, b / a) == pytest.approx((2.17, 1382.0, 2.0), rel=1e-3)


def test_fit_from_input_file(tmp_path):
    t = np.arange(0.0, 2001.0, 10.0)
    d = np.abs(0.105 + 0.218 * np.cos(2 * np.pi * 2.17e-3 * t)) * np.exp(-((t / 1382.0) ** 2))
    src = tmp_path / "measured.csv"
    src.write_text("t_ns,trace_distance\n" + "".join(f"{x},{y}\n" for x, y in zip(t, d)))
    code, out = run(tmp_path, "fit", "--input", str(src))
    assert code == 0
    _, rows = read_csv(out.with_suffix(".csv"))
    assert float(rows[0][0]) == pytest.approx(0.105, rel=1e-3)


def test_markov_transition_monotone(tmp_path):
    code, out = run(tmp_path, "markov-transition", "--grid", "0", "1000", "2", "--method", "quadrature:32")
    assert code == 0
    header, rows = read_csv(out.with_suffix(".csv"))
    assert header == ["field_mT", "polarization", "n_value"]
    b = np.array([float(r[0]) for r in rows])
    n = np.array([float(r[2]) for r in rows])
    assert np.all(np.diff(n) <= 1e-12)
    assert np.all(n[b >= 35] < 1e-6)


def test_rabi_and_run_seq(tmp_path):
    code, out = run(tmp_path, "rabi", "--spectrum", "resonant", "--format", "both")
    assert code == 0
    meta = json.loads(out.with_suffix(".json").read_text())["metadata"]
    assert meta["dft_frequency_mhz"] == pytest.approx(5.37, abs=0.02)
    assert meta["pi_time_ns"] == pytest.approx(93.1, abs=0.5)

    cfg = tmp_path / "s.nvr"
    cfg.write_text("seq half:\n  pulse X 90\nexperiment run-seq:\n  seq half\n  spectrum resonant\n")
    code, out = run(tmp_path, "run", "--config", str(cfg), name="seq")
    assert code == 0
    header, rows = read_csv(out.with_suffix(".csv"))
    assert header == ["seq", "p0", "x", "y", "z"]
    assert rows[0][0] == "half"
    assert [float(v) for v in rows[0][1:]] == pytest.approx([0.5, 0.0, -1.0, 0.0], abs=1e-12)


def test_reruns_byte_identical(tmp_path):
    argv = ["rdja-scan", "--grid", "0", "100", "20", "--method", "mc:2000", "--seed", "11", "--format", "both"]
    out = str(tmp_path / "a")
    assert main([*argv, "--out", out]) == 0
    first = {ext: (tmp_path / f"a{ext}").read_bytes() for ext in (".csv", ".json")}
    assert main([*argv, "--out", out]) == 0
    for ext, data in first.items():
        assert (tmp_path / f"a{ext}").read_bytes() == data
    assert b"\r" not in first[".csv"]


def test_empty_result_is_header_only():
    assert to_csv_text(ExperimentResult("rdja-scan", ["tau_ns", "contrast"])) == "tau_ns,contrast\n"


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.nvr"
    bad.write_text("seq s:\n  delay 400 ns\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert "E_BAD_UNIT" in capsys.readouterr().err
    assert main(["rdja-scan", "--method", "simplex:3"]) == 1
    assert main(["rdja-scan", "--grid", "10", "0", "1"]) == 1
    assert main(["rdja-scan", "--spectrum", "nowhere"]) == 1
    # under-determined fit: a runtime failure, not a config error
    assert main(["fit", "--grid", "0", "300", "10", "--out", str(tmp_path / "f")]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.nvr")]) == 3
    assert main(["rdja-scan", "--spectrum", "resonant", "--grid", "0", "10", "10", "--out", str(tmp_path / "no" / "dir" / "x")]) == 3
