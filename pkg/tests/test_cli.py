import csv
import io
import json
import os
import stat
import subprocess
import sys
from pathlib import Path

import pytest

from ncfields.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_TOLERANCE,
    EXIT_USAGE,
    main,
    parse_float_list,
    parse_int_range,
)

GOLDEN = Path(__file__).parent / "golden"

# (golden file, argv) pairs; golden files are regenerated with
# ``python3 tests/make_golden.py`` and reviewed by hand.
GOLDEN_CASES = {
    "spectrum.csv": ["spectrum", "--theta", "0,1", "--n", "1..3"],
    "spectrum_doubled.csv": ["spectrum", "--kind", "E", "--theta", "1,2", "--n", "1..2", "--doubled-splitting"],
    "dressing.csv": ["dressing-check", "--theta", "0,10", "--n-max", "8"],
    "evolve.csv": ["evolve", "--kind", "B", "--theta", "1", "--n", "1", "--t-end", "1", "--dt", "0.1"],
    "velocities.csv": ["qhe", "velocities"],
    "filling.csv": ["qhe", "filling", "--m", "0..2", "--theta-bar", "1,2"],
    "jain.csv": ["qhe", "jain", "--m", "1", "--p", "1..3"],
    "dispersion.csv": ["qhe", "dispersion", "--theta", "1", "--n", "1..4"],
    "phases.json": ["qhe", "phases", "--m", "0", "--theta", "1", "--format", "json"],
}

EXPECTED_EXIT = {"spectrum_doubled.csv": EXIT_TOLERANCE, "jain.csv": EXIT_TOLERANCE}


def run(argv, out=None):
    args = list(argv)
    if out is not None:
        args += ["--out", str(out)]
    return main(args)


def read_rows(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


def _close(a, b):
    try:
        x, y = float(a), float(b)
    except ValueError:
        return a == b
    return abs(x - y) <= 1e-12 * max(1.0, abs(x), abs(y))


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_outputs(name, tmp_path):
    out = tmp_path / name
    code = run(GOLDEN_CASES[name], out)
    assert code == EXPECTED_EXIT.get(name, EXIT_OK)
    got, want = out.read_text(), (GOLDEN / name).read_text()
    if got == want:
        return
    # Eigensolver output may differ in the last digits between BLAS builds.
    if name.endswith(".json"):
        g, w = json.loads(got), json.loads(want)
        assert len(g) == len(w)
        for a, b in zip(g, w):
            assert a.keys() == b.keys()
            assert all(_close(str(a[k]), str(b[k])) for k in a)
    else:
        g, w = got.splitlines(), want.splitlines()
        assert g[0] == w[0] and len(g) == len(w)
        for a, b in zip(g[1:], w[1:]):
            assert all(_close(x, y) for x, y in zip(a.split(","), b.split(",")))


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_runs_are_byte_identical(name, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(GOLDEN_CASES[name], a)
    run(GOLDEN_CASES[name], b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_uses_lf_and_header(tmp_path):
    out = tmp_path / "s.csv"
    run(["spectrum", "--theta", "0", "--n", "1..3", "--kind", "E"], out)
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = read_rows(out)
    assert len(rows) == 3
    for row in rows:
        n = float(row["n"])
        for key in ("closed_minus", "closed_plus", "oracle_minus", "oracle_plus"):
            assert abs(float(row[key]) - n) < 1e-12
        assert float(row["deviation"]) < 1e-12


def test_spectrum_tolerance_violation_fixture(tmp_path):
    out = tmp_path / "s.csv"
    code = run(["spectrum", "--kind", "E", "--theta", "1,2", "--n", "1..2", "--doubled-splitting"], out)
    assert code == EXIT_TOLERANCE
    rows = {(r["theta"], r["n"]): r for r in read_rows(out)}
    assert abs(float(rows[("1.0", "1")]["closed_plus"]) - 2.1180339887498949) < 1e-12
    assert abs(float(rows[("1.0", "1")]["closed_minus"]) - 0.1180339887498949) < 1e-12
    assert rows[("2.0", "2")]["stable"] == "false"


def test_unwritable_path_fixture(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(stat.S_IRUSR | stat.S_IXUSR)
    try:
        target = locked / "x.csv"
        code = run(["qhe", "filling"], target)
        if os.access(locked, os.W_OK):  # running as a privileged user
            target = tmp_path / "missing" / "x.csv"
            code = run(["qhe", "filling"], target)
        assert code == EXIT_IO
    finally:
        locked.chmod(stat.S_IRWXU)


def test_usage_errors():
    assert run(["spectrum", "--kind", "Q"]) == EXIT_USAGE
    assert run(["spectrum", "--n", "a..b"]) == EXIT_USAGE
    assert run(["evolve", "--kind", "both"]) == EXIT_USAGE
    assert run(["spectrum", "--n", "0..2"]) == EXIT_USAGE
    assert run([]) == EXIT_USAGE


def test_evolve_step_failure(tmp_path, capsys):
    code = run(["evolve", "--kind", "E", "--theta", "1", "--n", "3", "--dt", "0.5"], tmp_path / "t.csv")
    assert code == EXIT_TOLERANCE
    assert "step failure" in capsys.readouterr().err
    code = run(
        ["evolve", "--kind", "E", "--theta", "1", "--n", "3", "--dt", "0.5", "--method", "midpoint"],
        tmp_path / "t.csv",
    )
    assert code == EXIT_TOLERANCE


def test_evolve_reports_peaks(tmp_path, capsys):
    code = run(["evolve", "--kind", "B", "--theta", "1", "--n", "1", "--t-end", "409.6"], tmp_path / "t.csv")
    assert code == EXIT_OK
    err = capsys.readouterr().err
    peaks = [float(v) for v in err.split("fft peaks ")[1].splitlines()[0].split()]
    assert len(peaks) == 2
    assert abs(peaks[0] - 0.618) < 0.016 and abs(peaks[1] - 1.618) < 0.016


def test_evolve_undeformed_peak(tmp_path, capsys):
    run(["evolve", "--kind", "E", "--theta", "0", "--n", "2", "--t-end", "200"], tmp_path / "t.csv")
    err = capsys.readouterr().err
    peaks = [float(v) for v in err.split("fft peaks ")[1].splitlines()[0].split()]
    assert len(peaks) == 1 and abs(peaks[0] - 2.0) < 0.032


def test_dressing_both_kinds(tmp_path):
    out = tmp_path / "d.csv"
    assert run(["dressing-check", "--theta", "0,10"], out) == EXIT_OK
    rows = read_rows(out)
    assert [r["kind"] for r in rows] == ["E", "E", "B", "B"]
    assert all(float(r["residual"]) < 1e-12 for r in rows)


def test_qhe_tables(tmp_path):
    out = tmp_path / "f.csv"
    run(["qhe", "filling", "--m", "1", "--theta-bar", "1"], out)
    assert float(read_rows(out)[0]["nu"]) == 1 / 3
    run(["qhe", "jain", "--m", "1", "--p", "2"], out)
    row = read_rows(out)[0]
    assert float(row["theta_bar"]) == 5 / 6 and float(row["nu_target"]) == 0.5
    assert row["real_theta_exists"] == "false"
    assert run(["qhe", "jain", "--m", "1", "--p", "1..4", "--variant", "consistent"], out) == EXIT_OK
    run(["qhe", "dispersion", "--theta", "1", "--n", "1..4"], out)
    assert [(int(r["n"]), float(r["energy"])) for r in read_rows(out)] == [(1, 2), (2, 10), (3, 30), (4, 68)]


def test_velocities_from_model_file(tmp_path):
    model = tmp_path / "m.txt"
    model.write_text("kind=general\nN=2\ntheta=0\nomega=2 0 0 -3\n")
    out = tmp_path / "v.csv"
    assert run(["qhe", "velocities", "--model", str(model)], out) == EXIT_OK
    assert [float(r["velocity"]) for r in read_rows(out)] == [2.0, -3.0]
    model.write_text("N=2\nomega=1 2 3 4\n")
    assert run(["qhe", "velocities", "--model", str(model)], out) == EXIT_USAGE
    assert run(["qhe", "velocities", "--model", str(tmp_path / "none")], out) == EXIT_IO


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\ntheta=0.5\nn=2\nkind=B\n")
    out = tmp_path / "s.csv"
    run(["spectrum", "--config", str(cfg)], out)
    rows = read_rows(out)
    assert [(r["kind"], r["theta"], r["n"]) for r in rows] == [("B", "0.5", "2")]
    run(["spectrum", "--config", str(cfg), "--theta", "1"], out)
    assert [(r["kind"], r["theta"], r["n"]) for r in read_rows(out)] == [("B", "1.0", "2")]
    cfg.write_text("bogus=1\n")
    assert run(["spectrum", "--config", str(cfg)], out) == EXIT_USAGE
    assert run(["spectrum", "--config", str(tmp_path / "nope.cfg")], out) == EXIT_IO


def test_output_dir_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NCFIELDS_OUTPUT_DIR", str(tmp_path))
    assert main(["qhe", "filling"]) == EXIT_OK
    assert (tmp_path / "filling.csv").exists()
    assert main(["qhe", "phases", "--format", "json"]) == EXIT_OK
    assert isinstance(json.loads((tmp_path / "phases.json").read_text()), list)


def test_stdout_when_no_destination(capsys, monkeypatch):
    monkeypatch.delenv("NCFIELDS_OUTPUT_DIR", raising=False)
    assert main(["qhe", "dispersion", "--theta", "0", "--n", "1..2"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "theta,n,energy,oracle,rel_deviation"


def test_argument_parsers():
    assert parse_int_range("1..3") == [1, 2, 3]
    assert parse_int_range("2:4") == [2, 3, 4]
    assert parse_int_range("5,1") == [5, 1]
    assert parse_float_list("-1,0.5") == [-1.0, 0.5]


def test_module_entry_point(tmp_path):
    out = tmp_path / "f.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "ncfields", "qhe", "filling", "--m", "1", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("m,theta_bar,exponent,nu\n")
