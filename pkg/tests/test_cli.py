"""Command-line runner tests, all in process through run()/main().

The contract under test: flags beat config files, execution knobs stay out
of the metadata block, identical configurations give identical bytes, and
the three error families map to exit codes 1/2/3.
"""

import csv
import json
import subprocess
import sys

import pytest

from ncflow import cli, ncmeasure
from ncflow._util import ConfigError


def _run_to_file(tmp_path, name, argv):
    out = tmp_path / name
    cli.run(argv + ["--out", str(out)])
    return out.read_text(encoding="utf-8")


def _parse_csv(text):
    meta, data_lines = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        else:
            data_lines.append(line)
    parsed = list(csv.reader(data_lines))
    return meta, parsed[0], parsed[1:]


# -- happy paths --------------------------------------------------------------

def test_sig_command_writes_signature_table(tmp_path):
    src = tmp_path / "paths.txt"
    src.write_text("# one L-shaped path\n1.0,0.0; 0.0,1.0\n", encoding="utf-8")
    text = _run_to_file(tmp_path, "sig.csv",
                        ["sig", "--path", str(src), "--cap", "2"])
    meta, header, rows = _parse_csv(text)
    assert meta["experiment"] == "sig"
    assert meta["cap"] == "2"
    assert header == ["path", "word", "re", "im"]
    table = {r[1]: float(r[2]) for r in rows}
    # all of coordinate 1 moves before coordinate 2, so the ordered double
    # integral is the full product for "1 2" and empty the other way round
    # (zero coefficients are not emitted)
    assert table["1 2"] == pytest.approx(1.0)
    assert "2 1" not in table
    assert table["1"] == pytest.approx(1.0)
    assert table["1 1"] == pytest.approx(0.5)


def test_bch_command_pins_low_degrees(tmp_path):
    text = _run_to_file(tmp_path, "bch.csv", ["bch", "--degree", "3"])
    meta, header, rows = _parse_csv(text)
    assert header[:3] == ["degree", "lyndon_word", "bracketing"]
    table = {r[1]: (r[2], float(r[3])) for r in rows}
    assert table["1"][1] == pytest.approx(1.0)
    assert table["1 2"][1] == pytest.approx(0.5)
    assert table["1 2"][0] == "[1,2]"
    assert table["1 1 2"][1] == pytest.approx(1.0 / 12.0)


def test_lyndon_basis_command(tmp_path):
    text = _run_to_file(tmp_path, "lyndon.csv",
                        ["lyndon-basis", "--n", "2", "--degree", "3"])
    _, _, rows = _parse_csv(text)
    words = [r[1] for r in rows]
    assert words == ["1", "2", "1 2", "1 1 2", "1 2 2"]


def test_shuffle_check_reports_tiny_residuals(tmp_path):
    text = _run_to_file(tmp_path, "shuffle.csv",
                        ["shuffle-check", "--seed", "5", "--trials", "4"])
    meta, _, rows = _parse_csv(text)
    assert float(meta["max-residual"]) < 1e-10
    assert len(rows) == 8  # one shuffle and one deconcat row per trial
    assert {r[0] for r in rows} == {"shuffle", "deconcat"}


def test_free_moments_dump_table_round_trips(tmp_path):
    dump = tmp_path / "moments.txt"
    text = _run_to_file(tmp_path, "free.csv",
                        ["free-moments", "--rule", "free(gauss,gauss)",
                         "--words", "1 1; 1 1 1 1; 1 2 1 2",
                         "--dump-table", str(dump), "--max-degree", "4"])
    _, _, rows = _parse_csv(text)
    values = {r[0]: float(r[1]) for r in rows}
    assert values["1 1"] == 1.0
    assert values["1 1 1 1"] == 3.0
    assert values["1 2 1 2"] == 0.0
    with open(dump, encoding="utf-8") as fh:
        back = ncmeasure.load_moments(fh)
    assert back.eval((1, 1, 1, 1)) == 3.0


def test_al_identity_command(tmp_path):
    text = _run_to_file(tmp_path, "al.csv",
                        ["al-identity", "--seed", "9", "--trials", "3",
                         "--size", "2"])
    meta, _, rows = _parse_csv(text)
    assert len(rows) == 3
    assert float(meta["max-residual"]) < 1e-12


def test_gue_moments_command_small(tmp_path):
    text = _run_to_file(tmp_path, "gue.csv",
                        ["gue-moments", "--seed", "3", "--N", "8",
                         "--samples", "25", "--words", "1 1; 1 2 1 2"])
    meta, header, rows = _parse_csv(text)
    assert header[-3:] == ["word", "free_prediction", "classical_free_prediction"]
    by_word = {r[-3]: r for r in rows}
    assert float(by_word["1 1"][-2]) == 1.0
    assert float(by_word["1 2 1 2"][-2]) == 0.0
    # the estimate column should sit near 1 for the square word even at N=8
    assert abs(float(by_word["1 1"][4]) - 1.0) < 0.3


def test_matrix_fourier_command_scalar_case(tmp_path):
    text = _run_to_file(tmp_path, "mf.csv",
                        ["matrix-fourier", "--seed", "11", "--N", "1",
                         "--samples", "400", "--gamma", "1",
                         "--function", "expsq"])
    meta, header, rows = _parse_csv(text)
    assert len(rows) == 1
    assert "volume-vn" in meta
    assert abs(float(rows[0][4]) - 0.2197) < 0.1


def test_stdout_output(capsys):
    cli.run(["bch", "--degree", "2"])
    captured = capsys.readouterr().out
    assert captured.startswith("# experiment = bch")
    assert "lyndon_word" in captured


# -- config files --------------------------------------------------------------

def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ndegree = 4\nn = 2\n", encoding="utf-8")
    text = _run_to_file(tmp_path, "bch.csv", ["bch", "--config", str(cfg)])
    meta, _, rows = _parse_csv(text)
    assert meta["degree"] == "4"
    assert any(len(r[1].split()) == 4 for r in rows)


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("degree = 4\n", encoding="utf-8")
    text = _run_to_file(tmp_path, "bch.csv",
                        ["bch", "--config", str(cfg), "--degree", "2"])
    meta, _, rows = _parse_csv(text)
    assert meta["degree"] == "2"
    assert all(len(r[1].split()) <= 2 for r in rows)


def test_unknown_config_key_is_rejected(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("degrees = 4\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        cli.run(["bch", "--config", str(cfg)])
    cfg.write_text("no separator here\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        cli.run(["bch", "--config", str(cfg)])


# -- metadata and determinism ---------------------------------------------------

def test_metadata_excludes_execution_keys(tmp_path):
    text = _run_to_file(tmp_path, "shuffle.csv",
                        ["shuffle-check", "--seed", "5", "--trials", "2",
                         "--jobs", "3", "--format", "csv"])
    meta, _, _ = _parse_csv(text)
    assert "seed" in meta and "trials" in meta and "version" in meta
    for key in ("out", "format", "jobs", "config", "func", "needs", "command"):
        assert key not in meta
    assert meta["experiment"] == "shuffle-check"


def test_reruns_are_byte_identical(tmp_path):
    argv = ["wiener-expsig", "--seed", "17", "--n", "2", "--cap", "2",
            "--q", "4", "--paths", "1500"]
    a = _run_to_file(tmp_path, "a.csv", argv)
    b = _run_to_file(tmp_path, "b.csv", argv)
    assert a == b


def test_jobs_flag_does_not_change_bytes(tmp_path):
    base = ["wiener-expsig", "--seed", "17", "--n", "2", "--cap", "3",
            "--q", "5", "--paths", "3000"]
    serial = _run_to_file(tmp_path, "serial.csv", base + ["--jobs", "1"])
    threaded = _run_to_file(tmp_path, "threaded.csv", base + ["--jobs", "4"])
    assert serial == threaded


def test_json_mirrors_csv(tmp_path):
    argv = ["bch", "--degree", "3"]
    text_csv = _run_to_file(tmp_path, "t.csv", argv + ["--format", "csv"])
    text_json = _run_to_file(tmp_path, "t.json", argv + ["--format", "json"])
    meta, header, rows = _parse_csv(text_csv)
    body = json.loads(text_json)
    assert body["header"] == header
    assert len(body["rows"]) == len(rows)
    assert body["meta"]["experiment"] == "bch"
    assert body["meta"]["degree"] == meta["degree"]
    assert body["rows"][0][:2] == rows[0][:2]


# -- exit codes ----------------------------------------------------------------

def test_exit_code_for_config_errors(tmp_path, capsys):
    assert cli.main(["bogus"]) == 1
    assert cli.main([]) == 1
    assert cli.main(["sig"]) == 1  # missing --path
    assert cli.main(["sig", "--path", str(tmp_path / "absent.txt")]) == 1
    assert cli.main(["shuffle-check", "--trials", "2"]) == 1  # missing seed
    assert cli.main(["haar-coeff", "--seed", "1", "--f", "3; 2"]) == 1
    assert cli.main(["matrix-fourier", "--seed", "1",
                     "--function", "nope"]) == 1
    err = capsys.readouterr().err
    assert "config error" in err


def test_exit_code_for_guard_violations(capsys):
    assert cli.main(["gue-moments", "--seed", "1", "--N", "300",
                     "--samples", "5", "--words", "1 1"]) == 2
    assert "guard violation" in capsys.readouterr().err


def test_exit_code_for_failed_numerical_checks(capsys):
    assert cli.main(["heis-heat", "--seed", "1", "--paths", "50", "--q", "3",
                     "--quad-T", "0.5", "--quad-steps", "64"]) == 3
    assert "numerical check failed" in capsys.readouterr().err


def test_success_exit_code(tmp_path):
    out = tmp_path / "ok.csv"
    assert cli.main(["bch", "--degree", "2", "--out", str(out)]) == 0


def test_installed_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "ncflow", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("ncflow ")
