import csv
import io
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from hexloops.cli import UsageError, main, parse_config, parse_number
from hexloops.experiments import CSV_COLUMNS


def read_report(text):
    lines = text.splitlines()
    assert lines[0] == "# hexloops report schema v1"
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert tuple(rows[0]) == CSV_COLUMNS
    return rows[1:]


def test_parse_number():
    assert parse_number("3/2") == Fraction(3, 2)
    assert parse_number("2") == 2 and isinstance(parse_number("2"), int)
    assert parse_number("0.5") == Fraction(1, 2)
    assert parse_number("sqrt(3)") == pytest.approx(math.sqrt(3))
    assert parse_number("1/sqrt(3)") == pytest.approx(1 / math.sqrt(3))
    with pytest.raises(UsageError):
        parse_number("abc")


def test_parse_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# defaults\nk = 1,2\nx = sqrt(3)  # antiferro\ntrials 50\n")
    assert parse_config(p) == {"k": "1,2", "x": "sqrt(3)", "trials": "50"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("lonely\n")
    with pytest.raises(UsageError):
        parse_config(bad)


def test_perco_pass_writes_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["perco", "--k", "1", "--out", str(out)]) == 0
    rows = read_report(out.read_text())
    assert rows and all(r[6] in ("PASS", "") for r in rows)
    assert any(r[5] == "1" for r in rows)


def test_stdout_report(capsys):
    assert main(["torus", "--k", "2", "--n", "3/2"]) == 0
    rows = read_report(capsys.readouterr().out)
    assert rows[0][0] == "torus"


def test_usage_errors(capsys):
    assert main(["nope"]) == 2
    assert main(["torus", "--k", "2", "--n", "3"]) == 2
    assert main(["torus", "--k", "x"]) == 2
    assert main(["perco", "--config", "/nonexistent/file"]) == 2
    assert "error" in capsys.readouterr().err


def test_config_file_drives_run(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 1\nn = 3/2\n")
    out = tmp_path / "r.csv"
    assert main(["torus", "--config", str(cfg), "--k", "2", "--out", str(out)]) == 0
    assert "k=2" in out.read_text()


def test_svg_snapshot(tmp_path):
    svg = tmp_path / "s.svg"
    assert main(["perco", "--k", "1", "--out", str(tmp_path / "r.csv"), "--svg", str(svg)]) == 0
    assert svg.read_text().startswith("<svg")


def test_failing_row_exit_code(tmp_path, monkeypatch):
    from hexloops import cli
    from hexloops.experiments import EventReport

    monkeypatch.setitem(cli.EXPERIMENTS, "perco", lambda *a, **k: [EventReport("perco", {}, "e", 0.1, passed=False)])
    assert main(["perco", "--out", str(tmp_path / "r.csv")]) == 1


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "hexloops.cli", "perco", "--k", "1"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("# hexloops report schema v1")
