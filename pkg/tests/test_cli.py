import re
import subprocess
import sys

import pytest

from commevo.cli import COLUMNS, main, parse_config
from commevo.errors import ConfigError
from commevo.scenarios import BACKENDS, SCENARIOS, list_scenarios

FAST = """
[experiment:heis]
scenario = heisenberg_limit
[experiment:rand]
scenario = heisenberg_random
levels = 2-6
tol = 0.1
[experiment:free]
scenario = schrodinger_free
levels = 0
"""


def _write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_catalogue():
    assert len(SCENARIOS) >= 8
    assert {sc.backend for sc in SCENARIOS.values()} == set(BACKENDS)
    assert all(sc.anchor for sc in SCENARIOS.values())


@pytest.mark.parametrize("backend", BACKENDS)
def test_list_filter(backend):
    subset = list_scenarios(backend)
    assert subset and all(sc.backend == backend for sc in subset)


def test_list_command(capsys):
    assert main(["list"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) >= 8
    assert main(["list", "--backend", "nope"]) == 0
    assert capsys.readouterr().out == ""


def test_run_writes_csv(tmp_path, capsys):
    cfg = _write(tmp_path, FAST)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and all(line.startswith("PASS") for line in lines)
    text = (tmp_path / "out" / "heis.csv").read_text()
    rows = text.splitlines()
    assert rows[0].startswith("# commevo results v1")
    assert rows[2] == ",".join(COLUMNS)
    assert len(rows) == 3 + 8


def test_seed_changes_random_scenario(tmp_path):
    cfg = _write(tmp_path, FAST)
    main(["--quiet", "--seed", "1", "run", str(cfg), "--out", str(tmp_path / "a")])
    main(["--quiet", "--seed", "2", "run", str(cfg), "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "rand.csv").read_bytes()
    b = (tmp_path / "b" / "rand.csv").read_bytes()
    assert a != b
    assert (tmp_path / "a" / "heis.csv").read_bytes() == (tmp_path / "b" / "heis.csv").read_bytes()


def test_quiet(tmp_path, capsys):
    cfg = _write(tmp_path, FAST)
    assert main(["run", str(cfg), "--quiet", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out == ""


def test_free_schrodinger_round_off(tmp_path):
    cfg = _write(tmp_path, "[experiment:f]\nscenario = schrodinger_free\nlevels = 0\n")
    main(["--quiet", "run", str(cfg), "--out", str(tmp_path)])
    row = (tmp_path / "f.csv").read_text().splitlines()[3].split(",")
    assert all(float(v) <= 1e-12 for v in row[3:] if v)


def test_failing_experiment_exits_one(tmp_path, capsys):
    cfg = _write(tmp_path, "[experiment:tight]\nscenario = heisenberg_limit\ntol = 1e-9\nlevels = 3-5\n")
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 1
    assert capsys.readouterr().out.startswith("FAIL")


@pytest.mark.parametrize("text,msg", [
    ("garbage", "section"),
    ("[other]\nx = 1\n", "no [experiment]"),
    ("[experiment]\nlevels = 1\n", "missing 'scenario'"),
    ("[experiment]\nscenario = nope\n", "unknown scenario"),
    ("[experiment]\nscenario = heisenberg_limit\nbackend = weyl\n", "runs on heisenberg"),
    ("[experiment]\nscenario = heisenberg_limit\nbackend = quantum\n", "unknown backend"),
    ("[experiment]\nscenario = heisenberg_limit\nwidth = 2\n", "no parameter"),
    ("[experiment]\nscenario = heisenberg_limit\nslope = abc\n", "could not convert"),
    ("[experiment]\nscenario = heisenberg_limit\nlevels = 3-x\n", "invalid literal"),
    ("[experiment]\nscenario = heisenberg_limit\ntol = 0\n", "tol must be"),
    ("[experiment]\nscenario = heisenberg_limit\nseed = -4\n", "u64"),
])
def test_malformed_configs(text, msg):
    with pytest.raises(ConfigError, match=re.escape(msg)):
        parse_config(text)


def test_malformed_config_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "[experiment]\nscenario = nope\n")
    assert main(["run", str(cfg)]) != 0
    err = capsys.readouterr().err
    assert err.startswith("error: config:")


def test_missing_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.ini")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "commevo.cli", "list", "--backend", "weyl"],
                          capture_output=True, text=True, check=True)
    assert "weyl_segal" in proc.stdout
