from __future__ import annotations

import csv
import json

import pytest

from ecoepi.cli import main
from ecoepi.config import load_preset

TABLE2 = {  # (figure, k): (rho1, rho2, rho3, phi)
    ("8A,8B", 0.0): (0.0942, 0.0297, 0.0024, 0.0004),
    ("8A", 15.0): (0.3215, 0.0455, -0.0019, 0.0165),
    ("8B", 15.0): (0.3194, 0.0446, -0.0020, 0.0162),
}


def small_config(tmp_path, **changes):
    cfg = load_preset("row_C")
    text = cfg.to_string()
    text = text.replace("times = 200.0, 300.0, 500.0, 1000.0", "times = 0.5, 1.0")
    text = text.replace("L = 3.141592653589793", "L = 0.2")
    for key, value in changes.items():
        text = "\n".join(f"{key} = {value}" if line.startswith(f"{key} = ") else line
                         for line in text.splitlines()) + "\n"
    path = tmp_path / "small.ini"
    path.write_text(text)
    return path


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_reproduce_table2(tmp_path, capsys):
    assert main(["reproduce", "table2", "--out", str(tmp_path)]) == 0
    with (tmp_path / "table2.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    for row in rows:
        expected = TABLE2[(row["figure"], float(row["k"]))]
        got = tuple(float(row[c]) for c in ("rho1", "rho2", "rho3", "phi"))
        assert got == pytest.approx(expected, abs=2e-3)
    m = manifest(tmp_path)
    assert m["command"] == "reproduce table2"
    assert [a["path"] for a in m["artifacts"]] == ["table2.csv"]


def test_negative_parameter_exits_2(tmp_path, capsys):
    cfg = small_config(tmp_path, r=-0.4)
    assert main(["equilibria", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "r" in capsys.readouterr().err


def test_guard_violation_exits_2(tmp_path, capsys):
    cfg = small_config(tmp_path, d2="0.5")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "unstable FTCS grid" in capsys.readouterr().err


def test_missing_equilibrium_exits_3(tmp_path, capsys):
    cfg = small_config(tmp_path, **{"lambda": "0.0"})
    for cmd in ("stability", "turing-check", "simulate"):
        assert main([cmd, "--config", str(cfg), "--out", str(tmp_path / cmd)]) == 3
    assert "equilibrium" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["equilibria", "--out", str(tmp_path)]) == 2
    assert main(["equilibria", "--config", "no_such_thing", "--out", str(tmp_path)]) == 2


def test_simulate_manifest_and_determinism(tmp_path):
    cfg = small_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(a), "--serial"]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b), "--serial"]) == 0
    ma, mb = manifest(a), manifest(b)
    assert ma["config_hash"] == mb["config_hash"]
    strip = lambda m: [(x["path"], x["sha256"]) for x in m["artifacts"]]
    assert strip(ma) == strip(mb)
    snaps = [x["path"] for x in ma["artifacts"] if x["path"].endswith(".csv")]
    assert len(snaps) == 6  # three fields at two times
    assert {p.split("_")[2] for p in snaps} == {"u", "v", "w"}
    assert ma["serial"] and set(ma["versions"]) >= {"ecoepi", "python", "numpy", "numba"}


def test_sigma_change_changes_hash(tmp_path):
    base = small_config(tmp_path)
    assert main(["turing-check", "--config", str(base), "--out", str(tmp_path / "a")]) == 0
    other = small_config(tmp_path, sigma="0.0051")
    assert main(["turing-check", "--config", str(other), "--out", str(tmp_path / "b")]) == 0
    assert manifest(tmp_path / "a")["config_hash"] != manifest(tmp_path / "b")["config_hash"]


def test_classify_reads_simulate_output(tmp_path, capsys):
    cfg = small_config(tmp_path)
    cfg.write_text(cfg.read_text().replace("times = 0.5, 1.0", "times = 100.0, 200.0"))
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["classify", "--config", str(cfg), "--out", str(out)]) == 0
    assert "label=" in capsys.readouterr().out
    assert (out / "row_C_pattern.txt").exists()


@pytest.mark.parametrize("cmd", ["equilibria", "stability", "bounds", "dispersion", "turing-check"])
def test_cheap_subcommands_run(tmp_path, cmd):
    assert main([cmd, "--config", "paraeq", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "manifest.json").exists()


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    assert "row_A" in capsys.readouterr().out
