import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from momentchain import cli
from momentchain.io import matrix_from_json

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spectrum_odd_and_even(tmp_path):
    assert cli.main(["spectrum", "--order", "4", "--out", str(tmp_path / "s.csv")]) == 0
    rows = read_csv(tmp_path / "s.csv")
    zero = [r for r in rows if r["k"] == "2"]
    assert zero and all(float(r["re_E"]) == 0 and float(r["im_E"]) == 0 for r in zero)
    assert len(rows) == 201 * 5
    cli.main(["spectrum", "--order", "3", "--out", str(tmp_path / "e.csv")])
    for r in read_csv(tmp_path / "e.csv"):
        if float(r["delta_over_gamma"]) != 1.0:
            assert complex(float(r["re_E"]), float(r["im_E"])) != 0


def test_spectrum_flag_overrides_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"order": 2, "ratios": [0.0, 3.0]}))
    cli.main(["spectrum", "--config", str(cfg), "--gamma", "2", "--out", str(tmp_path / "s.csv")])
    rows = read_csv(tmp_path / "s.csv")
    assert len(rows) == 6
    assert float(rows[0]["re_E"]) == 4.0


def test_byte_identical_reruns(tmp_path):
    args = ["ipr", "--order", "6", "--out"]
    cli.main(args + [str(tmp_path / "a.csv")])
    cli.main(args + [str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_modes_writes_classes(tmp_path):
    assert cli.main(["modes", "--order", "20", "--out", str(tmp_path / "m.csv")]) == 0
    classes = read_csv(tmp_path / "m.classes.csv")
    lookup = {(r["delta_over_gamma"], r["k"]): r["class"] for r in classes}
    assert lookup[("0.5", "0")] == "extended"
    assert lookup[("2", "0")] == "right_edge"


def test_evolve_fit(tmp_path):
    out = tmp_path / "e.csv"
    assert cli.main(["evolve", "--out", str(out)]) == 0
    fit = json.loads((tmp_path / "e.fit.json").read_text())
    assert fit["uniform"] and abs(fit["rates"][0][0] - 9) < 0.09
    assert read_csv(out)[0].keys() == {"t", "j", "re", "im"}


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["spectrum", "--order", "0", "--out", str(tmp_path / "x.csv")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["ipr", "--config", str(bad)]) == cli.EXIT_CONFIG
    bad.write_text(json.dumps({"ordr": 3}))
    assert cli.main(["ipr", "--config", str(bad)]) == cli.EXIT_CONFIG
    code = cli.main(["evolve", "--t-max", "200", "--dt", "0.1", "--out", str(tmp_path / "o.csv")])
    assert code == cli.EXIT_OVERFLOW
    code = cli.main(["verify", "--t-max", "0.2", "--tol", "1e-30", "--out", str(tmp_path / "v.json")])
    assert code == cli.EXIT_ORACLE
    assert "error" in capsys.readouterr().err


def test_verify_default_passes(tmp_path):
    assert cli.main(["verify", "--out", str(tmp_path / "v.json")]) == 0
    rep = json.loads((tmp_path / "v.json").read_text())
    assert rep["passed"] and rep["max_rel_error"] < 1e-5 and rep["cutoff"] == 10


def test_build_outputs(tmp_path):
    assert cli.main(["build", "--order", "3", "--delta", "0.2", "--out", str(tmp_path / "m")]) == 0
    m = matrix_from_json(json.loads((tmp_path / "m.json").read_text()))
    assert m.n == 4
    assert len(read_csv(tmp_path / "m.csv")) == 16


def test_phase_small_grid(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"order": 4, "kappa1": [0.5, 3.0], "kappa2": [0.5, 3.0]}))
    assert cli.main(["phase", "--config", str(cfg), "--out", str(tmp_path / "p.csv")]) == 0
    phases = [r["phase"] for r in read_csv(tmp_path / "p.csv")]
    assert phases == ["boundary", "I", "II", "boundary"]


@pytest.mark.parametrize("name", sorted(p.stem for p in CONFIGS.glob("*.json")))
def test_shipped_configs_are_valid(name):
    data = json.loads((CONFIGS / f"{name}.json").read_text())
    assert data["command"] in cli.COMMANDS
    cfg = cli.load_config(data["command"], CONFIGS / f"{name}.json", {})
    assert cfg["out"].startswith("out/")


def test_console_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "momentchain.cli", "build", "--order", "1", "--out", str(tmp_path / "b.json")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "b.json").exists()
