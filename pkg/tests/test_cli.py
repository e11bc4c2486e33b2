import json

import numpy as np
import pytest

from loewner_lab.cli import main
from loewner_lab.config import from_dict, load_config
from loewner_lab.errors import ConfigInvalid


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_trace_command_matches_slit(tmp_path):
    cfg = write(tmp_path, "t.toml", 'command = "trace"\n[params]\ndriving = "zero"\n')
    assert main(["trace", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = np.loadtxt(tmp_path / "o/curve.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(rows[:, 1] + 1j * rows[:, 2] - 2j * np.sqrt(rows[:, 0]))) < 5e-3
    man = json.loads((tmp_path / "o/manifest.json").read_text())
    assert set(man["outputs"]) == {"curve.csv", "curve.svg"}
    assert str(cfg) in man["input_hashes"]
    assert (tmp_path / "o/curve.svg").read_text().startswith("<svg")


def test_exponents_command(tmp_path, capsys):
    cfg = write(tmp_path, "e.toml", "")
    assert main(["exponents", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "beta* = 0.4978" in capsys.readouterr().out


def test_deterministic_outputs(tmp_path):
    cfg = write(tmp_path, "s.toml", "seed = 4\n[params]\nN = 2\nT = 0.2\ndt = 0.01\n")
    for d in ("a", "b"):
        assert main(["sle-sample", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    for f in ("driving_0000.csv", "curve_0001.csv", "curves.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert main(["sle-sample", "--config", str(cfg), "--seed", "5",
                 "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c/driving_0000.csv").read_bytes() != \
        (tmp_path / "a/driving_0000.csv").read_bytes()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path, "b.toml", "[params]\nkappa = 9.0\n")
    assert main(["moment-scan", "--config", str(bad)]) == 2
    assert "params.kappa" in capsys.readouterr().err
    assert main(["moment-scan", "--config", str(tmp_path / "missing.toml")]) == 2
    wrong = write(tmp_path, "w.toml", 'command = "trace"\n')
    assert main(["exponents", "--config", str(wrong)]) == 2
    assert main(["nope", "--config", str(wrong)]) == 2


def test_numeric_failure_exit_3(tmp_path):
    cfg = write(tmp_path, "x.toml", "[params]\ncurve_file = \"c.csv\"\n")
    (tmp_path / "c.csv").write_text("# geometry=chordal d_cut=0.001 dt=0.1\n0,0,0.5\n0.1,0,0.6\n")
    assert main(["extract", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


@pytest.mark.parametrize("field,value", [
    ("lambda", 3.0), ("t_list", [0.5, 1, 2]), ("N", 1), ("dt", -1.0), ("unknown", 1)])
def test_field_named_on_rejection(field, value):
    with pytest.raises(ConfigInvalid) as info:
        from_dict({"params": {field: value}}, "moment-scan")
    assert info.value.field == f"params.{field}"


def test_tail_scan_beta_range():
    with pytest.raises(ConfigInvalid) as info:
        from_dict({"params": {"beta": 0.3}}, "tail-scan")
    assert info.value.field == "params.beta"


def test_output_dir_override(tmp_path):
    cfg = write(tmp_path, "o.toml", 'output_dir = "here"\n')
    c = load_config(cfg, "exponents")
    assert c.output_dir == tmp_path / "here"
    c = load_config(cfg, "exponents", env={"LOEWNER_LAB_OUT": "/tmp/elsewhere"})
    assert str(c.output_dir) == "/tmp/elsewhere"


def test_small_pipelines(tmp_path):
    runs = {
        "perturb-scan": "[params]\nT = 0.3\ndt = 0.005\neps_list = [0.01, 0.005, 0.002]\n",
        "eta-tip": "[params]\nT = 0.3\ndt = 0.005\n",
        "lerw": "[params]\nn = 12\nN = 2\n",
        "moment-scan": "[params]\nN = 50\nt_list = [1, 2, 4]\n",
        "tail-scan": "[params]\nN = 3\nd_star_list = [0.25, 0.125]\n",
        "grid-map": "[params]\nn_list = [8, 12, 16]\nsamples = 50\nband = 10\n",
        "compare": "[params]\nT = 0.3\ndt = 0.005\n",
    }
    for cmd, text in runs.items():
        cfg = write(tmp_path, f"{cmd}.toml", text)
        assert main([cmd, "--config", str(cfg), "--out", str(tmp_path / cmd)]) == 0, cmd
        assert (tmp_path / cmd / "manifest.json").exists()
