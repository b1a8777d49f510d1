import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from sedpilot.cli import DEFAULT_SEED, EXPERIMENTS, SCHEMAS, main, parse_config, run_experiment
from sedpilot.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_parse_minimal():
    cfg = parse_config("experiment = debroglie\nbeta = 0.5\nmass = 1")
    assert cfg.experiment == "debroglie"
    assert cfg.parameters["beta"] == 0.5 and cfg.parameters["mass"] == 1.0
    assert cfg.seed == DEFAULT_SEED


def test_parse_header_comments_and_seed():
    cfg = parse_config("# c\n[experiment]\nexperiment = double_slit  # trailing\nn_particles = 5e4\n"
                       "seed = 0x10\ncovered = 1\n")
    assert cfg.parameters["n_particles"] == 50000
    assert cfg.parameters["covered"] == "1"
    assert cfg.seed == 16


def test_unknown_experiment():
    with pytest.raises(ConfigError, match="unknown experiment 'warp'"):
        parse_config("experiment = warp")


def test_duplicate_key_names_both_lines():
    with pytest.raises(ConfigError, match=r"line 3: duplicate key 'beta' \(first set on line 2\)"):
        parse_config("experiment = debroglie\nbeta = 0.5\nbeta = 0.6\n")


@pytest.mark.parametrize("text,pattern", [
    ("experiment = debroglie\nbeta = 0.5\nspeed = 3\n", r"line 3: unknown key 'speed'"),
    ("experiment = debroglie\nbeta 0.5\n", r"line 2: expected 'key = value'"),
    ("experiment = debroglie\n", r"missing required key 'beta'"),
    ("beta = 0.5\n", r"missing required key 'experiment'"),
    ("experiment = debroglie\nbeta = fast\n", r"line 2: bad value for 'beta'"),
    ("[experiment]\n[experiment]\nexperiment = kg_limit\n", r"line 2: second \[experiment\] header"),
    ("[other]\nexperiment = kg_limit\n", r"line 1: unexpected section"),
    ("experiment = kg_limit\nseed = -3\n", r"line 2: seed must be"),
    ("experiment = tise\npotential = coulomb\n", r"line 2: bad value for 'potential'"),
])
def test_parse_errors(text, pattern):
    with pytest.raises(ConfigError, match=pattern):
        parse_config(text)


def _run(tmp_path, text, name="run"):
    out = tmp_path / name
    code = run_experiment(parse_config(text), out)
    return code, out


def _read_summary(out):
    return json.loads((out / "summary.json").read_text(encoding="utf-8"))


def test_debroglie_experiment(tmp_path):
    code, out = _run(tmp_path, (CONFIGS / "debroglie.cfg").read_text())
    assert code == 0
    s = _read_summary(out)
    assert s["value_rel_error"] < 0.01
    assert s["value_lambda_b_analytic"] == pytest.approx(10.8828, abs=1e-4)
    assert abs(s["value_lambda_b_measured"] / s["value_lambda_b_analytic"] - 1) < 0.01
    assert s["checks_passed"] is True and s["param_beta"] == 0.5 and s["seed"] == DEFAULT_SEED
    assert "version" in s and "wall_clock_seconds" in s


def test_tise_well_experiment(tmp_path):
    code, out = _run(tmp_path, (CONFIGS / "tise_well.cfg").read_text())
    assert code == 0
    with open(out / "result.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    e1 = float(rows[0]["energy"])
    assert abs(e1 - 4.9348) / 4.9348 < 1e-3
    assert rows[0]["energy"] == format(e1, ".17g")


@pytest.mark.parametrize("cfg", ["dispersion.cfg", "tise_harmonic.cfg", "kg_limit.cfg"])
def test_other_reference_configs_pass(tmp_path, cfg):
    code, out = _run(tmp_path, (CONFIGS / cfg).read_text())
    assert code == 0
    assert _read_summary(out)["checks_passed"] is True


def test_csv_format(tmp_path):
    code, out = _run(tmp_path, (CONFIGS / "dispersion.cfg").read_text())
    raw = (out / "result.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header = raw.split(b"\n", 1)[0].decode()
    assert header.startswith("beta,gamma,omega_plus")
    assert b"nan" in raw  # beta = 0 has no modulation: NaN, never inf
    assert b"inf" not in raw


def test_double_slit_small_run(tmp_path):
    code, out = _run(tmp_path, "experiment = double_slit\nn_particles = 12000\nseed = 3\n")
    assert code == 0
    s = _read_summary(out)
    assert s["value_visibility"] >= 0.6 and s["check_visibility_at_least_0.6"]
    with open(out / "result.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 200 and sum(int(r["count"]) for r in rows) == 12000


def test_statistics_error_exit_code_and_no_partial_result(tmp_path):
    out = tmp_path / "stats"
    out.mkdir()
    (out / "result.csv").write_text("stale\n")
    code = run_experiment(parse_config("experiment = double_slit\nn_particles = 100\n"), out)
    assert code == 4
    assert not (out / "result.csv").exists()
    assert not list(out.glob("*.tmp"))


def test_numerical_error_exit_code(tmp_path):
    code, out = _run(tmp_path, "experiment = tise\npotential = harmonic\nn_points = 11\nn_states = 5\n")
    assert code == 3
    assert not (out / "result.csv").exists()


def test_failed_check_exit_code(tmp_path):
    # coarse well grid misses the 1e-3 eigenvalue check
    code, out = _run(tmp_path, "experiment = tise\npotential = infinite_well\nn_points = 25\nn_states = 5\n")
    assert code == 1
    assert _read_summary(out)["checks_passed"] is False


def test_provenance_covers_parameters(tmp_path):
    base = (CONFIGS / "debroglie.cfg").read_text()
    _, a = _run(tmp_path, base, "a")
    _, b = _run(tmp_path, base.replace("mass = 1", "mass = 1.5"), "b")
    _, c = _run(tmp_path, base + "beat_periods = 24\n", "c")
    sa, sb, sc = _read_summary(a), _read_summary(b), _read_summary(c)
    assert sa["param_mass"] != sb["param_mass"]
    assert sa["param_beat_periods"] != sc["param_beat_periods"]
    for name, schema in SCHEMAS.items():
        assert name in EXPERIMENTS


@pytest.mark.parametrize("cfg", ["debroglie.cfg", "tise_well.cfg", "kg_limit.cfg"])
def test_determinism(tmp_path, cfg):
    text = (CONFIGS / cfg).read_text()
    _, a = _run(tmp_path, text, "a")
    _, b = _run(tmp_path, text, "b")
    assert (a / "result.csv").read_bytes() == (b / "result.csv").read_bytes()


def test_main_run_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "x.cfg"
    cfg.write_text("experiment = kg_limit\nmasses = 1, 10\nn_points = 801\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--seed", "77"]) == 0
    assert _read_summary(tmp_path / "o")["seed"] == 77


def test_main_config_errors(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("experiment = warp\n")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "unknown experiment" in err and err.count("\n") >= 1


def test_list_subcommand():
    out = subprocess.run([sys.executable, "-m", "sedpilot", "list"], capture_output=True, text=True, check=True)
    for name in SCHEMAS:
        assert name + ":" in out.stdout
    assert "required [beta]" in out.stdout
