import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from lwqed.cli import main as cli_main
from lwqed.cli.config import EXPERIMENTS, apply_overrides, load_config, validate_config
from lwqed.cli.io import ResultTable, read_table, write_table
from lwqed.errors import ConfigurationError

CONFIGS = Path(__file__).resolve().parents[1] / "docs" / "configs"
SAMPLES = sorted(CONFIGS.glob("*.yaml"))


def _write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _run(argv):
    return cli_main.main([str(a) for a in argv])


MAXWELL = """\
experiment: maxwell-eom
modes:
  - {omega: 1.0, lam: 0.3}
scan:
  n_electrons: 2
"""


def test_every_experiment_has_a_sample():
    assert {yaml.safe_load(p.read_text())["experiment"] for p in SAMPLES} == set(EXPERIMENTS)


@pytest.mark.parametrize("path", SAMPLES, ids=lambda p: p.stem)
def test_samples_validate(path):
    assert validate_config(path) == []


def test_bad_omega_names_mode_index(tmp_path):
    p = _write(tmp_path, "experiment: maxwell-eom\nmodes:\n  - {omega: 1.0, lam: 0.1}\n  - {omega: -2.0, lam: 0.1}\n")
    diags = validate_config(p)
    assert any("mode 1" in d.message and "omega" in d.message for d in diags)
    assert any(d.line == 4 for d in diags)


def test_unknown_experiment_lists_choices(tmp_path):
    diags = validate_config(_write(tmp_path, "experiment: nope\n"))
    text = "\n".join(str(d) for d in diags)
    for name in EXPERIMENTS:
        assert name in text


def test_unknown_keys_rejected_with_line(tmp_path):
    p = _write(tmp_path, MAXWELL + "scan_typo: 1\n")
    diags = validate_config(p)
    assert len(diags) == 1
    assert diags[0].line == 6
    assert "scan_typo" in str(diags[0])
    p = _write(tmp_path, MAXWELL.replace("n_electrons", "n_electron"))
    assert any("n_electron" in str(d) for d in validate_config(p))


def test_unused_section_rejected(tmp_path):
    p = _write(tmp_path, MAXWELL + "grid: {x_min: -1, x_max: 1, n_points: 11}\n")
    assert validate_config(p)


def test_load_config_raises_with_all_diagnostics(tmp_path):
    p = _write(tmp_path, "experiment: maxwell-eom\nmodes:\n  - {omega: 0.0, lam: 0.1}\nbogus: 1\n")
    with pytest.raises(ConfigurationError) as info:
        load_config(p)
    assert "omega" in str(info.value) and "bogus" in str(info.value)


def test_overrides():
    data = {"experiment": "stark", "scan": {"fields": [0.1]}, "modes": [{"omega": 1.0, "lam": 0.1}]}
    out = apply_overrides(data, ["scan.fields=[0.01, 0.02]", "modes.0.lam=0.25", "seed=3"])
    assert out["scan"]["fields"] == [0.01, 0.02]
    assert out["modes"][0]["lam"] == 0.25
    assert out["seed"] == 3
    assert data["modes"][0]["lam"] == 0.1
    with pytest.raises(ConfigurationError):
        apply_overrides(data, ["no-equals-sign"])


def test_scan_defaults_merged(tmp_path):
    cfg = load_config(_write(tmp_path, MAXWELL))
    assert cfg.scan["n_electrons"] == 2
    assert cfg.scan["tol"] == 1e-12


def test_list_experiments(capsys):
    assert _run(["list-experiments"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == list(EXPERIMENTS)


def test_validate_exit_codes(tmp_path, capsys):
    assert _run(["validate", _write(tmp_path, MAXWELL)]) == 0
    assert _run(["validate", _write(tmp_path, "experiment: nope\n", "bad.yaml")]) == 2
    assert "line 1" in capsys.readouterr().out


def test_run_config_error_exit(tmp_path):
    assert _run(["run", _write(tmp_path, MAXWELL), "modes.0.omega=-1", "--output", tmp_path / "o.csv"]) == 2
    assert not (tmp_path / "o.csv").exists()
    assert _run(["run", tmp_path / "missing.yaml"]) == 2


def test_run_non_convergence_exit(tmp_path, capsys):
    cfg = CONFIGS / "stark.yaml"
    code = _run(["run", cfg, "scan.max_iter=1", "scan.mixing=0.1", "--output", tmp_path / "s.csv"])
    assert code == 3
    assert "non-convergence" in capsys.readouterr().err


def test_strict_fail_exit(tmp_path):
    # a zero tolerance turns rounding-level residuals into a FAIL verdict
    p = _write(tmp_path, MAXWELL)
    assert _run(["run", p, "--output", tmp_path / "m.csv"]) == 0
    t = read_table(tmp_path / "m.csv")
    assert t.verdict is True
    assert _run(["run", p, "scan.tol=0", "--strict", "--output", tmp_path / "m2.csv"]) == 4
    assert read_table(tmp_path / "m2.csv").verdict is False


def _strip_volatile(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("# timestamp:"))


@pytest.mark.parametrize("name", ["maxwell-eom", "unboundedness-scan", "model-zoo", "field-energy-demo"])
def test_rerun_is_byte_identical(tmp_path, name):
    cfg = CONFIGS / f"{name}.yaml"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run(["run", cfg, "--output", a]) == 0
    assert _run(["run", cfg, "--output", b]) == 0
    ta, tb = a.read_text(), b.read_text()
    assert "# timestamp:" in ta
    assert _strip_volatile(ta) == _strip_volatile(tb)


def test_table_round_trip(tmp_path):
    t = ResultTable(["x", "name", "flag", "n"])
    t.add(0.1, "a,b", True, 3)
    t.add(1e-300, "c", False, -1)
    t.add(float("nan"), "d", True, 0)
    t.metadata = {"seed": 1, "nested": {"k": [1, 2]}}
    t.verdict = True
    t.footer = {"alpha": 1 / 3}
    write_table(t, tmp_path / "t.csv")
    r = read_table(tmp_path / "t.csv")
    assert r.columns == t.columns
    assert r.rows[:2] == t.rows[:2]
    assert math.isnan(r.rows[2][0])
    assert r.metadata == t.metadata
    assert r.verdict is True
    assert r.footer["alpha"] == 1 / 3
    with pytest.raises(ValueError):
        t.add(1.0)


def test_metadata_records_config(tmp_path):
    _run(["run", CONFIGS / "maxwell-eom.yaml", "--output", tmp_path / "m.csv"])
    meta = read_table(tmp_path / "m.csv").metadata
    assert meta["experiment"] == "maxwell-eom"
    assert meta["seed"] == 0
    assert meta["config"]["modes"][1]["omega"] == 2.0
    assert {"lwqed", "numpy", "scipy"} <= set(meta["versions"])


def test_zero_coupling_scan_is_flat(tmp_path):
    out = tmp_path / "u.csv"
    assert _run(["run", CONFIGS / "unboundedness-scan.yaml", "modes.0.lam=0.0", "scan.kappa=[1.0, 0.0, 0.0]",
                 "--output", out]) == 0
    t = read_table(out)
    total, a = np.array(t.column("total")), np.array(t.column("a"))
    # |kappa| = 1 keeps the bump on the well until a = 10
    assert np.ptp(total[a >= 10.0]) < 1e-12


def test_depolarization_rows(tmp_path):
    out = tmp_path / "d.csv"
    assert _run(["run", CONFIGS / "depolarization.yaml", "scan.ed=false", "--output", out]) == 0
    t = read_table(out)
    for row in t.rows:
        r = dict(zip(t.columns, row))
        assert r["omega_tilde"] ** 2 - r["omega"] ** 2 == pytest.approx(r["omega_p"] ** 2, rel=1e-12)
        assert r["omega_p"] ** 2 == pytest.approx(r["n_electrons"] * r["lam"] ** 2, rel=1e-12)


def test_harmonic_stark_polarizability(tmp_path):
    out = tmp_path / "s.csv"
    assert _run(["run", CONFIGS / "stark.yaml", "--output", out]) == 0
    t = read_table(out)
    assert t.verdict is True
    assert t.footer["alpha"] == pytest.approx(1.0, rel=0.01)


def test_jobs_from_env_and_flag(tmp_path, monkeypatch):
    cfg = CONFIGS / "stark.yaml"
    monkeypatch.setenv("LWQED_JOBS", "3")
    assert _run(["run", cfg, "--output", tmp_path / "env.csv"]) == 0
    assert _run(["run", cfg, "--jobs", "1", "--output", tmp_path / "one.csv"]) == 0
    a = read_table(tmp_path / "env.csv")
    b = read_table(tmp_path / "one.csv")
    assert a.rows == b.rows
    monkeypatch.setenv("LWQED_JOBS", "zero")
    assert _run(["run", cfg, "--output", tmp_path / "bad.csv"]) == 2
    assert _run(["run", cfg, "--jobs", "0", "--output", tmp_path / "bad.csv"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lwqed", "list-experiments"], capture_output=True, text=True,
                          cwd=tmp_path)
    assert proc.returncode == 0
    assert "translation-check" in proc.stdout
