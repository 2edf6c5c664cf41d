import json
import subprocess
import sys

import pytest

from cstar_ergodic.cli import main
from cstar_ergodic.scenario import parse_complex, shipped_scenarios, validate, ScenarioError


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def load_report(out, name):
    return json.loads((out / f"{name}.report.json").read_text())


@pytest.mark.parametrize("text, value", [
    ("0.5-2i", 0.5 - 2j), ("i", 1j), ("1/8", 0.125), ("pi/2", 1.5707963267948966), ("3 + 4 i", 3 + 4j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == pytest.approx(value)


def test_parse_complex_rejects_code():
    with pytest.raises(ScenarioError):
        parse_complex("__import__('os')")


def test_run_ergodic_damped_swap(tmp_path):
    assert main(["run", "damped_swap_ergodic", "--out", str(tmp_path)]) == 0
    report = load_report(tmp_path, "damped_swap_ergodic")
    assert report["schema_version"] == "1.0"
    assert report["results"][0]["is_ergodic"] is True
    assert (tmp_path / "damped_swap_ergodic.01-cesaro.csv").read_text().startswith("n,residual\n")


def test_run_resonant_spin_half(tmp_path):
    assert main(["run", "spin_half_resonant", "--out", str(tmp_path)]) == 0
    assert load_report(tmp_path, "spin_half_resonant")["results"][0]["is_ergodic"] is False


def test_malformed_dynamics_exit_2(tmp_path):
    p = write(tmp_path, "bad.yaml", "algebra: {blocks: [2]}\ndynamics: {kind: warp}\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2


def test_unknown_analysis_exit_2(tmp_path):
    p = write(tmp_path, "bad.yaml", "system: {named: spin_half}\nanalyses: [{type: magic}]\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2


def test_unparseable_file_exit_2(tmp_path):
    p = write(tmp_path, "bad.yaml", "system: [unclosed\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2


def test_not_contractive_exit_3(tmp_path):
    p = write(tmp_path, "c.yaml", "system: {named: damped_swap, params: {c1: 1.5, c2: 0}}\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 3


def test_validate_diagnostics(tmp_path):
    good = shipped_scenarios()["eight_cycle"]
    assert validate(good) == []
    neg = write(tmp_path, "neg.yaml", "algebra: {blocks: [1, 1]}\nstate: {kind: weights, mu: [1.5, -0.5]}\n"
                                      "dynamics: {kind: identity}\n")
    assert any("state not positive" in d for d in validate(neg))
    c15 = write(tmp_path, "c.yaml", "system: {named: damped_swap, params: {c1: 1.5, c2: 0}}\n")
    assert any("not contractive" in d for d in validate(c15))


def test_element_outside_algebra_is_invalid(tmp_path):
    p = write(tmp_path, "e.yaml", "algebra: {blocks: [1, 1]}\ndynamics: {kind: identity}\n"
                                  "analyses: [{type: cesaro, A: [[1, 1], [0, 1]]}]\n")
    assert validate(p)
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2


def test_reports_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "eight_cycle", "damped_swap_ergodic", "--out", str(out), "--no-timestamp"]) == 0
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_timestamp_is_only_difference(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", "spin_half_ergodic", "--out", str(a)])
    main(["run", "spin_half_ergodic", "--out", str(b)])
    ra, rb = load_report(a, "spin_half_ergodic"), load_report(b, "spin_half_ergodic")
    ra["provenance"].pop("timestamp")
    rb["provenance"].pop("timestamp")
    assert ra == rb


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CSTAR_ERGODIC_OUT", str(tmp_path / "env"))
    assert main(["run", "spin_half_resonant"]) == 0
    assert (tmp_path / "env" / "spin_half_resonant.report.json").exists()


def test_parallel_jobs_match_serial(tmp_path):
    names = ["eight_cycle", "pauli_x_flip", "spin_half_trace"]
    main(["run", *names, "--out", str(tmp_path / "s"), "--no-timestamp"])
    main(["run", *names, "--out", str(tmp_path / "p"), "--no-timestamp", "--jobs", "3"])
    for f in sorted((tmp_path / "s").iterdir()):
        assert f.read_bytes() == (tmp_path / "p" / f.name).read_bytes()


def test_list_examples(capsys):
    assert main(["list-examples"]) == 0
    out = capsys.readouterr().out
    for name in ("damped_swap_ergodic", "spin_half_resonant", "eight_cycle", "pauli_x_flip"):
        assert name in out


def test_console_script_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cstar_ergodic.cli", "validate", "pauli_x_flip"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "ok" in proc.stdout


@pytest.mark.parametrize("name", sorted(shipped_scenarios()))
def test_every_shipped_scenario_runs(name, tmp_path):
    assert main(["run", name, "--out", str(tmp_path)]) == 0


def test_shipped_scenario_values(tmp_path):
    main(["run", "eight_cycle", "pauli_x_flip", "spin_half_trace", "--out", str(tmp_path)])
    eight = load_report(tmp_path, "eight_cycle")["results"]
    assert eight[1]["max_gap"] == 8 and eight[2]["n"] == 8
    assert load_report(tmp_path, "pauli_x_flip")["results"][1]["n"] == 2
    cert = load_report(tmp_path, "spin_half_trace")["results"][1]["certificate"]
    assert cert["p"] == pytest.approx(0.5)


def test_legacy_damped_swap_alias(tmp_path):
    p = write(tmp_path, "alias.yaml", "system: {named: example_2_5_7, params: {c1: 0.5, c2: 0.5}}\n"
                                      "analyses: [ergodicity]\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 0
    assert load_report(tmp_path, "alias")["results"][0]["is_ergodic"] is True
