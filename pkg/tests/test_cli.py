import json

import pytest
from conftest import bundled

from laxkit.core.config import settings
from laxkit.main import main


def write_config(tmp_path, name, **overrides):
    data = bundled(name)
    data.update(overrides)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def run(args, capsys):
    code = main(args + ["--log-level", "CRITICAL"])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_basis_command(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_classical", sample_budget=2)
    out = tmp_path / "out"
    code, stdout, _ = run(["basis", "--config", str(config), "--out", str(out), "--window", "-1:1"], capsys)
    assert code == 0
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["verdict"] == "PASS"
    assert report["window"] == [-1, 1]
    assert json.loads(stdout) == report
    assert (out / "basis.json").exists()
    assert sorted(report["artifacts"]) == ["basis.json", "kn_bases.json"]


def test_reports_are_deterministic(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_two_in", sample_budget=2)
    outputs = []
    for run_dir in ("a", "b"):
        out = tmp_path / run_dir
        code, stdout, _ = run(["structconst", "--config", str(config), "--out", str(out), "--window", "-1:1"],
                              capsys)
        assert code == 0
        outputs.append(((out / "report.json").read_bytes(), (out / "structconst.json").read_bytes(), stdout))
    assert outputs[0] == outputs[1]


def test_seed_changes_the_inputs_hash(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_classical", sample_budget=2)
    hashes = set()
    for seed in ("1", "2"):
        _, stdout, _ = run(["basis", "--config", str(config), "--out", str(tmp_path / seed), "--window", "-1:1",
                            "--seed", seed], capsys)
        hashes.add(json.loads(stdout)["inputs_hash"])
    assert len(hashes) == 2


@pytest.mark.parametrize("overrides, field", [
    ({"in_points": ["0", "1/0"]}, "in_points.1"),
    ({"sample_budget": 0.5}, "sample_budget"),
])
def test_configuration_errors(tmp_path, capsys, overrides, field):
    config = write_config(tmp_path, "sl2_classical", **overrides)
    code, stdout, stderr = run(["basis", "--config", str(config), "--out", str(tmp_path / "out")], capsys)
    assert code == 2
    assert stdout == ""
    error = json.loads(stderr.strip().splitlines()[-1])
    assert error["error"] == "ConfigError"
    assert error["detail"].startswith(field)
    assert not (tmp_path / "out").exists()


def test_bad_window_flag(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_classical")
    code, _, stderr = run(["basis", "--config", str(config), "--window", "2:1"], capsys)
    assert code == 2
    assert json.loads(stderr.strip().splitlines()[-1])["detail"].startswith("--window")


def test_negative_window_as_a_separate_argument(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_classical", sample_budget=2)
    out = tmp_path / "out"
    code, stdout, _ = run(["basis", "--window", "-2:0", "--config", str(config), "--out", str(out)], capsys)
    assert code == 0
    assert json.loads(stdout)["window"] == [-2, 0]


def test_jobs_from_the_environment_must_be_positive(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(settings, "JOBS", 0)
    config = write_config(tmp_path, "sl2_classical")
    code, stdout, stderr = run(["basis", "--config", str(config), "--out", str(tmp_path / "out")], capsys)
    assert code == 2
    assert stdout == ""
    assert json.loads(stderr.strip().splitlines()[-1])["detail"].startswith("LAXKIT_JOBS")


def test_non_generic_configuration_fails(tmp_path, capsys):
    config = write_config(tmp_path, "sp4_tyurin1", in_points=["0"], window="0:0")
    code, stdout, stderr = run(["basis", "--config", str(config), "--out", str(tmp_path / "out")], capsys)
    assert code == 1
    assert stdout == ""
    error = json.loads(stderr.strip().splitlines()[-1])
    assert error["error"] == "NonGenericError"
    assert error["context"]["failing"]


def test_classify_inconclusive_window(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_classical", sample_budget=2)
    out = tmp_path / "out"
    code, stdout, _ = run(["classify", "--config", str(config), "--out", str(out), "--window", "0:2"], capsys)
    report = json.loads(stdout)
    assert code == 0
    assert report["summary"]["local_space"]["verdict"] == "inconclusive within window"


def test_cocycle_command(tmp_path, capsys):
    config = write_config(tmp_path, "sl2_classical", sample_budget=2)
    out = tmp_path / "out"
    code, stdout, _ = run(["cocycle", "--config", str(config), "--out", str(out), "--window", "-2:2"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["summary"]["gamma1[C1]"] == "local within window"
    assert (out / "cocycle_gamma1_C1.json").exists()
    assert (out / "cocycle_gamma1_Cstar1.json").exists()
