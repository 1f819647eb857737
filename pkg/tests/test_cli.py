import json
import shutil

import pytest

from gstep.cli import main
from gstep.milp.mps import read_mps
from gstep.study import IncompatibleStudies, StudyConfig, compare_studies, read_manifest
from gstep.report import read_csv, TABLES

from conftest import FIXTURES


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    system = FIXTURES / "toy2" / "system.yaml"
    out = {}
    for mode in ("SO", "MO"):
        d = base / mode
        assert main(["run", "--system", str(system), "--out", str(d), "--mode", mode]) == 0
        out[mode] = d
    return out


def test_run_writes_artifacts(runs):
    d = runs["MO"]
    for name in TABLES:
        assert (d / f"{name}.csv").is_file()
    for f in ("solution.sol", "scenarios.json", "manifest.json"):
        assert (d / f).is_file()
    man = read_manifest(d)
    assert man["format"] == "gstep-study/1" and man["label"] == "MO"
    assert man["solver"]["status"] in ("optimal", "gap-feasible")
    assert all(v <= man["replay"]["tolerance"] for v in man["replay"]["residuals"].values())
    assert all((d / p).is_file() for p in man["plots"])


def test_rerun_from_manifest_is_identical(runs, tmp_path):
    src = runs["SO"]
    assert main(["run", "--config", str(src / "manifest.json"), "--out", str(tmp_path / "again")]) == 0
    for name in TABLES:
        assert (tmp_path / "again" / f"{name}.csv").read_bytes() == (src / f"{name}.csv").read_bytes()


def test_compare_identical_runs_has_zero_deltas(runs, tmp_path):
    twin = tmp_path / "twin"
    shutil.copytree(runs["MO"], twin)
    rows = compare_studies([runs["MO"], twin])
    assert rows and all(r["delta"] == 0.0 for r in rows)


def test_compare_so_mo_direction(runs, tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", str(runs["SO"]), str(runs["MO"]), "--out", str(out)]) == 0
    rows = {(r["label"], r["metric"]): float(r["delta"]) for r in read_csv(out)}
    assert rows[("MO", "hard_cost")] >= -1e-6 * abs(rows[("SO", "hard_cost")] or 1.0)
    assert rows[("MO", "social_cost")] <= 0.0
    assert rows[("MO", "co2_mmt")] <= 1e-9


def test_compare_rejects_different_systems(runs, tmp_path):
    other = tmp_path / "other"
    shutil.copytree(runs["SO"], other)
    man = json.loads((other / "manifest.json").read_text())
    man["system"]["content_hash"] = "0" * 64
    (other / "manifest.json").write_text(json.dumps(man))
    with pytest.raises(IncompatibleStudies):
        compare_studies([runs["SO"], other])
    assert main(["compare", str(runs["SO"]), str(other)]) == 3


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_unknown_mode_is_usage_error(tmp_path, capsys):
    code = main(["run", "--system", str(FIXTURES / "toy1" / "system.yaml"), "--out", str(tmp_path),
                 "--mode", "XO"])
    assert code == 2
    assert _error(capsys)["exit_code"] == 2


def test_missing_system_writes_error_record(tmp_path, capsys):
    code = main(["run", "--system", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")])
    assert code == 2
    rec = json.loads((tmp_path / "o" / "error.json").read_text())
    assert rec["exit_code"] == 2 and "nope.yaml" in rec["message"]


def test_opoi_without_section(tmp_path, capsys):
    assert main(["run", "--system", str(FIXTURES / "toy1" / "system.yaml"), "--out", str(tmp_path),
                 "--mode", "MO-OPOI"]) == 2


def test_bad_input_data_exit_code(tmp_path, capsys):
    p = tmp_path / "s.yaml"
    p.write_text("name: x\nconfig: {epochs: one}\nzones: []\n")
    assert main(["run", "--system", str(p), "--out", str(tmp_path / "o")]) == 3


def test_export_mps(tmp_path):
    p = tmp_path / "toy3.mps"
    assert main(["export-mps", "--system", str(FIXTURES / "toy3" / "system.yaml"), "--out", str(p)]) == 0
    inst = read_mps(p)
    assert inst.n_binary == 16


def test_cluster_command(tmp_path):
    out = tmp_path / "scen.json"
    assert main(["cluster", "--system", str(FIXTURES / "pjm" / "system.yaml"), "--out", str(out),
                 "--k", "3", "--extremes"]) == 0
    data = json.loads(out.read_text())
    assert data


@pytest.mark.parametrize("data,msg", [
    ({"out": "o"}, "system"),
    ({"system": "s", "out": "o", "colour": 1}, "colour"),
    ({"system": "s", "out": "o", "mip_gap": "tight"}, "mip_gap"),
])
def test_config_errors(data, msg):
    from gstep.study import ConfigError
    with pytest.raises(ConfigError, match=msg):
        StudyConfig.from_dict(data)


def test_label():
    assert StudyConfig("s", "o", mode="MO", x5=True, scc=51.0).label == "MO-X5-EM51"
