import json

import pytest

from qhwz.cli import load_config, build_parser, main, parse_classes
from qhwz.suites import SuiteConfig

SMALL = ["--suite", "defects", "--case", "bulk", "--points", "2", "--pairs", "2", "--grid", "64"]


def test_parse_classes():
    assert parse_classes("0.2,-0.2; 0.1,-0.1;") == [[0.2, -0.2], [0.1, -0.1]]


def test_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(suite="nope")
    with pytest.raises(ValueError):
        SuiteConfig(grid=31)
    with pytest.raises(ValueError):
        SuiteConfig(group="so3")
    with pytest.raises(ValueError):
        SuiteConfig(case="missing")


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": 32, "seed": 4, "classes": "0.2,-0.2"}))
    got = load_config(build_parser().parse_args(["--config", str(cfg), "--seed", "9"]))
    assert (got.grid, got.seed, got.classes) == (32, 9, [[0.2, -0.2]])


def test_bad_configuration_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["--config", str(cfg)]) == 2
    assert main(["--grid", "7"]) == 2
    assert main(["--suite", "bogus"]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 2


def test_report_written_and_exit_zero(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(SMALL + ["--report", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["schema"] == "qham-report/1" and d["pass"] is True
    assert [c["name"] for c in d["cases"]] == ["bulk"]
    assert "PASS bulk" in capsys.readouterr().out


def test_failing_case_exits_1(capsys):
    # the axiom sub-check is not resolved at N = 16
    assert main(["--suite", "defects", "--case", "bulk", "--points", "1", "--pairs", "2", "--grid", "16"]) == 1
    assert "FAIL bulk" in capsys.readouterr().out


def test_same_seed_same_bytes(tmp_path, capsys):
    paths = [tmp_path / f"{k}.json" for k in range(2)]
    for p in paths:
        main(SMALL + ["--seed", "3", "--report", str(p)])
    assert paths[0].read_bytes() == paths[1].read_bytes()
