import json
from fractions import Fraction

import pytest

from frogcert.cli import dispatch, main
from frogcert.report import ReportError, RunReport, canonical, dumps, emit_report


def run(args, capsys):
    code, report = dispatch(args)
    out = capsys.readouterr().out
    return code, report, out


def test_unknown_subcommand(capsys):
    code, report = dispatch(["frobnicate"])
    assert code != 0 and report is None
    assert "usage" in capsys.readouterr().err


def test_invalid_value_names_field(capsys):
    code, _ = dispatch(["simulate", "--episodes", "0"])
    assert code == 2
    assert "episodes" in capsys.readouterr().err


def test_bad_step_menu(capsys):
    code, _ = dispatch(["certify", "--step-menu", "1/16,abc"])
    assert code == 2 and "step_menu" in capsys.readouterr().err


def test_short_certify_fails_target(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, report, _ = run(["certify", "--max-passes", "3", "--out", str(out)], capsys)
    assert code == 1 and not report.verdict
    doc = json.loads(out.read_text())
    assert doc["results"]["passes"] == 3
    assert doc["results"]["final_rate"] == "3/16"
    assert doc["verdict"] == "fail"


def test_certify_then_verify(tmp_path, capsys):
    rep = tmp_path / "report.json"
    cert = tmp_path / "cert.json"
    code, report, _ = run(["certify", "--out", str(rep), "--certificate", str(cert)], capsys)
    assert code == 0
    assert report.results["passes"] == 340
    assert report.results["final_rate"] == Fraction(973, 64)
    for path in (rep, cert):
        code, report, _ = run(["verify", str(path)], capsys)
        assert code == 0 and report.results["steps_ok"]


def test_verify_detects_tampering(tmp_path, capsys):
    cert = tmp_path / "c.json"
    run(["certify", "--max-passes", "20", "--certificate", str(cert)], capsys)
    doc = json.loads(cert.read_text())
    doc["steps"][4]["u_after"] = "1/2"
    cert.write_text(json.dumps(doc))
    code, report, _ = run(["verify", str(cert)], capsys)
    assert code == 1 and report.results["first_failing_step"] == 4


def test_verify_malformed(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"grid_size": 257}')
    code, report, _ = run(["verify", str(p)], capsys)
    assert code == 1 and not report.verdict


def test_bounds_and_exit_status(capsys):
    code, report, out = run(["bounds", "--a", "15"], capsys)
    assert code == 0
    regions = report.results["rates"]["15/1"]["regions"]
    assert [r["verdict"] for r in regions] == [True] * 4
    assert json.loads(out)["verdict"] == "pass"


def test_oracle_single(capsys):
    code, report, _ = run(["oracle", "--model", "A", "--dist", "delta0"], capsys)
    assert code == 0
    cmp = report.results["comparisons"]["A/delta0"]
    assert cmp["max_width"] < 1e-12
    assert cmp["law"]["0"] == "13/24"


def test_eval_output(capsys):
    code, report, out = run(["eval", "--op", "L", "--a", "0", "--grid-size", "5"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["results"]["x"]) == 5
    assert doc["results"]["lo"][0] <= 1.0 <= doc["results"]["hi"][0]


def test_simulate_csv(tmp_path, capsys):
    csv_path = tmp_path / "e.csv"
    code, report, _ = run(
        ["simulate", "--variant", "selfsimilar", "--episodes", "5", "--step-cap", "5", "--csv", str(csv_path)], capsys
    )
    assert code == 0
    assert csv_path.read_text().splitlines()[0] == "episode_index,variant,root_hits,truncated"


def test_reports_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    dispatch(["simulate", "--mode", "coupled", "--depth-cap", "3", "--episodes", "200", "--out", str(a)])
    dispatch(["simulate", "--mode", "coupled", "--depth-cap", "3", "--episodes", "200", "--threads", "4", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"episodes": 7, "step_cap": 4, "variant": "original"}))
    _, report, _ = run(["simulate", "--config", str(cfg), "--episodes", "3"], capsys)
    assert report.config["episodes"] == 3
    assert report.config["step_cap"] == 4
    assert report.config["variant"] == "original"


def test_canonical_json_rules(tmp_path):
    r = RunReport("x", {"q": Fraction(1, 3)}, {"v": 0.1, "n": 2}, True, wall_time=1.5)
    text = dumps(r)
    doc = json.loads(text)
    assert doc["config"]["q"] == "1/3" and doc["results"]["v"] == 0.1
    assert "wall_time" not in doc
    assert "wall_time" in json.loads(dumps(r, timing=True))
    bad = RunReport("x", {}, {"v": float("nan")}, True)
    with pytest.raises(ReportError):
        emit_report(bad, tmp_path / "nan.json")
    assert not (tmp_path / "nan.json").exists()
    with pytest.raises(ReportError):
        canonical({"x": object()})


def test_emit_report_io_error(tmp_path):
    r = RunReport("x", {}, {}, True)
    with pytest.raises(OSError, match="cannot write"):
        emit_report(r, tmp_path / "missing" / "r.json")


def test_main_returns_code():
    assert main(["bounds", "--a", "20", "--out", "/dev/null"]) == 0
