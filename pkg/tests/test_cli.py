import csv
import io
import json

import pytest

from friendlab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_basic_default_is_balanced(capsys):
    code, out, _ = run(capsys, "basic", "--format", "json")
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["born_S"]["+1"] == pytest.approx(0.5)
    assert rep["frame_relational"]["interference_witness"] == pytest.approx(1.0)
    assert rep["frame_relational"]["record_expectation"] == pytest.approx(1.0)


def test_basic_unequal_amps_reports_degenerate(capsys):
    code, out, _ = run(capsys, "basic", "--amps", "0.6,0.8", "--format", "json")
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["born_S"]["+1"] == pytest.approx(0.36)
    assert "degenerate" in rep["frame_relational"]


def test_basic_rejects_unnormalized_amps(capsys):
    code, _, err = run(capsys, "basic", "--amps", "0.9,0.9")
    assert code == cli.EXIT_INPUT
    assert "not normalized" in err


def test_lf_small_run_passes_and_round_trips(capsys, tmp_path):
    out_path = tmp_path / "lf.json"
    code, _, _ = run(capsys, "lf", "--trials", "20000", "--seed", "1",
                     "--format", "json", "--out", str(out_path))
    assert code == cli.EXIT_PASS
    rep = json.loads(out_path.read_text())
    assert rep["pass"] is True
    assert abs(rep["chsh"]["estimate"] - rep["chsh"]["analytic"]) < 0.05


def test_lf_rejects_tiny_trials(capsys):
    code, _, err = run(capsys, "lf", "--trials", "50")
    assert code == cli.EXIT_INPUT
    assert "at least 100" in err


def test_lf_csv_output(capsys):
    code, out, _ = run(capsys, "lf", "--trials", "20000", "--seed", "0", "--format", "csv")
    assert code == cli.EXIT_PASS
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["pair", "x", "y", "frequency", "born"]
    assert len(rows) == 1 + 4 * 4


def test_lf_angles_flag_overrides_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"angles": [0, 90, 45, 135], "trials": 20000, "seed": 7}))
    code, out, _ = run(capsys, "lf", "--config", str(cfg), "--format", "json",
                       "--angles", "0,0,0,0")
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["angles"] == {"ask_A": 0.0, "super_A": 0.0, "ask_C": 0.0, "super_C": 0.0}
    assert rep["trials"] == 20000 and rep["seed"] == 7


def test_lf_malformed_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[not an object]")
    code, _, err = run(capsys, "lf", "--config", str(cfg))
    assert code == cli.EXIT_INPUT
    assert "config file" in err


def test_feasibility_from_angles_infeasible(capsys):
    code, out, _ = run(capsys, "feasibility", "--from-angles", "--format", "json")
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["joint_4"]["feasible"] is False
    assert rep["joint_6"]["feasible"] is False
    assert rep["fine_criterion"] is False
    assert rep["methods_agree"] is True


def test_feasibility_targets_file_feasible(capsys, tmp_path):
    targets = tmp_path / "targets.json"
    targets.write_text(json.dumps(
        {pair: [["1/4", "1/4"], ["1/4", "1/4"]] for pair in ("AC", "AD", "BC", "BD")}))
    code, out, _ = run(capsys, "feasibility", "--targets", str(targets), "--format", "json")
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["joint_4"]["feasible"] is True
    assert rep["chsh_value"] == "0"


def test_feasibility_malformed_targets(capsys, tmp_path):
    targets = tmp_path / "targets.json"
    targets.write_text(json.dumps({"AC": [[1, 0], [0, 0]]}))
    code, _, err = run(capsys, "feasibility", "--targets", str(targets))
    assert code == cli.EXIT_INPUT
    assert err.startswith("error:")


def test_feasibility_requires_a_source(capsys):
    code, _, err = run(capsys, "feasibility")
    assert code == cli.EXIT_INPUT
    assert "--targets" in err


def test_relmodel_passes_audits(capsys):
    code, out, _ = run(capsys, "relmodel", "--trials", "20000", "--seed", "0",
                       "--format", "json")
    assert code == cli.EXIT_PASS
    rep = json.loads(out)
    assert rep["pass"] is True
    assert rep["analytic_feasibility"]["feasible"] is False
    assert len(rep["records"]) == 1000


def test_relmodel_planted_violation_fails(capsys):
    code, out, _ = run(capsys, "relmodel", "--trials", "20000", "--seed", "0",
                       "--planted-violation", "--format", "json")
    assert code == cli.EXIT_FAIL
    rep = json.loads(out)
    assert rep["pass"] is False
    flagged = [c for c in rep["checks"] if c["name"] == "choice-independence flags"]
    assert flagged and not flagged[0]["pass"]


def test_relmodel_csv_records(capsys):
    code, out, _ = run(capsys, "relmodel", "--trials", "20000", "--seed", "2",
                       "--format", "csv")
    assert code == cli.EXIT_PASS
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:2] == ["a_internal", "c_internal"]
    # the report carries at most the first 1000 records
    assert len(rows) == 1 + 1000


def test_rovelli_consistency(capsys):
    for trigger in ("1", "-1"):
        code, out, _ = run(capsys, "rovelli", "--trials", "500", "--seed", "0",
                           "--trigger", trigger, "--format", "json")
        assert code == cli.EXIT_PASS
        rep = json.loads(out)
        assert rep["consistency_rate"] == 1.0
        assert rep["second_iff_trigger"] is True
        for sr in rep["states"]:
            assert sr["record_probabilities"][sr["record"]] == pytest.approx(1.0)


def test_json_output_is_byte_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        code, _, _ = run(capsys, "lf", "--trials", "20000", "--seed", "11",
                         "--format", "json", "--out", str(p))
        assert code == cli.EXIT_PASS
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_unknown_format_rejected(capsys):
    with pytest.raises(SystemExit):
        cli.main(["lf", "--format", "yaml"])
