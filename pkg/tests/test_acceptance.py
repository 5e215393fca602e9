"""The acceptance gate: one test per criterion, each printing a pass/fail
line, plus the end-to-end byte-identity check on the `accept` command."""

import time

import pytest

from friendlab import acceptance, cli


def _report(result: dict, elapsed: float) -> None:
    status = "PASS" if result["pass"] else "FAIL"
    print(f"[{status}] criterion {result['criterion']} ({result['name']}) "
          f"in {elapsed:.1f}s")
    for c in result["checks"]:
        mark = "PASS" if c["pass"] else "FAIL"
        print(f"  [{mark}] {c['name']}: observed={c['observed']:.6g} "
              f"threshold={c['threshold']:.6g}")


def _run(fn, seed, budget):
    start = time.monotonic()
    result = fn(seed)
    elapsed = time.monotonic() - start
    _report(result, elapsed)
    assert result["pass"], [c for c in result["checks"] if not c["pass"]]
    assert elapsed < budget, f"runtime {elapsed:.1f}s exceeds {budget}s budget"
    return result


def test_criterion_1_tsirelson_reproduction():
    result = _run(acceptance.criterion_1, 42, 30.0)
    assert abs(result["analytic_S"] - 2 * 2 ** 0.5) < 1e-9
    assert abs(result["monte_carlo_S"] - 2 * 2 ** 0.5) < 0.05


def test_criterion_2_exact_feasibility():
    result = _run(acceptance.criterion_2, 42, 60.0)
    assert result["random_trials"] == 1000
    assert 0 < result["random_infeasible"] < 1000


def test_criterion_3_frame_relational_fidelity():
    result = _run(acceptance.criterion_3, 42, 60.0)
    assert result["trials"] == 4 * 10 ** 5
    assert result["independence"]["flags"] == []


def test_criterion_4_invariant_subspace():
    _run(acceptance.criterion_4, 42, 120.0)


def test_criterion_5_sequential_consistency():
    result = _run(acceptance.criterion_5, 42, 120.0)
    assert result["trials"] == 10 ** 4


def test_criterion_6_repeat_runs_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        code = cli.main(["accept", "--seed", "42", "--format", "json",
                         "--out", str(p)])
        capsys.readouterr()
        assert code == cli.EXIT_PASS
    first, second = paths[0].read_bytes(), paths[1].read_bytes()
    assert first == second
    status = "PASS" if first == second else "FAIL"
    with capsys.disabled():
        print(f"[{status}] criterion 6 (determinism): "
              f"{len(first)} bytes, identical across runs")


def test_run_all_aggregates():
    result = acceptance.run_all(7)
    assert [r["criterion"] for r in result["criteria"]] == [1, 2, 3, 4, 5, 6]
    assert result["pass"] == all(r["pass"] for r in result["criteria"])
