"""Command-line orchestration.

Subcommands: basic | lf | feasibility | relmodel | rovelli | accept.
Exit codes: 0 pass, 1 invariant or tolerance failure, 2 input error,
3 internal method disagreement.

A JSON config file (--config) may mirror any flag; explicit flags override
the file.  JSON output is canonical (sorted keys), so identical
(command, config, seed) triples produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import acceptance
from . import marginal_polytope as mp
from . import relmodel, scenarios, statlab
from .hilbert import born_distribution, factor_basis_spec
from .scenarios import LFConfig, RovelliConfig

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_DISAGREE = 3


class InputError(ValueError):
    pass


def _parse_angles(text: str) -> LFConfig:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise InputError("--angles needs four comma-separated degrees: ask_A,super_A,ask_C,super_C")
    try:
        return LFConfig(*(float(p) for p in parts))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config file: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("config file must hold a JSON object")
    return obj


def _resolve(args: argparse.Namespace, key: str, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    if args.config_data and key in args.config_data:
        return args.config_data[key]
    return default


def _resolve_lf_config(args: argparse.Namespace) -> LFConfig:
    angles = _resolve(args, "angles")
    if angles is None:
        return LFConfig()
    if isinstance(angles, str):
        return _parse_angles(angles)
    if isinstance(angles, dict):
        try:
            return LFConfig.from_json_dict({"angles": angles})
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad angles in config file: {exc}") from exc
    if isinstance(angles, (list, tuple)) and len(angles) == 4:
        return LFConfig(*(float(a) for a in angles))
    raise InputError("angles must be 'a,b,c,d', a 4-list, or an object")


def _emit(args: argparse.Namespace, report: dict, render_table, render_csv=None) -> None:
    fmt = _resolve(args, "format", "table")
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        if render_csv is None:
            raise InputError("this command has no CSV representation")
        text = render_csv(report)
    elif fmt == "table":
        text = render_table(report)
    else:
        raise InputError(f"unknown format {fmt!r}")
    out = _resolve(args, "out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _tolerance_lines(checks: list[dict]) -> str:
    lines = []
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        lines.append(f"  [{status}] {c['name']}: {c['metric']}={c['observed']:.6g} "
                     f"(threshold {c['threshold']:.6g}, n={c['n']})")
    return "\n".join(lines)


# --- basic ------------------------------------------------------------------

def cmd_basic(args: argparse.Namespace) -> int:
    amps = _resolve(args, "amps", "0.7071067811865476,0.7071067811865476")
    parts = [p.strip() for p in str(amps).split(",")]
    if len(parts) != 2:
        raise InputError("--amps needs two comma-separated amplitudes a,b")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if abs(a * a + b * b - 1.0) > 1e-9:
        raise InputError(f"amplitudes not normalized: a^2 + b^2 = {a * a + b * b}")
    outcome = int(_resolve(args, "outcome", 1))
    if outcome not in (+1, -1):
        raise InputError("--outcome must be +1 or -1")

    state = scenarios.build_basic_wf_state(a, b)
    s_spec = factor_basis_spec(scenarios.BASIC_LAYOUT, "S", labels=(+1, -1))
    born = {f"{label:+d}": p for label, p in born_distribution(state, s_spec)}
    report = {
        "command": "basic",
        "amplitudes": {"a": a, "b": b},
        "entangled_amps": [[float(x.real), float(x.imag)] for x in state.amps],
        "born_S": born,
    }
    equal_weights = abs(abs(a) - abs(b)) <= 1e-9
    if equal_weights:
        frame = scenarios.build_frame_relational_state(outcome)
        ba, bb = scenarios.frame_relational_branches(outcome)
        witness = scenarios.interference_witness(frame, ba, bb)
        rec = dict(born_distribution(frame, scenarios.record_spec(scenarios.FRAME_LAYOUT)))
        report["frame_relational"] = {
            "outcome": outcome,
            "interference_witness": witness,
            "record_expectation": rec[0] - rec[1],
        }
    else:
        # the frame-relational construction is defined only for equal branch
        # weights; unequal amplitudes make the witness degenerate
        report["frame_relational"] = {
            "outcome": outcome,
            "degenerate": "frame-relational state requires equal branch weights",
        }

    def table(rep: dict) -> str:
        lines = [f"basic sealed-lab state with a={a}, b={b}",
                 f"  amplitudes over (S,A): {rep['entangled_amps']}",
                 f"  Born distribution on S: {rep['born_S']}"]
        fr = rep["frame_relational"]
        if "degenerate" in fr:
            lines.append(f"  frame-relational: {fr['degenerate']}")
        else:
            lines.append(f"  frame-relational witness: {fr['interference_witness']:.6f}, "
                         f"record expectation: {fr['record_expectation']:+.6f}")
        return "\n".join(lines) + "\n"

    _emit(args, report, table)
    return EXIT_PASS


# --- lf ---------------------------------------------------------------------

_OBSERVED_PAIRS = {"AC": ("A", "C"), "AD": ("A", "D"), "BC": ("B", "C"), "BD": ("B", "D")}


def _pair_table_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["pair", "x", "y", "frequency", "born"])
    for pair, entry in report["pairs"].items():
        for cell, freq, born in zip(statlab.PAIR_CELLS, entry["frequencies"], entry["born"]):
            w.writerow([pair, cell[0], cell[1], freq, born])
    return buf.getvalue()


def cmd_lf(args: argparse.Namespace) -> int:
    cfg = _resolve_lf_config(args)
    trials = int(_resolve(args, "trials", 100000))
    seed = int(_resolve(args, "seed", 0))
    if trials < 100:
        raise InputError("lf needs at least 100 trials")
    batch = relmodel.simulate_batch(cfg, relmodel.uniform_policy(), trials, seed)
    analytic = scenarios.pair_correlations(cfg)
    s_analytic = analytic["AC"] + analytic["BC"] + analytic["BD"] - analytic["AD"]
    checks = []
    pairs_report = {}
    emp_tables = {}
    for i, (pair_id, pair) in enumerate(_OBSERVED_PAIRS.items()):
        table, n = relmodel.empirical_pair_table(batch, pair)
        emp_tables[pair_id] = table
        born = relmodel.born_target_table(cfg, *relmodel.CHOICE_PAIRS[i])
        tv = statlab.total_variation(table, born)
        checks.append(statlab.ToleranceReport(
            "TV", tv, 0.02, n, f"pair {pair_id} vs Born").to_json_dict())
        pairs_report[pair_id] = {
            "n": n,
            "frequencies": [table.freq(c) for c in statlab.PAIR_CELLS],
            "born": [born[c] for c in statlab.PAIR_CELLS],
            "E_analytic": analytic[pair_id],
        }
    s_mc, stderr = statlab.chsh_estimate(emp_tables)
    checks.append(statlab.ToleranceReport(
        "abs-diff", abs(s_mc - s_analytic), 0.05, trials, "CHSH estimate vs analytic").to_json_dict())
    report = {"command": "lf", **cfg.to_json_dict(), "trials": trials, "seed": seed,
              "pairs": pairs_report, "chsh": {"estimate": s_mc, "stderr": stderr,
                                              "analytic": s_analytic},
              "checks": checks, "pass": all(c["pass"] for c in checks)}

    def table(rep: dict) -> str:
        lines = [f"four-observer circuit at angles {cfg.to_json_dict()['angles']}",
                 f"  trials={trials} seed={seed}"]
        for pair_id, entry in rep["pairs"].items():
            lines.append(f"  {pair_id}: n={entry['n']} E_analytic={entry['E_analytic']:+.4f} "
                         f"freq={['%.4f' % f for f in entry['frequencies']]}")
        lines.append(f"  CHSH: {rep['chsh']['estimate']:.4f} +/- {rep['chsh']['stderr']:.4f} "
                     f"(analytic {rep['chsh']['analytic']:.4f})")
        lines.append(_tolerance_lines(rep["checks"]))
        return "\n".join(lines) + "\n"

    _emit(args, report, table, _pair_table_csv)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# --- feasibility ------------------------------------------------------------

def cmd_feasibility(args: argparse.Namespace) -> int:
    targets_path = _resolve(args, "targets")
    from_angles = bool(_resolve(args, "from_angles", False))
    if targets_path and from_angles:
        raise InputError("give either --targets or --from-angles, not both")
    if targets_path:
        try:
            with open(targets_path) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read targets: {exc}") from exc
        try:
            targets = mp.PairTargets.from_json_dict(obj)
        except mp.TargetError as exc:
            raise InputError(str(exc)) from exc
    elif from_angles:
        targets = mp.PairTargets.from_angles(_resolve_lf_config(args))
    else:
        raise InputError("feasibility needs --targets FILE or --from-angles")

    v4 = mp.feasible_joint_4(targets)
    v6 = mp.feasible_joint_6(targets)
    fine = mp.fine_criterion(targets)
    s = mp.chsh_value(targets)
    agree = v4.feasible == v6.feasible == fine
    report = {"command": "feasibility",
              "targets": targets.to_json_dict(),
              "chsh_value": str(s), "chsh_value_float": float(s),
              "joint_4": v4.to_json_dict(), "joint_6": v6.to_json_dict(),
              "fine_criterion": fine, "methods_agree": agree}

    def table(rep: dict) -> str:
        lines = [f"pairwise targets: S = {rep['chsh_value']} ~ {rep['chsh_value_float']:.4f}",
                 f"  4-variable joint: {'feasible' if v4.feasible else 'infeasible'}",
                 f"  6-variable joint: {'feasible' if v6.feasible else 'infeasible'}",
                 f"  analytic criterion: {'feasible' if fine else 'infeasible'}"]
        if v4.feasible:
            lines.append(f"  witness atoms (A,B,C,D lexicographic): "
                         f"{[str(p) for p in v4.witness.probs]}")
        else:
            lines.append(f"  max violation over 2: {v4.max_violation}")
        if not agree:
            lines.append("  METHOD DISAGREEMENT - this is a bug")
        return "\n".join(lines) + "\n"

    _emit(args, report, table)
    return EXIT_PASS if agree else EXIT_DISAGREE


# --- relmodel ---------------------------------------------------------------

def _records_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    fields = ["a_internal", "c_internal", "b_choice", "d_choice", "b_outcome",
              "d_outcome", "a_external", "c_external", "a_relation", "c_relation"]
    w.writerow(fields)
    for rec in report["records"]:
        w.writerow(["" if rec[f] is None else rec[f] for f in fields])
    return buf.getvalue()


def cmd_relmodel(args: argparse.Namespace) -> int:
    cfg = _resolve_lf_config(args)
    trials = int(_resolve(args, "trials", 400000))
    seed = int(_resolve(args, "seed", 0))
    planted = bool(_resolve(args, "planted_violation", False))
    if trials < 100:
        raise InputError("relmodel needs at least 100 trials")
    batch = relmodel.simulate_batch(cfg, relmodel.uniform_policy(), trials, seed)
    if planted:
        # debug self-test: overwrite the internal outcome with the choice,
        # which must trip the choice-independence audit
        corrupted = tuple(
            relmodel.RunRecord(
                +1 if r.b_choice is relmodel.Choice.ASK else -1,
                r.c_internal, r.b_choice, r.d_choice, r.b_outcome, r.d_outcome,
                r.a_external, r.c_external,
                (r.a_external * (+1 if r.b_choice is relmodel.Choice.ASK else -1))
                if r.a_external is not None else None,
                r.c_relation)
            for r in batch.records)
        batch = relmodel.TrialBatch(cfg, corrupted, seed)

    checks = []
    invalid = 0
    for r in batch.records:
        try:
            r.validate()
        except ValueError:
            invalid += 1
    checks.append(statlab.ToleranceReport(
        "abs-diff", float(invalid), 0.0, trials, "presence/product violations").to_json_dict())
    for i, (pair_id, pair) in enumerate(_OBSERVED_PAIRS.items()):
        table, n = relmodel.empirical_pair_table(batch, pair)
        born = relmodel.born_target_table(cfg, *relmodel.CHOICE_PAIRS[i])
        tv = statlab.total_variation(table, born)
        checks.append(statlab.ToleranceReport(
            "TV", tv, 0.02, n, f"observed pair {pair_id} vs Born").to_json_dict())
    internal, n_int = relmodel.empirical_pair_table(batch, ("Ai", "Ci"))
    worst = max(abs(internal.freq(c) - 0.25) for c in statlab.PAIR_CELLS)
    checks.append(statlab.ToleranceReport(
        "abs-diff", worst, 0.02, n_int, "internal joint cells vs 1/4").to_json_dict())
    independence = relmodel.check_choice_independence(batch)
    checks.append(statlab.ToleranceReport(
        "abs-diff", float(len(independence.flags)), 0.0, trials,
        "choice-independence flags").to_json_dict())
    targets = mp.PairTargets.from_angles(cfg)
    verdict = mp.feasible_joint_4(targets)
    report = {"command": "relmodel", **cfg.to_json_dict(), "trials": trials,
              "seed": seed, "planted_violation": planted,
              "internal_joint": {f"{c[0]:+d},{c[1]:+d}": internal.freq(c)
                                 for c in statlab.PAIR_CELLS},
              "independence": independence.to_json_dict(),
              "analytic_feasibility": verdict.to_json_dict(),
              "records": [r.to_json_dict() for r in batch.records[:1000]],
              "checks": checks, "pass": all(c["pass"] for c in checks)}

    def table(rep: dict) -> str:
        lines = [f"frame-relational model, trials={trials} seed={seed}",
                 f"  internal joint (Ai,Ci): {rep['internal_joint']}",
                 f"  analytic targets feasible: {verdict.feasible}",
                 _tolerance_lines(rep["checks"])]
        return "\n".join(lines) + "\n"

    _emit(args, report, table, _records_csv)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# --- rovelli ----------------------------------------------------------------

def cmd_rovelli(args: argparse.Namespace) -> int:
    trials = int(_resolve(args, "trials", 10000))
    seed = int(_resolve(args, "seed", 0))
    trigger = int(_resolve(args, "trigger", 1))
    if trials < 1:
        raise InputError("rovelli needs at least one trial")
    try:
        cfg = RovelliConfig(trigger=trigger)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    states = scenarios.build_rovelli_states(cfg)
    spec = scenarios.record_spec(scenarios.ROVELLI_LAYOUT, labels=scenarios.ROVELLI_RECORDS)
    state_reports = []
    for i, state in enumerate(states):
        dist = dict(born_distribution(state, spec))
        b0, b1 = scenarios.rovelli_branches(state)
        state_reports.append({
            "record": scenarios.ROVELLI_RECORDS[i],
            "record_probabilities": {k: dist[k] for k in scenarios.ROVELLI_RECORDS},
            "interference_witness": scenarios.interference_witness(state, b0, b1),
        })
    rng = np.random.default_rng(seed)
    runs = [relmodel.rovelli_run(cfg, ask=True, rng=rng) for _ in range(trials)]
    consistent = sum(1 for r in runs if r.report_consistent)
    performed_on_trigger = all(r.performed_second == (r.first == cfg.trigger) for r in runs)
    rate = consistent / trials
    report = {"command": "rovelli", **cfg.to_json_dict(), "trials": trials, "seed": seed,
              "states": state_reports, "consistency_rate": rate,
              "second_iff_trigger": performed_on_trigger,
              "pass": rate == 1.0 and performed_on_trigger}

    def table(rep: dict) -> str:
        lines = [f"sequential scenario, trigger={cfg.trigger:+d}, trials={trials}"]
        for sr in rep["states"]:
            lines.append(f"  state {sr['record']}: witness={sr['interference_witness']:.6f} "
                         f"records={sr['record_probabilities']}")
        lines.append(f"  consistency rate: {rep['consistency_rate']:.4f} "
                     f"(second measurement iff trigger: {rep['second_iff_trigger']})")
        return "\n".join(lines) + "\n"

    _emit(args, report, table)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# --- accept -----------------------------------------------------------------

def cmd_accept(args: argparse.Namespace) -> int:
    seed = int(_resolve(args, "seed", 42))
    report = acceptance.run_all(seed)
    report["command"] = "accept"

    def table(rep: dict) -> str:
        lines = [f"acceptance suite, master seed {seed}"]
        for crit in rep["criteria"]:
            status = "PASS" if crit["pass"] else "FAIL"
            lines.append(f"[{status}] criterion {crit['criterion']}: {crit['name']}")
            lines.append(_tolerance_lines(crit["checks"]))
        lines.append("overall: " + ("PASS" if rep["pass"] else "FAIL"))
        return "\n".join(lines) + "\n"

    _emit(args, report, table)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


# --- driver -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="friendlab",
        description="Simulate Extended Wigner's Friend experiments and decide "
                    "joint-distribution feasibility exactly.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file mirroring the flags; flags override")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--angles", help="ask_A,super_A,ask_C,super_C in degrees")
        p.add_argument("--format", choices=("table", "json", "csv"))
        p.add_argument("--out", help="write the report to this path instead of stdout")

    p = sub.add_parser("basic", help="sealed-lab state and its frame-relational form")
    common(p)
    p.add_argument("--amps", help="a,b amplitudes of the measured qubit")
    p.add_argument("--outcome", type=int, choices=(1, -1))
    p.set_defaults(func=cmd_basic)

    p = sub.add_parser("lf", help="simulate the four-observer circuit")
    common(p)
    p.set_defaults(func=cmd_lf)

    p = sub.add_parser("feasibility", help="exact joint-distribution feasibility")
    common(p)
    p.add_argument("--targets", help="JSON file of pairwise 2x2 tables")
    p.add_argument("--from-angles", dest="from_angles", action="store_true", default=None)
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("relmodel", help="Monte Carlo frame-relational model")
    common(p)
    p.add_argument("--planted-violation", dest="planted_violation",
                   action="store_true", default=None,
                   help="corrupt the batch to verify the audits catch it")
    p.set_defaults(func=cmd_relmodel)

    p = sub.add_parser("rovelli", help="sequential-measurement scenario")
    common(p)
    p.add_argument("--trigger", type=int, choices=(1, -1))
    p.set_defaults(func=cmd_rovelli)

    p = sub.add_parser("accept", help="run the acceptance suite")
    common(p)
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.config_data = _load_config_file(args.config) if args.config else {}
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except mp.TargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
