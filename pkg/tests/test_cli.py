import json
import subprocess
import sys

import pytest

from cmt.aspgen import find_solver
from cmt.cli import main
from cmt.dsl import parse_domain
from cmt.theories import ae_domain, read_data


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_plan_joy_to_anger_is_unsat(capsys):
    code, out, _ = run(capsys, "plan", "--domain", "ae.cmt", "--theory", "her", "--source",
                       "listing", "--firing", "onset", "--init", "joy", "--goal", "anger",
                       "--horizon", "6")
    assert code == 1
    assert "UNSATISFIABLE" in out


def test_plan_fear_to_hope_is_sat(capsys):
    code, out, _ = run(capsys, "plan", "--theory", "her", "--init", "fear", "--goal", "hope")
    assert code == 0 and "SATISFIABLE" in out and "UNSATISFIABLE" not in out


def test_verify_dialogue_flags_first_transition(capsys):
    code, out, _ = run(capsys, "verify", "--domain", "dialogue.cmt", "--trace", "s8.json",
                       "--theory", "her", "--firing", "holding", "--format", "json")
    assert code == 1
    data = json.loads(out)
    assert [t["passed"] for t in data["transitions"]] == [False] + [True] * 5


def test_parse_prints_canonical_domain(capsys):
    code, out, _ = run(capsys, "parse", "--domain", "ae.cmt")
    assert code == 0
    body = "\n".join(line for line in out.splitlines() if not line.startswith("# command="))
    assert parse_domain(body) == ae_domain()


def test_header_echoes_config(capsys):
    _, out, _ = run(capsys, "plan", "--theory", "uer", "--init", "dislike", "--goal", "anger",
                    "--orientation", "reversed")
    head = out.splitlines()[0]
    assert head.startswith("# command=plan")
    for part in ("theory=uer", "source=listing", "orientation=reversed", "firing=onset"):
        assert part in head


def test_different_configs_never_give_identical_reports(capsys):
    outs = set()
    for firing in ("holding", "onset"):
        for orientation in ("as-written", "reversed"):
            _, out, _ = run(capsys, "verify", "--domain", "dialogue.cmt", "--trace", "s8.json",
                            "--theory", "uer", "--firing", firing, "--orientation",
                            orientation)
            outs.add(out)
    assert len(outs) == 4


@pytest.mark.parametrize("argv", [
    ["plan", "--theory", "her", "--init", "joy", "--goal", "anger", "--format", "json"],
    ["plan", "--theory", "her", "--init", "fear", "--goal", "hope", "--format", "json"],
    ["verify", "--domain", "dialogue.cmt", "--trace", "s8.json", "--theory", "uer",
     "--format", "json"],
    ["check", "--domain", "dialogue.cmt", "--obs", "dialogue.cmto", "--format", "json"],
    ["reach", "--theory", "her", "--format", "json"],
    ["parse", "--domain", "ae.cmt", "--format", "json"],
])
def test_json_output_is_valid_for_success_and_failure(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code in (0, 1)
    data = json.loads(out)
    assert "config" in data


def test_parse_error_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.cmt"
    bad.write_text("class p { a, b }\nlaw x causes ;\n")
    code, _, err = run(capsys, "parse", "--domain", str(bad))
    assert code == 2
    assert "bad.cmt" in err


def test_missing_theory_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--domain", "dialogue.cmt", "--trace", "s8.json"])
    assert exc.value.code == 2


def test_theory_from_rule_file(capsys, tmp_path):
    f = tmp_path / "mine.cmt"
    f.write_text(read_data("her_listing.cmt"))
    code, out, _ = run(capsys, "plan", "--theory", str(f), "--init", "joy", "--goal", "anger")
    assert code == 1 and "UNSATISFIABLE" in out


def test_experiment_writes_csv_and_summary(capsys, tmp_path):
    csv_path, json_path = tmp_path / "grid.csv", tmp_path / "grid.json"
    code, _, _ = run(capsys, "experiment", "--theory", "her", "--out-csv", str(csv_path),
                     "--out-json", str(json_path))
    assert code == 0
    assert len(csv_path.read_text().splitlines()) == 257
    summary = json.loads(json_path.read_text())
    assert summary["counts"]["HER"]["runs"] == 256


def test_emit_asp_prints_program(capsys):
    code, out, _ = run(capsys, "emit-asp", "--theory", "uer", "--horizon", "3")
    assert code == 0
    assert "#const t_max = 3." in out
    assert "% --- theory constraints ---" in out


@pytest.mark.skipif(find_solver() is None, reason="no answer set solver available")
def test_emit_asp_differential(capsys):
    code, out, _ = run(capsys, "emit-asp", "--differential", "10", "--seed", "3")
    assert code == 0 and "10 cases, agreement 100.00%" in out


@pytest.mark.skipif(find_solver() is None, reason="no answer set solver available")
@pytest.mark.parametrize("init,goal,firing", [("fear", "hope", "holding"),
                                              ("fear", "hope", "onset"),
                                              ("joy", "anger", "onset")])
def test_emit_asp_planning_agrees_with_plan(capsys, init, goal, firing):
    common = ["--theory", "her", "--init", init, "--goal", goal, "--firing", firing]
    plan_code, _, _ = run(capsys, "plan", *common)
    solver = " ".join(find_solver())
    asp_code, out, _ = run(capsys, "emit-asp", *common, "--solver", solver)
    assert asp_code == plan_code
    assert out.rstrip().endswith("UNSATISFIABLE" if plan_code else "% SATISFIABLE")


def test_discrepancy_command(capsys):
    code, out, _ = run(capsys, "discrepancy")
    assert code in (0, 1)
    assert "Anger-Liking" in out


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "cmt.cli", "parse", "--domain", "ae.cmt"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "class ne" in res.stdout
