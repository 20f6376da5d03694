import io
import subprocess
import sys

import pytest

from dqc.cli import RunReport, run_command
from dqc.dtree import DecisionTree, format_tree

AND2 = "inputs 2\ngate g1 AND x1 x2\noutput g1\n"


def run(argv):
    out = io.StringIO()
    code = run_command(argv, out)
    text = out.getvalue()
    fields = dict(line.split("=", 1) for line in text.splitlines())
    return code, fields, text


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "and2.nl").write_text(AND2)
    return tmp_path


def test_build_crossexam_and2(work):
    code, f, _ = run(["debate", "build", "--protocol", "crossexam", "--circuit", "and2.nl",
                      "--verify"])
    assert code == 0
    assert f["valid"] == "true" and "counterexample" not in f
    assert int(f["max_probes_observed"]) <= int(f["log_bound"]) + 1   # m=1 forces B=1


def test_missing_system_file(work, capsys):
    code = run_command(["debate", "verify", "--system", "missing.sys"], io.StringIO())
    assert code == 2
    assert "missing.sys" in capsys.readouterr().err


def test_usage_errors(work):
    with pytest.raises(SystemExit) as e:
        run_command(["nonsense"])
    assert e.value.code == 2
    assert run_command(["debate", "build", "--builtin", "and"], io.StringIO()) == 2


def test_budget_exceeded_is_exit_2(work):
    code = run_command(["--budget", "5", "debate", "build", "--builtin", "parity", "--n", "4",
                        "--verify"], io.StringIO())
    assert code == 2


def test_yao_with_tree_file(work):
    # parity_4 KW has k=3, so the index space is 10 positions
    (work / "t.dt").write_text(format_tree(
        DecisionTree(10, (("node", 0, 1, 2), ("leaf", 0), ("leaf", 1)))))
    code, f, _ = run(["yao", "run", "--builtin", "parity", "--n", "4", "--protocol", "kw",
                      "--tree", "t.dt"])
    assert code == 0
    # w = 0000 for every pair, so only the three flipped-at-x_i atoms err
    assert f["measured_error"] == "3/8" and f["certified_lower_bound"] == "3/8"


def test_invalid_report_exits_1(work):
    (work / "bad.adv").write_text("space 2 1\nnext - 0\nverdict 0 1\nverdict 1 1\n")
    (work / "a.sys").write_text("protocol kw\nbuiltin and 2\n")
    code, f, _ = run(["advice", "check", "--system", "a.sys", "--table", "bad.adv"])
    assert code == 1 and f["valid"] == "false" and "counterexample" in f


def test_system_descriptor_chain(work):
    code, f, _ = run(["debate", "build", "--builtin", "majority", "--n", "3", "--pad", "1,4",
                      "--save", "m.sys"])
    assert code == 0 and f["verified"] == "false"
    code, f, _ = run(["debate", "compress", "--system", "m.sys"])
    assert code == 0 and f["removed_rounds"] == "1,4" and f["chain"] == "kw>pad[1,4]>compress"
    (work / "c.sys").write_text("protocol kw\nbuiltin and 2\ncompile\n")
    code, f, _ = run(["debate", "verify", "--system", "c.sys"])
    assert code == 0 and f["chain"] == "kw>compile" and f["valid"] == "true"


def test_advice_round_trip(work):
    (work / "a.sys").write_text("protocol crossexam\ncircuit and2.nl\n")
    code, f, _ = run(["advice", "extract", "--system", "a.sys", "--out", "a.adv"])
    assert code == 0 and int(f["rows"]) <= int(f["row_bound"])
    code, f, _ = run(["advice", "check", "--system", "a.sys", "--table", "a.adv"])
    assert code == 0 and f["mismatches"] == "0"


def test_text_format(work):
    out = io.StringIO()
    assert run_command(["--format", "text", "circuit", "info", "--circuit", "and2.nl"], out) == 0
    assert out.getvalue().splitlines()[0].split() == ["function", "and2"]


def test_timing_only_on_request(work):
    _, f, _ = run(["circuit", "info", "--circuit", "and2.nl"])
    assert "wall_time" not in f
    _, f, _ = run(["circuit", "info", "--circuit", "and2.nl", "--timing"])
    assert "wall_time" in f


def test_report_rejects_inconsistent_fields():
    from dqc.cli import _check_report
    from dqc.errors import InternalConsistencyError
    with pytest.raises(InternalConsistencyError):
        _check_report(RunReport(valid=True, counterexample={"x": "00"}))
    with pytest.raises(InternalConsistencyError):
        _check_report(RunReport(valid=False, max_probes_observed=5, ell_bound=4))


def test_console_script_entry(work):
    proc = subprocess.run([sys.executable, "-m", "dqc.cli", "circuit", "info", "--builtin",
                           "parity", "--n", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "circuit_size=8" in proc.stdout
