import json
import math

import pytest

from monoheight.cli import EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_analyze(capsys):
    code, d = run_json(capsys, "analyze", "--matrix", "[[2,1],[1,1]]")
    assert code == EXIT_OK
    assert d["delta"] == pytest.approx(2.6180340, abs=1e-7) and d["ell"] == 0
    assert d["backward_matrix"] == [[1, -1], [-1, 2]]
    _, d = run_json(capsys, "analyze", "--matrix", "[[2,1],[0,2]]")
    assert d["delta"] == 2 and d["ell"] == 1
    _, d = run_json(capsys, "analyze", "--matrix", '{"n": 2, "rows": [[2,0],[0,2]]}')
    assert d["ell"] == 0 and d["backward_matrix"] == [[2, 0], [0, 2]]


def test_height_and_canheight(capsys):
    _, d = run_json(capsys, "height", "--point", '["2/3", 5]')
    assert d["height"] == pytest.approx(math.log(15))
    _, d = run_json(capsys, "canheight", "--which", "forward", "--matrix", "[[2,0],[0,2]]", "--point", "[2,3]")
    assert d["value"] == pytest.approx(math.log(3)) and d["method"] == "closed_form_projector"
    _, d = run_json(capsys, "canheight", "--which", "total", "--matrix", "[[2,1],[0,2]]", "--point", "[2,3]")
    assert d["value"] == pytest.approx(math.log(3))
    _, d = run_json(capsys, "canheight", "--method", "iterative", "--nmax", "40", "--matrix", "[[2,1],[1,1]]",
                    "--point", "[32, \"1/256\"]")
    assert d["method"] == "iterative_window" and d["n_max"] == 40


def test_verify_exit_codes(capsys):
    code, d = run_json(capsys, "verify", "--identity", "functional-eq", "--matrix", "[[2,1],[1,1]]", "--point", "[2,3]")
    assert code == EXIT_OK and d["passed"]
    code, _ = run(capsys, "verify", "--identity", "lower-bound", "--matrix", "[[2,0,0],[0,3,0],[0,0,5]]",
                  "--point", "[2,3,5]")
    assert code == EXIT_HYPOTHESIS
    code, d = run_json(capsys, "verify", "--identity", "preperiodic", "--matrix", "[[2,1],[1,1]]",
                       "--point", "[-1,1]", "--point", "[2,1]")
    assert [r["preperiodic"] for r in d] == [True, False]


def test_gen_small(capsys):
    code, d = run_json(capsys, "gen-small", "--mode", "fibonacci", "--k", "5")
    assert code == EXIT_OK and d["predicted_bound"] == pytest.approx(0.0279513, abs=1e-7)
    code, d = run_json(capsys, "gen-small", "--mode", "total", "--matrix", "[[0,0,3],[1,0,-9],[0,1,6]]",
                       "--epsilon", "0.01")
    assert code == EXIT_OK and d["holds"]
    code, _ = run(capsys, "gen-small", "--mode", "forward", "--matrix", "[[2,0],[0,2]]")
    assert code == EXIT_HYPOTHESIS


def test_input_errors(capsys, tmp_path):
    assert run(capsys, "height", "--point", "[0,1]")[0] == EXIT_INPUT
    assert run(capsys, "analyze", "--matrix", "[[1,2],[2,4]]")[0] == EXIT_INPUT
    assert run(capsys, "analyze", "--matrix", "nonsense")[0] == EXIT_INPUT
    assert run(capsys, "canheight", "--matrix", "[[2,1],[1,1]]", "--point", "[2,3]", "--tol", "-1")[0] == EXIT_INPUT
    assert run(capsys, "canheight", "--matrix", "[[1,1],[0,1]]", "--point", "[2,3]")[0] == EXIT_HYPOTHESIS
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--format", "xml"])
    assert exc.value.code == 2


def test_file_inputs(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text("[[2,1],[1,1]]", encoding="utf-8")
    p = tmp_path / "p.json"
    p.write_text('{"coords": ["2/3", 5]}', encoding="utf-8")
    code, d = run_json(capsys, "canheight", "--matrix", str(m), "--point", str(p))
    assert code == EXIT_OK and d["value"] > 0


def test_json_round_trip_and_table(capsys):
    _, out = run(capsys, "verify", "--matrix", "[[3,1],[1,2]]", "--point", "[2,3]", "--identity", "recurrence")
    data = json.loads(out)
    assert json.loads(json.dumps(data)) == data
    _, table = run(capsys, "verify", "--matrix", "[[3,1],[1,2]]", "--point", "[2,3]", "--identity", "recurrence",
                   "--format", "table")
    rows = dict(line.split(None, 1) for line in table.splitlines())
    assert json.loads(rows["residual"]) == data["residual"]
    assert json.loads(rows["details.H"]) == data["details"]["H"]


def test_suite_deterministic(capsys):
    a = run_json(capsys, "suite", "--seed", "42", "--count", "5")
    b = run_json(capsys, "suite", "--seed", "42", "--count", "5", "--parallel", "2")
    assert a == b and a[0] == EXIT_OK
