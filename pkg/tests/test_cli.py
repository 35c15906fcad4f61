import json
import subprocess
import sys

import pytest

from extractkit.cli import main

from helpers import DATA, EXAMPLE_DOC

E1 = str(DATA / "example_e1.aut")
E2 = str(DATA / "example_e2.aut")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture
def star_empty(tmp_path):
    # (empty-marker a)*: only documents of a's have a row
    return write(tmp_path, "star.expr", "sigma: a b\nexpr: ({}:a)*\n")


def test_eval_example_documents(capsys):
    code, out, _ = run(capsys, "eval", E1, EXAMPLE_DOC)
    assert code == 0
    record = json.loads(out)
    assert record["count"] == 8 and record["document"] == EXAMPLE_DOC
    code, out, _ = run(capsys, "eval", E2, EXAMPLE_DOC, "bcb", "--limit", "3")
    lines = [json.loads(l) for l in out.splitlines()]
    # bcb: A on the first b, the c carries A alone or A and B
    assert [r["count"] for r in lines] == [3, 2]


def test_eval_is_deterministic_and_csv(capsys, tmp_path):
    doc = write(tmp_path, "doc.txt", EXAMPLE_DOC + "\n")
    first = run(capsys, "eval", E1, "@" + doc, "--format", "csv")[1]
    second = run(capsys, "eval", E1, EXAMPLE_DOC, "--format", "csv")[1]
    assert first == second
    assert first.splitlines()[0] == "x,y,z"
    assert len(first.splitlines()) == 9


def test_member(capsys):
    row = '{"x": [2, 8], "y": [2, 3], "z": [7, 9, 10]}'
    assert run(capsys, "member", E1, EXAMPLE_DOC, row)[0] == 0
    assert run(capsys, "member", E1, EXAMPLE_DOC, '{"x": [3, 8]}')[0] == 1
    assert run(capsys, "member", E1, EXAMPLE_DOC, "[1]")[0] == 3


def test_empty_exit_codes(capsys, star_empty):
    code, out, _ = run(capsys, "empty", star_empty, "ab")
    assert code == 0 and json.loads(out)["verdict"] is True
    code, out, _ = run(capsys, "empty", star_empty, "aa")
    assert code == 1 and json.loads(out)["witness"]["document"] == "aa"


def test_pair_problems(capsys):
    assert run(capsys, "disjoint", E1, E2, EXAMPLE_DOC)[0] == 0
    assert run(capsys, "contains", E1, E1, EXAMPLE_DOC)[0] == 0
    assert run(capsys, "equiv", E1, E2, EXAMPLE_DOC)[0] == 1


def test_sat_fixture_containment(capsys, tmp_path):
    cnf = write(tmp_path, "unsat.cnf", "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n")
    out_dir = tmp_path / "sat"
    assert run(capsys, "reduce", "sat", cnf, "-o", str(out_dir))[0] == 0
    w = (out_dir / "document.txt").read_text().strip()
    code, out, _ = run(capsys, "contains", str(out_dir / "m1.aut"), str(out_dir / "m2.aut"), w)
    assert code == 0 and json.loads(out)["verdict"] is True


def test_pcp_fixture_disjointness(capsys, tmp_path):
    pcp = write(tmp_path, "p.pcp", "bound: 1\na a\n")
    out_dir = tmp_path / "pcp"
    assert run(capsys, "reduce", "pcp", pcp, "-o", str(out_dir))[0] == 0
    code, _, _ = run(capsys, "disjoint", str(out_dir / "g1.cfg"), str(out_dir / "g2.cfg"), "@" + str(out_dir / "document.txt"))
    assert code == 1


def test_budget_exhaustion_is_unknown(capsys, tmp_path):
    wide = write(tmp_path, "wide.cfg", "sigma: a\ngamma: x y\nS -> T S | <eps>\nT -> {}:a | {x}:a | {y}:a | {x,y}:a\n")
    code, out, _ = run(capsys, "--budget", "10", "equiv", wide, wide, "aaaa")
    assert code == 2 and json.loads(out)["verdict"] == "unknown"
    code, _, err = run(capsys, "--budget", "10", "eval", wide, "aaaa")
    assert code == 2 and "budget" in err


def test_parse_and_usage_errors(capsys, tmp_path):
    bad = write(tmp_path, "bad.expr", "sigma: a\nexpr: {x}:a |\n")
    code, _, err = run(capsys, "eval", bad, "a")
    assert code == 3 and "line 2" in err
    assert run(capsys, "eval", str(tmp_path / "missing.aut"), "a")[0] == 3
    assert run(capsys, "empty", E1, "xyz")[0] == 3
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 3


def test_compile_and_verify(capsys, tmp_path):
    src = write(tmp_path, "one.expr", "sigma: a b\ngamma: x\nexpr: ({}:a | {}:b)* {x}:a ({}:a | {}:b)*\n")
    target = tmp_path / "one.aut"
    assert run(capsys, "compile", src, "-o", str(target))[0] == 0
    code, out, _ = run(capsys, "eval", str(target), "aba")
    assert code == 0 and json.loads(out)["count"] == 2
    code, out, _ = run(capsys, "verify", src, "abab")
    assert code == 0 and json.loads(out)["agree"] is True


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "extractkit", "eval", E1, "bacab"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 2


def test_parallel_eval_keeps_input_order(capsys):
    docs = [EXAMPLE_DOC, "bacab", "ab", "bcb", "aab"]
    serial = run(capsys, "eval", E1, *docs)[1]
    code, parallel, _ = run(capsys, "eval", E1, *docs, "--jobs", "3")
    assert code == 0 and parallel == serial
    assert [json.loads(l)["document"] for l in parallel.splitlines()] == docs
