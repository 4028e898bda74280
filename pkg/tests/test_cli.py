import io
import json

import pytest

from finhind.cli import BAD_INPUT, INVALID, OK, UNKNOWN, gen_coloring, main
from finhind import formats


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_sp_trivial():
    assert run("sp", "--m", "1", "--p", "1", "--c", "1") == (OK, "exact 1\n")


def test_u_one_color():
    assert run("u", "--n", "3", "--c", "1") == (OK, "exact 3\n")


def test_hind_budget_exhausted():
    code, text = run("hind", "--n", "2", "--c", "2", "--max-k", "3", "--max-nodes", "10")
    assert code == UNKNOWN and text.startswith("unknown >= ")


def test_naive_flag_and_threads():
    assert run("sp", "--m", "2", "--p", "1", "--c", "1", "--naive") == (OK, "exact 5\n")
    assert run("hind", "--n", "2", "--c", "2", "--threads", "2") == (OK, "exact 5\n")


def test_certificate_round_trip(tmp_path):
    cert = tmp_path / "cert.json"
    assert run("hind", "--n", "2", "--c", "2", "--cert", str(cert))[0] == OK
    assert run("verify", "--certificate", str(cert)) == (OK, "VALID\n")
    obj = json.loads(cert.read_text())
    obj["coloring"]["assign"] = [0] * len(obj["coloring"]["assign"])
    assert run("verify", "--certificate", write(tmp_path / "bad.json", obj))[0] == INVALID


def test_bound_exact():
    code, text = run("bound", "--m", "1", "--p", "1", "--c", "1", "--oracle", "exact")
    assert code == OK
    assert "k*=2" in text.splitlines()
    assert text.splitlines()[-1] == "bound_operative=8"


def test_bound_symbolic_and_table(tmp_path):
    code, text = run("bound", "--m", "1", "--p", "1", "--c", "1", "--oracle", "symbolic")
    assert code == OK and "bound_paper=(pow2 (U (pow2 (U 1 1)) 1))" in text
    table = write(tmp_path / "t.json", {"u": [[1, 1, 1], [2, 1, 2]], "hind": []})
    code, text = run("bound", "--m", "1", "--p", "1", "--c", "1", "--oracle", f"table:{table}")
    assert code == OK and text.splitlines()[-1] == "bound_operative=8"


def test_bound_symbolic_two_colors():
    code, text = run("bound", "--m", "1", "--p", "1", "--c", "2", "--oracle", "symbolic")
    assert code == OK and "(U " in text.splitlines()[-1]


def test_bound_missing_table():
    assert run("bound", "--m", "1", "--p", "1", "--c", "1", "--oracle", "table:missing.json")[0] == BAD_INPUT


def test_extract_and_verify(tmp_path):
    col = write(tmp_path / "col.json", formats.coloring_to_json(gen_coloring("interval", 8, 1)))
    tr = tmp_path / "tr.json"
    code, text = run("extract", "--m", "1", "--p", "1", "--c", "1", "--coloring", col, "--transcript", str(tr))
    assert code == OK
    w = json.loads(text)
    assert w["kind"] == "spencer" and w["H"] == [1, 2, 4]
    assert json.loads(tr.read_text())["audit_row_equivalence"] is True
    wpath = tmp_path / "w.json"
    wpath.write_text(text)
    assert run("verify", "--witness", str(wpath), "--coloring", col) == (OK, "VALID\n")


def test_extract_errors(tmp_path):
    col8 = write(tmp_path / "c8.json", formats.coloring_to_json(gen_coloring("interval", 8, 1)))
    col4 = write(tmp_path / "c4.json", formats.coloring_to_json(gen_coloring("interval", 4, 1)))
    assert run("extract", "--m", "1", "--p", "1", "--c", "1", "--coloring", col8, "--n-seq", "0,1,1")[0] == INVALID
    assert run("extract", "--m", "1", "--p", "1", "--c", "1", "--coloring", col4)[0] == BAD_INPUT


def test_verify_outside_interval(tmp_path):
    col = write(tmp_path / "c.json", formats.coloring_to_json(gen_coloring("interval", 6, 1)))
    w = write(tmp_path / "w.json", {"kind": "spencer", "m": 1, "p": 1, "H": [1, 2, 4]})
    assert run("verify", "--witness", w, "--coloring", col) == (INVALID, "INVALID: sum 7 outside [k]\n")


def test_verify_union_witness(tmp_path):
    col = write(tmp_path / "c.json", formats.coloring_to_json(gen_coloring("subsets", 2, 1)))
    w = write(tmp_path / "w.json", {"kind": "union", "ordered": True, "n": 2, "d": [[0], [1]]})
    assert run("verify", "--witness", w, "--coloring", col) == (OK, "VALID\n")
    two = write(tmp_path / "c2.json", {"kind": "subsets", "k": 2, "colors": 2, "assign": [0, 0, 1]})
    assert run("verify", "--witness", w, "--coloring", two)[0] == INVALID


def test_malformed_json(tmp_path):
    p = tmp_path / "trunc.json"
    p.write_text('{"kind": "spen')
    col = write(tmp_path / "c.json", formats.coloring_to_json(gen_coloring("interval", 6, 1)))
    assert run("verify", "--witness", str(p), "--coloring", col)[0] == BAD_INPUT


def test_verify_needs_inputs():
    assert run("verify")[0] == BAD_INPUT


@pytest.mark.parametrize("argv", [
    ["gen-coloring", "--kind", "interval", "--k", "5", "--colors", "0"],
    ["sp", "--m", "0", "--p", "1", "--c", "1"],
    ["sp", "--m", "1", "--p", "1"],
    ["nonsense"],
])
def test_argument_errors_exit_3(argv):
    with pytest.raises(SystemExit) as info:
        main(argv, io.StringIO())
    assert info.value.code == BAD_INPUT


def test_gen_coloring_is_seeded():
    a = run("gen-coloring", "--kind", "interval", "--k", "20", "--colors", "3", "--seed", "5")
    b = run("gen-coloring", "--kind", "interval", "--k", "20", "--colors", "3", "--seed", "5")
    assert a == b and a[0] == OK
    col = formats.coloring_from_json(json.loads(a[1]))
    assert col.k == 20 and col.colors == 3 and max(col.assign) <= 2
    sub = gen_coloring("subsets", 3, 2, seed=1)
    assert len(sub.assign) == 7


def test_formats_round_trip():
    col = gen_coloring("subsets", 3, 2, seed=9)
    assert formats.coloring_from_json(json.loads(formats.dumps(formats.coloring_to_json(col)))) == col
    big = {"kind": "spencer", "m": 1, "p": 1, "H": [1, str(2**60)]}
    w = formats.witness_from_json(big)
    assert formats.witness_to_json(w) == big
