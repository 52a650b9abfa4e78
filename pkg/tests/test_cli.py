import io

import pytest

from optica import bundled
from optica.cli import run


def call(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


DIFF = bundled("differences.query").strip()
EXPERTISE = bundled("expertise.query").strip()


def test_check():
    code, out, _ = call("check", "--schema", "couples", DIFF)
    assert code == 0 and out.strip() == "Couples -> list (String, Int)"


def test_check_dump():
    code, out, _ = call("check", "--schema", "couples", "--dump", "getAll(couples)")
    assert code == 0 and out.splitlines()[1].startswith("GetAll : ") and "couples" in out


def test_eval_example_queries():
    assert call("eval", "--schema", "couples", "--data", "couples", DIFF)[1] == "[(Alex,5),(Cora,2)]\n"
    assert call("eval", "--schema", "org", "--data", "org", EXPERTISE)[1] == "[Quality,Research]\n"


def test_eval_empty_document(tmp_path):
    doc = tmp_path / "empty.xml"
    doc.write_text("<xml></xml>")
    assert call("eval", "--schema", "couples", "--data", str(doc), "getAll(couples)")[1] == "[]\n"


def test_emitters():
    code, out, _ = call("emit-xquery", "--schema", "org", EXPERTISE)
    assert code == 0 and out.startswith("/xml/department[not(exists(")
    code, out, _ = call("emit-sql", "--schema", "couples", "--pk", "Person=name", DIFF)
    assert code == 0 and out.count("INNER JOIN") == 2 and out.rstrip().endswith(";")
    code, out, _ = call("emit-sql", "--schema", "org", "--quote", "single", EXPERTISE)
    assert "'abstract'" in out
    code, out, _ = call("emit-compr", "--schema", "org", "--adapt", "--normalize", EXPERTISE)
    assert code == 0 and out.startswith("for d in Department do if not exists")


def test_exec_sql():
    code, out, _ = call("exec-sql", "--schema", "org", "--data", "org", EXPERTISE)
    assert code == 0 and out == "[Quality,Research]\n"


def test_query_from_stdin(monkeypatch):
    code, out, _ = call("check", "--schema", "org", "-", stdin=EXPERTISE + "\n",
                        monkeypatch=monkeypatch)
    assert code == 0 and out.strip() == "Org -> list String"


def test_type_error_diagnostic():
    code, out, err = call("check", "--schema", "couples", "getAll(couples >>> wives)")
    assert code == 1 and out == ""
    assert "unknown optic 'wives'" in err
    assert "query:1:20" in err and "^^^^^" in err
    code, _, err = call("check", "--schema", "couples", "get(couples)")
    assert code == 1 and "get needs a getter" in err


def test_parse_error_exit_code():
    code, _, err = call("check", "--schema", "couples", "getAll(couples")
    assert code == 1 and err.startswith("error:")


def test_backend_errors():
    code, _, err = call("emit-sql", "--schema", "couples", "getAll(couples)")
    assert code == 2 and "NotFlatPart" in err
    code, _, err = call("emit-sql", "--schema", "couples", "get(like 1)")
    assert code == 2 and "NoRootFold" in err


def test_input_errors(tmp_path):
    code, _, err = call("check", "--schema", str(tmp_path / "missing.schema"), "getAll(x)")
    assert code == 3 and "cannot read" in err
    bad = tmp_path / "bad.schema"
    bad.write_text("nonsense\n")
    assert call("check", "--schema", str(bad), "getAll(x)")[0] == 3
    doc = tmp_path / "bad.xml"
    doc.write_text("<xml><couple>")
    assert call("eval", "--schema", "couples", "--data", str(doc), DIFF)[0] == 3
    assert call("emit-sql", "--schema", "couples", "--pk", "oops", DIFF)[0] == 3


def test_usage_errors():
    with pytest.raises(SystemExit):
        call("eval", "--schema", "couples", DIFF)  # --data is required


def test_output_is_deterministic():
    runs = {call("emit-sql", "--schema", "org", EXPERTISE)[1] for _ in range(3)}
    assert len(runs) == 1
