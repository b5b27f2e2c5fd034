import json

import pytest

from numloop.cli import EXIT_CAPACITY, EXIT_CHECK, EXIT_INPUT, EXIT_OK, main

from .conftest import CORPUS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_text(capsys):
    code, out, _ = run(capsys, "analyze", str(CORPUS / "q_simple.pl"))
    assert code == EXIT_OK and out.startswith("q/1 terminates if: $1 =< 0 \\/ $1 >= 6")


def test_analyze_json_with_constraints(capsys):
    code, out, _ = run(capsys, "analyze", str(CORPUS / "gcdlike.pl"), "--format", "json",
                       "--emit-constraints", "--pretty-strict")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["rounds"] == 2 and doc["systems"]


def test_adorn(capsys):
    code, out, _ = run(capsys, "adorn", str(CORPUS / "overlap.pl"))
    assert code == EXIT_OK and "r{$1 >= 11}" in out


def test_explain(capsys):
    code, out, _ = run(capsys, "explain", str(CORPUS / "gcdlike.pl"))
    assert code == EXIT_OK and "round 2" in out and "attempt 1" in out


def test_check(capsys):
    code, out, _ = run(capsys, "check", str(CORPUS / "q_simple.pl"), "--box=-5..8")
    assert code == EXIT_OK and "0 violations" in out and "0 mismatches" in out


def test_check_reports_violation(tmp_path, capsys):
    # an interarg declaration that lies about the callee makes the condition unsound
    f = tmp_path / "bad.pl"
    f.write_text(':- analyze(p/1).\n:- interarg(d/2, "$2 =< $1 - 1").\n'
                 "p(X) :- X > 0, d(X, Y), p(Y).\nd(X, X).\n")
    code, out, _ = run(capsys, "check", str(f), "--box=-3..3", "--steps", "2000")
    assert code == EXIT_CHECK and "does not terminate" in out


def test_parse_error_location(tmp_path, capsys):
    f = tmp_path / "broken.pl"
    f.write_text("p(X) :- X >.\n")
    code, _, err = run(capsys, "analyze", str(f))
    assert code == EXIT_INPUT and err.startswith(f"{f}:1:")


def test_no_directive(tmp_path, capsys):
    f = tmp_path / "empty.pl"
    f.write_text("p(X) :- X > 0.\n")
    code, out, err = run(capsys, "analyze", "--format", "json", str(f))
    assert code == EXIT_INPUT and out == "" and "analyze" in err


def test_capacity(tmp_path, capsys):
    guards = "\n".join(f"p(X) :- X > {k}, p(X)." for k in range(20))
    f = tmp_path / "many.pl"
    f.write_text(":- analyze(p/1).\n" + guards + "\n")
    code, _, err = run(capsys, "analyze", str(f))
    assert code == EXIT_CAPACITY and "capacity" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "analyze", "/nonexistent.pl")
    assert code == EXIT_INPUT and "error" in err


def test_bad_arguments():
    for extra in (["--box", "3"], ["--query", "P/1"], ["--steps"]):
        with pytest.raises(SystemExit) as e:
            main(["analyze", "x.pl", *extra])
        assert e.value.code == EXIT_INPUT
