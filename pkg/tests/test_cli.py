import json

import pytest

from hoarefl.cli import main
from conftest import CORPUS


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_roundtrip_loop(capsys):
    code, out, _ = run(capsys, "roundtrip", CORPUS / "loop1.hl")
    assert code == 0 and "round trip ok" in out


def test_roundtrip_with_theory(capsys):
    code, _, _ = run(capsys, "roundtrip", CORPUS / "monoid_loop.hl", "--theory", CORPUS / "monoid.fol", "--depth", 8)
    assert code == 0


def test_eval_two_cycle(capsys):
    code, out, _ = run(capsys, "eval", "--structure", CORPUS / "two_cycle.json", "--pca", CORPUS / "loop1.pca")
    assert (code, out.strip()) == (0, "true")
    code, out, _ = run(capsys, "eval", "--structure", CORPUS / "two_cycle.json", "--formula", "f(c) = c")
    assert (code, out.strip()) == (1, "false")


def test_unproven_message(capsys):
    code, out, _ = run(capsys, "prove", "⊢ P(c)", "--depth", 8)
    assert code == 1 and out.strip() == "unproven(8)"


def test_prove_json(capsys):
    code, out, _ = run(capsys, "--json", "prove", "P(c) |- P(c)")
    doc = json.loads(out)
    assert code == 0 and doc["ok"] is True and doc["derivation"]["rule"] == "axiom"
    assert set(doc) == {"command", "ok", "verdict", "derivation"}


def test_compile_extract_check(capsys, tmp_path):
    flp, hl = tmp_path / "nested.flp", tmp_path / "nested.hl"
    assert run(capsys, "compile", CORPUS / "nested.hl", "-o", flp)[0] == 0
    assert run(capsys, "check-flp", flp)[0] == 0
    assert run(capsys, "check-flp", flp, "--intuitionistic")[0] == 0
    assert run(capsys, "check-flp", flp, "--logic", "fl")[0] == 1
    assert run(capsys, "extract", flp, "--pca", CORPUS / "nested.pca", "-o", hl, "--depth", 8)[0] == 0
    code, out, _ = run(capsys, "--json", "check-hoare", hl)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "accepted"
    assert doc["conclusion"] == (CORPUS / "nested.pca").read_text().strip()


def test_check_hoare_rejects_without_theory(capsys):
    code, out, _ = run(capsys, "check-hoare", CORPUS / "monoid_loop.hl")
    assert code == 1 and out.startswith("rejected")


def test_translate(capsys):
    code, out, _ = run(capsys, "translate", CORPUS / "assign.pca", "--emit", "m")
    assert (code, out.strip()) == (0, "y1 = f(x)")
    code, out, _ = run(capsys, "translate", CORPUS / "assign.pca")
    assert out.strip() == "forall x, v1. f(x) = c & v1 = f(x) -> v1 = c"


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["prove", "|- ("],
    ["check-hoare", "missing.hl"],
    ["eval", "--structure", str(CORPUS / "two_cycle.json")],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_json_verdicts_match_exit_codes(capsys):
    for argv in (["check-hoare", CORPUS / "assign.hl"], ["check-hoare", CORPUS / "monoid_loop.hl"],
                 ["prove", "|- P(c)", "--depth", 2]):
        code, out, _ = run(capsys, "--json", *argv)
        assert json.loads(out)["ok"] == (code == 0)
