import hashlib
import json
import subprocess
import sys

import pytest

from spectra.cli import main
from spectra.semantics import parse_graph, parse_structure

PHI = "vocab R1 R2 R3\nexists x. exists y. (~x = y & forall z. (z = x | z = y))\n"
STRUCT = "structure 2\nR1: (1,2)\nR2:\nR3: (2,1)\n"


@pytest.fixture
def files(tmp_path):
    (tmp_path / "phi.fo").write_text(PHI)
    (tmp_path / "a.st").write_text(STRUCT)
    (tmp_path / "one.st").write_text("structure 1\nR1:\nR2:\nR3:\n")
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_reduce_is_byte_stable(files, capsys):
    out1, out2, rep = files / "p1.fo", files / "p2.fo", files / "rep.json"
    assert run("reduce", "--in", files / "phi.fo", "--out", out1, "--report", rep) == 0
    assert run("reduce", "--in", files / "phi.fo", "--out", out2) == 0
    digest = lambda p: hashlib.md5(p.read_bytes()).hexdigest()  # noqa: E731
    assert digest(out1) == digest(out2)
    assert out1.read_text().startswith("vocab E\n")
    report = json.loads(rep.read_text())
    assert (report["m"], report["p"], report["q"]) == (3, 6, 26)


def test_encode_check_decode(files, capsys):
    g = files / "g.graph"
    assert run("encode", "--structure", files / "a.st", "--m", 3, "--out", g) == 0
    assert parse_graph(g.read_text()).size == 6 * 2 + 26
    assert run("reduce", "--in", files / "phi.fo", "--out", files / "p.fo") == 0
    capsys.readouterr()
    assert run("check", "--formula", files / "p.fo", "--graph", g) == 0
    assert capsys.readouterr().out == "true\n"
    back = files / "back.st"
    assert run("decode", "--graph", g, "--relations", "R1,R2,R3", "--out", back) == 0
    assert parse_structure(back.read_text()) == parse_structure(STRUCT)


def test_check_negative_answer(files, capsys):
    g = files / "g1.graph"
    assert run("encode", "--structure", files / "one.st", "--formula", files / "phi.fo", "--out", g) == 0
    assert run("reduce", "--in", files / "phi.fo", "--out", files / "p.fo") == 0
    capsys.readouterr()
    assert run("check", "--formula", files / "p.fo", "--graph", g) == 1
    assert capsys.readouterr().out == "false\n"
    assert run("check", "--formula", files / "phi.fo", "--structure", files / "one.st") == 1


def test_encode_dot(files, capsys):
    assert run("encode", "--structure", files / "one.st", "--m", 3, "--format", "dot") == 0
    assert capsys.readouterr().out.startswith("graph ")


def test_spectrum_command(files, capsys):
    assert run("spectrum", "--formula", files / "phi.fo", "--max", 3) == 0
    assert capsys.readouterr().out == "spectrum: {2}\n"
    assert run("spectrum", "--formula", files / "phi.fo", "--max", 2, "--json") == 0
    assert json.loads(capsys.readouterr().out)["members"] == [2]
    assert run("spectrum", "--formula", files / "phi.fo", "--max", 1) == 1
    assert run("spectrum", "--formula", files / "phi.fo", "--max", 3, "--method", "brute-force") == 2
    assert "brute-force limit" in capsys.readouterr().err


def test_spectrum_on_graphs(files, capsys):
    (files / "edge.fo").write_text("vocab E\nexists x. exists y. E(x,y)\n")
    assert run("spectrum", "--formula", files / "edge.fo", "--max", 4, "--graphs") == 0
    assert capsys.readouterr().out == "spectrum: {2, 3, 4}\n"


def test_ground_command(files, capsys):
    cnf, sidecar = files / "out.cnf", files / "out.map"
    assert run("ground", "--formula", files / "phi.fo", "--size", 2, "--out", cnf, "--map", sidecar) == 0
    assert cnf.read_text().startswith("p cnf ")
    assert sidecar.read_text().splitlines()[0] == "v1 = R1(1,1)"
    assert "clauses" in capsys.readouterr().err


def test_gadget_command(files, capsys):
    assert run("gadget", "--which", "C", "--m", 3, "--format", "dot") == 0
    dot = capsys.readouterr().out
    assert dot.count(" -- ") == 25 and dot.count("label=") == 26
    assert run("gadget", "--which", "D", "--m", 5) == 0
    assert parse_graph(capsys.readouterr().out).size == 8
    assert run("gadget", "--which", "C", "--m", 0) == 2


def test_verify_command(files, capsys):
    rep = files / "verify.json"
    code = run("verify", "--formula", files / "phi.fo", "--n-max", 2, "--samples", 1,
               "--mutations", 10, "--json", rep)
    out = capsys.readouterr().out
    assert code == 0
    for tag in ("(a)", "(b)", "(c)", "(d)", "(e)"):
        assert tag in out
    assert out.rstrip().endswith("ok")
    assert json.loads(rep.read_text())["ok"] is True


def test_roundtrip_command(files, capsys):
    assert run("roundtrip", "--structure", files / "a.st", "--m", 3) == 0
    assert capsys.readouterr().out == "equal\n"


@pytest.mark.parametrize(
    "argv, message",
    [
        (["check", "--formula", "missing.fo", "--structure", "x.st"], "file not found"),
        (["encode", "--structure", "{a}", "--relations", "R1,R2", "--out", "/nonexistent/dir/g"], "output directory"),
        (["decode", "--graph", "{g}"], "relation order"),
    ],
)
def test_errors_exit_2(files, capsys, argv, message):
    (files / "g.graph").write_text("graph 2\nedges: 1-2\n")
    argv = [a.format(a=files / "a.st", g=files / "g.graph") for a in argv]
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith(f"spectra {argv[0]}: error:") and message in err


def test_two_variable_sentence_is_rejected(files, capsys):
    (files / "two.fo").write_text("vocab R1\nforall x. exists y. R1(x,y)\n")
    assert run("reduce", "--in", files / "two.fo") == 2
    assert "error" in capsys.readouterr().err


def test_decode_rejects_non_encoding(files, capsys):
    (files / "bad.graph").write_text("graph 3\nedges: 1-2 2-3\n")
    assert run("decode", "--graph", files / "bad.graph", "--m", 3) == 2


def test_console_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "spectra.cli", "roundtrip", "--structure", str(files / "a.st"), "--m", "3"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "equal\n"
