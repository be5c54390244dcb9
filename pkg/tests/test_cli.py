import subprocess
import sys

import pytest

from itl.cli import run
from itl.families import builtin_model
from itl.textio import model_from_text, model_to_text


def itl(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fig(tmp_path):
    path = tmp_path / "fig.mdl"
    path.write_text(model_to_text(builtin_model("fig-iltl")))
    return str(path)


def test_check_figure(capsys, fig):
    code, out, _ = itl(capsys, "check", "--model", fig, "--world", "w", "--formula", "(X p -> p) | (p -> X p)")
    assert out == "false\n" and code == 1


def test_check_true(capsys):
    code, out, _ = itl(capsys, "check", "--builtin", "fig-imla", "--world", "w", "--formula", "~X p & ~X ~p")
    assert out == "true\n" and code == 0


def test_check_truth_set_machine(capsys):
    code, out, _ = itl(capsys, "check", "--builtin", "fig-imla", "--formula", "p", "--format", "machine")
    assert out == "truth_set=u\n" and code == 0


def test_bounds(capsys):
    code, out, _ = itl(capsys, "bounds", "--e", "1", "1")
    assert out == "1\n" and code == 0
    code, out, _ = itl(capsys, "bounds", "--q", "2", "3", "--format", "machine")
    assert out == "q=31\n"
    _, out, _ = itl(capsys, "bounds", "--fmp", "1")
    assert out.startswith("(402581742664637254490773 * ")


def test_gen_classify_pipe():
    gen = subprocess.run([sys.executable, "-m", "itl.cli", "gen", "--name", "diam", "--n", "3"],
                         capture_output=True, text=True, check=True)
    res = subprocess.run([sys.executable, "-m", "itl.cli", "classify", "-"], input=gen.stdout,
                         capture_output=True, text=True)
    assert "persistent=true" in res.stdout.splitlines()
    assert "here_and_there=false" in res.stdout.splitlines()
    assert res.returncode == 0


@pytest.mark.parametrize("name,n", [("fig-iltl", None), ("ht", 2), ("diam", 2)])
def test_gen_round_trip(capsys, name, n):
    argv = ["gen", "--name", name] + ([] if n is None else ["--n", str(n)])
    _, out, _ = itl(capsys, *argv)
    assert model_from_text(out) == builtin_model(name, n)


def test_gen_random_deterministic(capsys):
    a = itl(capsys, "gen", "--worlds", "5", "--atoms", "p,q", "--seed", "4")
    b = itl(capsys, "gen", "--worlds", "5", "--atoms", "p,q", "--seed", "4")
    assert a == b


def test_decide_witness_rechecks(capsys, tmp_path):
    code, out, _ = itl(capsys, "decide", "--formula", "(X p -> X q) -> X (p -> q)", "--max-worlds", "3",
                       "--format", "machine")
    assert code == 1
    lines = out.splitlines()
    assert "outcome=witness_found" in lines
    world = next(l.split("=", 1)[1] for l in lines if l.startswith("world="))
    body = "\n".join(lines[lines.index("begin=model") + 1:lines.index("end=model")])
    path = tmp_path / "w.mdl"
    path.write_text(body)
    code, out, _ = itl(capsys, "check", str(path), "--world", world, "--formula", "(X p -> X q) -> X (p -> q)")
    assert (code, out) == (1, "false\n")


def test_decide_holds(capsys):
    code, out, _ = itl(capsys, "decide", "--formula", "(X p -> X q) -> X (p -> q)", "--max-worlds", "3",
                       "--class", "persistent", "--jobs", "2")
    assert code == 0 and "outcome=holds_within_bound" in out


def test_bisim_canonical(capsys):
    code, out, _ = itl(capsys, "bisim", "--canonical", "ht", "--n", "2", "--pair", "1_0,1_1")
    assert code == 0 and "ok=true" in out and "level=2" in out


def test_bisim_family_file(capsys, tmp_path):
    model = tmp_path / "ht.mdl"
    model.write_text(model_to_text(builtin_model("ht", 1)))
    fam = tmp_path / "f.txt"
    fam.write_text("flavor until\nlevel 0: (1_0,3_0)\n")
    code, out, _ = itl(capsys, "bisim", "--model1", str(model), "--model2", str(model), "--family", str(fam))
    assert code == 1 and "violation=atoms" in out


def test_bisim_max(capsys):
    code, out, _ = itl(capsys, "bisim", "--canonical", "diam", "--n", "3", "--max", "2", "--flavor", "release",
                       "--pair", "1_0,1_1")
    assert out == "level=2\n"


def test_translate(capsys):
    _, out, _ = itl(capsys, "translate", "--formula", "[]p", "--to", "DiamR")
    assert out == "F R p\n"
    _, out, _ = itl(capsys, "translate", "--formula", "X (p -> q)", "--to", "next-normal")
    assert out == "X p -> X q\n"


def test_condense(capsys, tmp_path):
    tree = tmp_path / "t.txt"
    tree.write_text("node a\nnode b Xp\nnode c\nnode d Xp\nnode e p\n"
                    "edge a b\nedge a c\nedge c d\nedge c e\n")
    code, out, _ = itl(capsys, "condense", str(tree), "--format", "machine")
    assert code == 0 and "nodes=3" in out.splitlines()


def test_stratify(capsys):
    code, out, _ = itl(capsys, "stratify", "--builtin", "fig-iltl", "--world", "w", "--sigma", "p",
                       "--sigma", "X p", "--horizon", "1", "--rounds", "5")
    lines = out.splitlines()
    assert lines[0] == "row 0: (0,w) (1,x) (2,y)"
    assert lines[1] == "row 1: (0,w) (1,y) (2,w) (3,x) (4,y)"
    assert "invariants=true" in lines and code == 0


def test_line(capsys):
    code, out, _ = itl(capsys, "line", "--world", "r", "--formula", "~~<>[]p -> <>~~[]p")
    assert (code, out) == (1, "false\n")
    _, out, _ = itl(capsys, "line", "--formula", "[]p")
    assert out == "{[0, +inf)}\n"


@pytest.mark.parametrize("argv", [
    ["check", "--builtin", "fig-iltl", "--formula", "p &", "--world", "w"],
    ["check", "--formula", "p"],
    ["check", "--builtin", "fig-iltl", "--world", "zz", "--formula", "p"],
    ["bounds"],
    ["nope"],
    ["line", "--formula", "q"],
])
def test_usage_errors(capsys, argv):
    code, out, err = itl(capsys, *argv)
    assert code == 2 and out == "" and err


def test_deterministic(capsys):
    a = itl(capsys, "stratify", "--builtin", "fig-iltl", "--world", "w", "--sigma", "p", "--emit")
    b = itl(capsys, "stratify", "--builtin", "fig-iltl", "--world", "w", "--sigma", "p", "--emit")
    assert a == b
