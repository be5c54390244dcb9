import pytest

from itl.bisim import BisimFamily
from itl.combinat import LabelledTree
from itl.errors import ModelError, ParseError
from itl.families import BUILTINS, builtin_model, canonical_family
from itl.strat import loop_back, random_stratified
from itl.textio import (
    family_from_text, family_to_text, model_from_text, model_to_text, stratified_from_text,
    stratified_to_text, tree_from_text, tree_to_text,
)


@pytest.mark.parametrize("name,n", [("fig-iltl", None), ("fig-imla", None), ("ht", 3), ("diam", 3)])
def test_model_round_trip(name, n):
    M = builtin_model(name, n)
    text = model_to_text(M)
    assert model_from_text(text) == M
    assert model_to_text(model_from_text(text)) == text


def test_comments_and_blank_lines():
    M = model_from_text("# a model\nworld a p  # first\n\nworld b p\nle a b\nsucc a b\nsucc b b\n")
    assert M.le("a", "b") and M.S("a") == "b" and M.V("a") == {"p"}


@pytest.mark.parametrize("text", [
    "world a\nsucc a\n",
    "world a\nfoo a a\n",
    "world a!\nsucc a! a!\n",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        model_from_text(text)


def test_partial_succ():
    with pytest.raises(ModelError):
        model_from_text("world a\nworld b\nsucc a b\n")


def test_stratified_round_trip():
    for seed in range(10):
        S = random_stratified(seed)
        text = stratified_to_text(S)
        S2 = stratified_from_text(text)
        assert loop_back(S2) == loop_back(S)
        assert model_from_text(text) == loop_back(S)


def test_stratified_rejects_bad_loop():
    text = "world a\nworld b\nstratum 0 a\nstratum 1 b\nsucc a b\nloop 0 5\nmap b a\n"
    with pytest.raises(ModelError):
        stratified_from_text(text)


def test_tree_round_trip():
    T = LabelledTree(["r", "x", "y"], [("r", "x"), ("r", "y")],
                     {"r": frozenset(), "x": frozenset({"p"}), "y": frozenset({"p", "q"})})
    text = tree_to_text(T, "x")
    T2, point = tree_from_text(text)
    assert point == "x"
    assert T2.label == T.label and set(T2.edges) == set(T.edges)


def test_family_round_trip():
    F = canonical_family("ht", 2).family
    F2 = family_from_text(family_to_text(F))
    assert F2 == F


def test_family_errors():
    with pytest.raises(ParseError):
        family_from_text("level 0: (a,b)\nlevel 2: (a,b)\n")
    with pytest.raises(ParseError):
        family_from_text("level 0: (a,b) junk\n")
    assert family_from_text("level 0: (a,b)\n", "until") == BisimFamily((frozenset({("a", "b")}),), "until")
