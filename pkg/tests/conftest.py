import pytest
from hypothesis import strategies as st

from itl.formula import (
    BOTTOM, And, Atom, Box, Diam, Imp, Neg, Next, Or, Release, Until, parse,
)

CORPUS_TEXT = [
    "p", "F", "T", "~p", "X p", "<>p", "[]p", "p U q", "p R q",
    "p -> q", "p | ~p", "~~p -> p", "X (p -> q)", "X p -> X q",
    "(X p -> p) | (p -> X p)", "~X p & ~X ~p", "[]<>p", "<>[]p",
    "~~<>[]p -> <>~~[]p", "p U (q & X p)", "(p R q) | <>~q", "[](p -> X p)",
    "~(p U q)", "X X p -> <>p", "q R (p | X q)", "<>(p & ~q)", "[]~p -> X ~p",
    "(p -> q) U ~p", "~[]p", "X <>q & [] X p",
]
CORPUS = [parse(t) for t in CORPUS_TEXT]

# next-step distribution laws, then until/release laws, at phi = p, psi = q
NEXT_LAWS = [
    "X F <-> F",
    "X (p & q) <-> (X p & X q)",
    "X (p | q) <-> (X p | X q)",
    "X (p -> q) -> (X p -> X q)",
    "X []p <-> [] X p",
    "X <>p <-> <> X p",
]
UNTIL_LAWS = [
    "(p U q) <-> q | (p & X (p U q))",
    "(p R q) <-> q & (p | X (p R q))",
    "(p U q) -> <>q",
    "[]q -> (p R q)",
    "<>p <-> (T U p)",
    "[]p <-> (F R p)",
    "X (p U q) <-> (X p U X q)",
    "X (p R q) <-> (X p R X q)",
    "(p U q) <-> (q R (p | q)) & <>q",
    "(p R q) <-> (q U (p & q)) | []q",
]
SCHEMATA = [parse(t) for t in NEXT_LAWS + UNTIL_LAWS]

ATOMS = st.sampled_from([Atom("p"), Atom("q")])


def formulas(max_leaves=6, temporal=True):
    unary = [Neg, Next] + ([Diam, Box] if temporal else [])
    binary = [And, Or, Imp] + ([Until, Release] if temporal else [])
    leaves = st.one_of(ATOMS, st.just(BOTTOM))
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.builds(lambda c, f: c(f), st.sampled_from(unary), kids),
            st.builds(lambda c, a, b: c(a, b), st.sampled_from(binary), kids, kids),
        ),
        max_leaves=max_leaves,
    )


# ---------------------------------------------------------------- acceptance summary

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    prev = _RESULTS.get(num, (title, True))
    _RESULTS[num] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        title, ok = _RESULTS[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {num:2d} {title}")
