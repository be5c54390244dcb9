import pytest

from itl.errors import ITLError, ModelError
from itl.families import diam_model, fig_iltl, ht_model
from itl.formula import Atom, Box, Next, closure, parse
from itl.model import Model, eval, validate
from itl.oracle import SearchSpec, random_model
from itl.strat import (
    Eventuality, StratifiedModel, Stratum, check_fulfillment, check_state, check_strata,
    check_stratified, copy_map, fulfillment, is_good, loop_back, random_stratified, sigma_labels,
    stratify_bounded, su_collapse, su_normalize, unroll,
)

p = Atom("p")
FIG_SIGMA = closure(parse("(X p -> p) | (p -> X p)"))
CORPUS = [parse(t) for t in ["[](p -> X q) | (p U q)", "X p -> [] q", "~(p U X q)",
                             "[]~p -> X X p", "(q U ~p) & X X X q"]]


def two_cycle(val0=(), val1=()):
    return StratifiedModel([Stratum(("a",)), Stratum(("b",))], {"a": "b"},
                           {"a": val0, "b": val1}, (0, {"b": "a"}))


class TestModelShape:
    def test_rejects_shared_node(self):
        with pytest.raises(ModelError):
            StratifiedModel([Stratum(("a",)), Stratum(("a",))], {"a": "a"}, {})

    def test_rejects_non_monotone_step(self):
        with pytest.raises(ModelError):
            StratifiedModel([Stratum(("a", "b"), (("a", "b"),)), Stratum(("c", "d"), (("c", "d"),))],
                            {"a": "d", "b": "c"}, {})

    def test_loop_back_cycle(self):
        M = loop_back(two_cycle())
        assert M.n == 2 and M.S("a") == "b" and M.S("b") == "a"

    def test_loop_back_valid(self):
        for seed in range(30):
            assert validate(loop_back(random_stratified(seed))).ok


class TestCheckStratified:
    def test_fig_iltl_not_stratified(self):
        rep = check_stratified(fig_iltl())
        assert not rep and "itself" in rep.reason

    def test_two_strata_expanding(self):
        M = Model(["a", "b", "c", "d"], [("a", "b"), ("c", "d")],
                  {"a": "c", "b": "d", "c": "a", "d": "b"})
        rep = check_stratified(M)
        assert rep.stratified and rep.expanding
        assert rep.model.N == 2 and rep.model.loop[0] == 0

    def test_collapsing_step_not_expanding(self):
        M = Model(["a", "b1", "b2", "c", "d"], [("a", "b1"), ("a", "b2"), ("c", "d")],
                  {"a": "c", "b1": "d", "b2": "d", "c": "a", "d": "b1"})
        rep = check_stratified(M)
        assert rep.stratified and not rep.expanding

    def test_stratifier_output_expanding(self):
        S, _ = stratify_bounded(fig_iltl(), "w", FIG_SIGMA, 10, 2)
        assert check_strata(S).expanding


class TestStratifier:
    def test_figure(self):
        S, st = stratify_bounded(fig_iltl(), "w", FIG_SIGMA, 20, 2)
        assert st.images(0) == [(0, "w"), (1, "x"), (2, "y")]
        assert st.images(1) == [(0, "w"), (1, "y"), (2, "w"), (3, "x"), (4, "y")]
        assert ((2, 1), (3, 1)) in st.edges and ((2, 1), (4, 1)) in st.edges
        assert len(S.strata[0].nodes) == 3 and len(S.strata[1].nodes) == 5
        assert check_state(st, fig_iltl())

    def test_spine_only(self):
        M = fig_iltl()
        _, st = stratify_bounded(M, "x", FIG_SIGMA, 0, 4)
        assert st.points == {(0, y) for y in range(5)}
        assert [st.h[(0, y)] for y in range(5)] == ["x", "y", "w", "w", "w"]
        assert not st.complete

    def test_valuation_follows_h(self):
        M = fig_iltl()
        S, st = stratify_bounded(M, "w", FIG_SIGMA, 20, 3)
        for (x, y), w in st.h.items():
            assert S.valuation[f"{x}_{y}"] == M.V(w)

    def test_random_runs(self):
        for seed in range(50):
            M = random_model(SearchSpec(5, {"p", "q"}, seed=seed))
            sig = closure(CORPUS[seed % len(CORPUS)])
            w = M.worlds[seed % M.n]
            rounds, horizon = seed % 21, seed % 7
            for strategy in ("saturate", "diagonal"):
                _, st = stratify_bounded(M, w, sig, rounds, horizon, strategy)
                chk = check_state(st, M)
                assert chk, (seed, strategy, chk.violations[:3])

    def test_bad_arguments(self):
        with pytest.raises(ITLError):
            stratify_bounded(fig_iltl(), "w", FIG_SIGMA, 1, -1)
        with pytest.raises(ValueError):
            stratify_bounded(fig_iltl(), "w", FIG_SIGMA, 1, 1, "other")


class TestFulfillment:
    def test_diam_box_immediate(self):
        ev = fulfillment(diam_model(3), "1_0", Box(p))
        assert ev.fulfillment == ["1_0"] and ev.time == 0

    def test_ht_box(self):
        ev = fulfillment(ht_model(1), "1_0", Box(p))
        assert ev.fulfillment == ["1_0", "2_0", "3_0"] and ev.time == 2

    def test_until(self):
        M = fig_iltl()
        ev = fulfillment(M, "x", parse("T U p"))
        assert ev.fulfillment == ["x", "y"] and ev.time == 1
        assert check_fulfillment(M, ev)

    def test_not_an_eventuality(self):
        assert fulfillment(fig_iltl(), "y", parse("F U p")) is not None
        assert fulfillment(fig_iltl(), "w", parse("F U p")) is None
        with pytest.raises(ITLError):
            fulfillment(fig_iltl(), "w", p)

    def test_tampered(self):
        M = fig_iltl()
        ev = fulfillment(M, "x", parse("T U p"))
        assert not check_fulfillment(M, Eventuality("x", ev.formula, ["x"], 0))

    def test_random_well_formed(self):
        for seed in range(40):
            M = random_model(SearchSpec(5, {"p", "q"}, seed=seed))
            for phi in closure(*CORPUS):
                if isinstance(phi, Box) or type(phi).__name__ == "Until":
                    for w in M.worlds:
                        ev = fulfillment(M, w, phi)
                        if ev is not None:
                            assert check_fulfillment(M, ev)


class TestSpeedups:
    def chain_model(self):
        strata = [Stratum(("a0", "a1"), (("a0", "a1"),)), Stratum(("b",))]
        return StratifiedModel(strata, {"a0": "b", "a1": "b"}, {}, (1, {"b": "b"}))

    def test_normalize_constant_chain(self):
        S = self.chain_model()
        sig = [p, Next(p)]
        sp = su_normalize(S, 0, sig)
        assert len(sp.model.strata[0].nodes) == 1
        lab, lab2 = sigma_labels(S, sig), sigma_labels(sp.model, sig)
        assert all(lab2[w] == lab[sp.pi[w]] for w in sp.model.nodes)

    def test_normalize_idempotent(self):
        S = self.chain_model()
        once = su_normalize(S, 0, [p]).model
        twice = su_normalize(once, 0, [p]).model
        assert len(twice.strata[0].nodes) == len(once.strata[0].nodes)
        assert len(twice.strata[0].edges) == len(once.strata[0].edges)

    def test_normalize_pointed(self):
        S = random_stratified(5, strata=4, max_nodes=4, loop_start=2)
        sig = closure(CORPUS[0])
        w = S.strata[0].nodes[-1]
        sp = su_normalize(S, 0, sig, point=w)
        assert sp.point in sp.model.nodes
        assert sigma_labels(sp.model, sig)[sp.point] == sigma_labels(S, sig)[w]

    def test_normalize_on_loop_needs_flag(self):
        with pytest.raises(ITLError):
            su_normalize(self.chain_model(), 1, [p])

    def test_collapse_identical_strata(self):
        S = random_stratified(11, strata=3, max_nodes=3, loop_start=1)
        U = unroll(S, 2)
        sig = closure(CORPUS[1])
        sp = su_collapse(U, 1, 1 + (S.N - 1), copy_map(S, 1, 1), sig)
        assert sp.model.N == U.N - (S.N - 1)
        lab, lab2 = sigma_labels(U, sig), sigma_labels(sp.model, sig)
        assert all(lab2[w] == lab[sp.pi[w]] for w in sp.model.nodes)

    def test_collapse_repeated_period(self):
        base = two_cycle(("p",), ())
        U = unroll(base, 2)
        sig = closure(parse("[]<>p & X ~p"))
        sp = su_collapse(U, 0, 2, copy_map(base, 0, 1), sig)
        assert sp.model.N == U.N - 2
        before, after = sigma_labels(U, sig), sigma_labels(sp.model, sig)
        assert after["a"] == before["a"]

    def test_collapse_shortens_fulfillment(self):
        # a -> b -> c -> d with p only at d; sending a straight on from c
        S = StratifiedModel([Stratum(("a",)), Stratum(("b",)), Stratum(("c",)), Stratum(("d",))],
                            {"a": "b", "b": "c", "c": "d"}, {"d": ("p",)}, (3, {"d": "d"}))
        sig = closure(parse("T U p"))
        M = loop_back(S)
        assert fulfillment(M, "a", parse("T U p")).fulfillment == ["a", "b", "c", "d"]
        sp = su_collapse(S, 0, 2, {"a": "c"}, sig, point=("a", "c"))
        M2 = loop_back(sp.model)
        assert fulfillment(M2, "a", parse("T U p")).fulfillment == ["a", "d"]

    def test_collapse_guards(self):
        S = random_stratified(3, strata=4, loop_start=1)
        with pytest.raises(ITLError):
            su_collapse(S, 0, 2, {}, [p])
        with pytest.raises(ITLError):
            su_collapse(S, 1, 2, {}, [p])

    def test_collapse_rejects_non_immersion(self):
        S = StratifiedModel([Stratum(("a",)), Stratum(("b",)), Stratum(("c",))],
                            {"a": "b", "b": "c"}, {"a": ("p",)}, (2, {"c": "c"}))
        with pytest.raises(ITLError):
            su_collapse(S, 0, 1, {"a": "b"}, [p])


class TestUnroll:
    def test_zero(self):
        S = random_stratified(1)
        assert loop_back(unroll(S, 0)) == loop_back(S)

    def test_labels_invariant(self):
        for seed in range(20):
            S = random_stratified(seed)
            sig = closure(CORPUS[seed % len(CORPUS)])
            lab = sigma_labels(S, sig)
            for j in (1, 2, 3):
                U = unroll(S, j)
                assert U.N == S.N + j * (S.N - S.loop[0])
                lab2 = sigma_labels(U, sig)
                assert all(lab2[w] == lab[w] for w in S.strata[0].nodes)


class TestGood:
    def singletons(self, second=("p",)):
        return StratifiedModel([Stratum(("a",)), Stratum(("b",)), Stratum(("c",))],
                               {"a": "b", "b": "c"}, {"a": ("p",), "b": second, "c": ("p",)},
                               (1, {"c": "b"}))

    def test_good(self):
        rep = is_good(self.singletons(), 0, 1, closure(Box(p)))
        assert rep.ok and all(rep.clauses.values())

    def test_label_clash(self):
        rep = is_good(self.singletons(()), 0, 1, closure(p))
        assert not rep.ok and not rep.clauses["bimersive"]

    def test_stratum_too_large(self):
        # with an empty label set each stratum may hold at most Q(2, 3) = 31 nodes
        names = tuple(f"n{i}" for i in range(32))
        big = Stratum(names, tuple(("n0", v) for v in names[1:]))
        S = StratifiedModel([big, Stratum(("x",)), Stratum(("y",))],
                            {**{v: "x" for v in names}, "x": "y"}, {}, (1, {"y": "x"}))
        rep = is_good(S, 1, 2, [])
        assert not rep.clauses["size"]
        assert "Sigma" in rep.note

    def test_range(self):
        with pytest.raises(ITLError):
            is_good(self.singletons(), 0, 3, [p])
