import pytest

from itl.bisim import BisimFamily, check_family, max_family
from itl.families import builtin_model, canonical_family, diam_model, ht_model
from itl.formula import Fragment, enumerate_formulas, length, parse
from itl.model import eval, truth_mask
from itl.oracle import SearchSpec, random_model

FRAGMENT = {"next": Fragment.L_X, "until": Fragment.L_U, "release": Fragment.L_R}


def agreement_failures(M1, M2, F, depth):
    """Pairs of Z_m that disagree on a fragment formula of length <= m."""
    atoms = sorted(M1.atoms | M2.atoms) or ["p"]
    bad = []
    c1, c2 = {}, {}
    for phi in enumerate_formulas(atoms, FRAGMENT[F.flavor], depth):
        m1, m2 = truth_mask(M1, phi, c1), truth_mask(M2, phi, c2)
        for m in range(length(phi), len(F.levels)):
            for a, b in F.levels[m]:
                if (m1 >> M1.index[a] & 1) != (m2 >> M2.index[b] & 1):
                    bad.append((phi, m, a, b))
    return bad


def random_pair(seed, cls="all"):
    M1 = random_model(SearchSpec(4, {"p"}, cls, seed=seed))
    M2 = random_model(SearchSpec(4, {"p"}, cls, seed=seed + 1000))
    return M1, M2


class TestFamily:
    def test_bad_flavor(self):
        with pytest.raises(ValueError):
            BisimFamily((frozenset(),), "sideways")

    def test_level_of(self):
        F = BisimFamily((frozenset({("a", "b")}), frozenset({("a", "b")}), frozenset()))
        assert F.level_of(("a", "b")) == 1 and F.level_of(("b", "a")) == -1 and F.n == 2


class TestCheck:
    def test_ht3_canonical(self):
        assert check_family(ht_model(3), ht_model(3), canonical_family("ht", 3).family)

    def test_diam3_canonical(self):
        assert check_family(diam_model(3), diam_model(3), canonical_family("diam", 3).family)

    def test_atom_clash(self):
        M = ht_model(1)
        res = check_family(M, M, BisimFamily((frozenset({("1_0", "3_0")}),), "until"))
        assert not res
        assert res.violations[0][0] == "atoms"

    def test_inclusion(self):
        M = ht_model(1)
        F = BisimFamily((frozenset(), frozenset({("1_0", "1_0")})), "next")
        assert any(v[0] == "inclusion" for v in check_family(M, M, F).violations)

    def test_canonical_ht_with_next_flavor(self):
        # the same relations also pass the weaker next-step clauses
        M = ht_model(2)
        levels = canonical_family("ht", 2).levels
        assert check_family(M, M, BisimFamily(levels, "next"))


class TestMaxFamily:
    @pytest.mark.parametrize("flavor", ["next", "until", "release"])
    def test_identity_included(self, flavor):
        M = builtin_model("fig-iltl")
        F = max_family(M, M, 3, flavor)
        for z in F.levels:
            assert {(w, w) for w in M.worlds} <= z

    def test_diam3_pair(self):
        F = max_family(diam_model(3), diam_model(3), 2, "release")
        assert ("1_0", "1_1") in F.levels[2]

    def test_ht3_pair(self):
        F = max_family(ht_model(3), ht_model(3), 3, "until")
        assert ("1_0", "1_1") in F.levels[3]

    @pytest.mark.parametrize("name", ["ht", "diam"])
    def test_contains_canonical(self, name):
        M = builtin_model(name, 3)
        C = canonical_family(name, 3).family
        F = max_family(M, M, C.n, C.flavor)
        assert all(c <= f for c, f in zip(C.levels, F.levels))

    def test_passes_check(self):
        for seed in range(20):
            M1, M2 = random_pair(seed)
            for flavor in ("next", "until", "release"):
                assert check_family(M1, M2, max_family(M1, M2, 3, flavor))

    def test_maximal(self):
        for seed in range(10):
            M1, M2 = random_pair(seed, "persistent")
            for flavor in ("until", "release"):
                F = max_family(M1, M2, 2, flavor)
                for i in range(1, len(F.levels)):
                    for pair in sorted(F.levels[i - 1] - F.levels[i])[:4]:
                        levels = list(F.levels)
                        levels[i] = levels[i] | {pair}
                        assert not check_family(M1, M2, BisimFamily(levels, flavor))

    def test_horizon_robust(self):
        for seed in range(20):
            M1, M2 = random_pair(seed)
            for flavor in ("until", "release"):
                assert max_family(M1, M2, 3, flavor, 1) == max_family(M1, M2, 3, flavor, 2)


class TestAgreement:
    @pytest.mark.parametrize("flavor", ["next", "until", "release"])
    @pytest.mark.parametrize("name,n", [("ht", 2), ("ht", 3), ("diam", 2), ("diam", 3)])
    def test_builtins(self, flavor, name, n):
        M = builtin_model(name, n)
        F = max_family(M, M, 2, flavor)
        assert not agreement_failures(M, M, F, 2)

    def test_random(self):
        for seed in range(50):
            M1, M2 = random_pair(seed)
            for flavor in ("next", "until", "release"):
                F = max_family(M1, M2, 2, flavor)
                assert not agreement_failures(M1, M2, F, 2), (seed, flavor)


class TestUndefinability:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_box_not_until_definable(self, n):
        M = ht_model(n)
        F = max_family(M, M, n, "until")
        assert ("1_0", "1_1") in F.levels[n]
        assert eval(M, "1_0", parse("[]p")) != eval(M, "1_1", parse("[]p"))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_diamond_not_release_definable(self, n):
        M = diam_model(n + 1)
        F = max_family(M, M, n, "release")
        assert ("1_0", "1_1") in F.levels[n]
        assert eval(M, "1_0", parse("<>p")) != eval(M, "1_1", parse("<>p"))
