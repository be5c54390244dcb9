import math

import pytest

from itl.bounds import (
    SymExpr, Symbolic, Tower, e_levels, e_number, fmp_bound, good_length_bound, le, q_number, render,
)


def e_ref(n, k):
    x = 0
    for _ in range(k):
        x = x + n * 2 ** x
    return x


def q_ref(n, k):
    x = 0
    for j in range(1, k + 1):
        x = 1 + e_ref(n, j - 1) * x
    return x


class TestExact:
    @pytest.mark.parametrize("n", range(6))
    def test_zero(self, n):
        assert e_number(n, 0) == 0 and q_number(n, 0) == 0

    def test_one_step(self):
        assert e_number(1, 1) == 1
        assert all(q_number(n, 1) == 1 for n in range(6))

    def test_e_4_3(self):
        assert e_number(4, 3) == 68 + 4 * 2 ** 68

    def test_q_2_3(self):
        # Q1 = 1, Q2 = 1 + 2*1, Q3 = 1 + 10*3
        assert q_number(2, 3) == 31

    def test_q_4_levels(self):
        assert [q_number(4, k) for k in range(4)] == [0, 1, 5, 341]

    @pytest.mark.parametrize("n,k", [(n, k) for n in range(4) for k in range(4)])
    def test_against_reference(self, n, k):
        assert e_number(n, k) == e_ref(n, k)
        assert q_number(n, k) == q_ref(n, k)

    def test_fmp_zero(self):
        assert fmp_bound(0) == 62

    def test_negative(self):
        with pytest.raises(ValueError):
            e_number(-1, 2)


class TestSymbolic:
    def test_fmp_one_is_symbolic(self):
        b = fmp_bound(1)
        assert isinstance(b, Symbolic)
        towers = b.towers()
        assert towers
        assert towers[0].exact_levels[:4] == (0, 4, 68, 68 + 4 * 2 ** 68)

    def test_fmp_one_render(self):
        assert render(fmp_bound(1)) == (
            "(402581742664637254490773 * (20 + (3 * tower(E, n=4, k=4, "
            "exact=[0, 4, 68, 1180591620717411303492]))))")

    def test_good_length_one(self):
        g = good_length_bound(1)
        assert isinstance(g, SymExpr)
        assert render(g) == f"({2 * e_ref(4, 2)} + (3 * tower(E, n=4, k=4, exact=[0, 4, 68, 1180591620717411303492])))"

    def test_tower_digits(self):
        t = e_number(4, 4)
        assert isinstance(t, Tower)
        # E(4, 4) = E3 + 4 * 2**E3 has about E3 * log10(2) digits
        expected = (68 + 4 * 2 ** 68) * math.log10(2)
        assert abs(t.digits() - expected) < expected * 1e-9

    def test_small_cap(self):
        assert isinstance(e_number(2, 3, cap_bits=8), Tower)
        assert e_levels(2, 3, 8) == (0, 2, 10)

    def test_ordering(self):
        t = e_number(4, 4)
        assert t > 10 ** 100 and not t < 5
        assert le(3, t) and not le(t, 3) and le(2, 5)
        with pytest.raises(ValueError):
            le(t, t)
