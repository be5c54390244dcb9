"""The E/Q recurrences and the finite-model bound, exact where feasible.

``E(n, 0) = Q(n, 0) = 0``, ``E(n, k) = E(n, k-1) + n * 2**E(n, k-1)`` and
``Q(n, k) = 1 + E(n, k-1) * Q(n, k-1)``.  Values whose bit length would
pass ``cap_bits`` are returned as symbolic expressions instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

DEFAULT_CAP_BITS = 2 ** 20
_LOG10_2 = math.log10(2)


class Symbolic:
    """Marker base: a natural number too large to materialize."""

    def digits(self):
        """Estimated decimal digit count (an int), or None if not representable."""
        raise NotImplementedError

    def towers(self):
        return []

    # every symbolic value exceeds 2**cap_bits, so it dominates any int we hold
    def __gt__(self, other):
        return isinstance(other, int)

    def __ge__(self, other):
        return isinstance(other, int)

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return False

    def __str__(self):
        return self.render()


def _fmt(x):
    return x.render() if isinstance(x, Symbolic) else str(x)


def _digits(x):
    if isinstance(x, Symbolic):
        return x.digits()
    return len(str(x)) if x.bit_length() < 4000 else int(x.bit_length() * _LOG10_2) + 1


@dataclass(frozen=True, eq=False)
class Tower(Symbolic):
    """E(n, k) or Q(n, k) past the cap; ``exact`` holds E(n, 0..j)."""

    kind: str  # "E" or "Q"
    n: int
    k: int
    exact: tuple

    @property
    def exact_levels(self) -> tuple:
        return self.exact

    def digits(self):
        j = len(self.exact) - 1
        if self.kind == "E" and self.k == j + 1:
            # E(n, j+1) ~ n * 2**E(n, j)
            return int(self.exact[j] * _LOG10_2 + math.log10(max(self.n, 1))) + 1
        return None

    def towers(self):
        return [self]

    def render(self):
        shown = ", ".join(_short(v) for v in self.exact)
        return f"tower({self.kind}, n={self.n}, k={self.k}, exact=[{shown}])"


def _short(v: int) -> str:
    if v.bit_length() <= 128:
        return str(v)
    return f"~2^{v.bit_length() - 1}"


@dataclass(frozen=True, eq=False)
class SymExpr(Symbolic):
    op: str  # "+" or "*"
    args: tuple

    def digits(self):
        ds = [_digits(a) for a in self.args]
        if any(d is None for d in ds):
            return None
        return max(ds) + 1 if self.op == "+" else sum(ds)

    def towers(self):
        out = []
        for a in self.args:
            if isinstance(a, Symbolic):
                out += a.towers()
        return out

    def render(self):
        return "(" + f" {self.op} ".join(_fmt(a) for a in self.args) + ")"


def _bits(x):
    return None if isinstance(x, Symbolic) else x.bit_length()


def add(x, y, cap_bits=DEFAULT_CAP_BITS):
    if isinstance(x, int) and isinstance(y, int) and max(x.bit_length(), y.bit_length()) + 1 <= cap_bits:
        return x + y
    return SymExpr("+", (x, y))


def mul(x, y, cap_bits=DEFAULT_CAP_BITS):
    if isinstance(x, int) and isinstance(y, int) and x.bit_length() + y.bit_length() <= cap_bits:
        return x * y
    return SymExpr("*", (x, y))


@lru_cache(maxsize=None)
def e_levels(n: int, k: int, cap_bits: int = DEFAULT_CAP_BITS) -> tuple:
    """Exact E(n, 0..j) for the largest j <= k that fits under the cap."""
    levels = [0]
    while len(levels) <= k:
        prev = levels[-1]
        if prev + max(n, 1).bit_length() > cap_bits:
            break
        levels.append(prev + n * 2 ** prev)
    return tuple(levels)


def e_number(n: int, k: int, cap_bits: int = DEFAULT_CAP_BITS):
    if n < 0 or k < 0:
        raise ValueError("e_number needs natural arguments")
    levels = e_levels(n, k, cap_bits)
    if len(levels) > k:
        return levels[k]
    return Tower("E", n, k, levels)


def q_number(n: int, k: int, cap_bits: int = DEFAULT_CAP_BITS):
    if n < 0 or k < 0:
        raise ValueError("q_number needs natural arguments")
    q = 0
    for j in range(1, k + 1):
        e = e_number(n, j - 1, cap_bits)
        if isinstance(e, Symbolic) or isinstance(q, Symbolic):
            return Tower("Q", n, k, e_levels(n, k, cap_bits))
        nxt = mul(e, q, cap_bits)
        if isinstance(nxt, Symbolic):
            return Tower("Q", n, k, e_levels(n, k, cap_bits))
        q = 1 + nxt
    return q


def fmp_bound(s: int, cap_bits: int = DEFAULT_CAP_BITS):
    """Size bound for the loop-back model built from a good model, |Sigma| = s."""
    if s < 0:
        raise ValueError("fmp_bound needs a natural argument")
    big, small = 2 ** (s + 1), 2 ** s
    q_big = q_number(big, s + 3, cap_bits)
    e_small = e_number(small, s + 1, cap_bits)
    q_small = q_number(small, s + 1, cap_bits)
    e_big = e_number(big, s + 3, cap_bits)
    inner = add(mul(2, e_small, cap_bits), mul(mul(s, q_small, cap_bits), e_big, cap_bits), cap_bits)
    return mul(q_big, inner, cap_bits)


def good_length_bound(n: int, cap_bits: int = DEFAULT_CAP_BITS):
    """Upper limit on b in the first clause of a good model, read with n = |Sigma|."""
    big, small = 2 ** (n + 1), 2 ** n
    return add(mul(2, e_number(big, n + 1, cap_bits), cap_bits),
               mul(q_number(small, n + 1, cap_bits), e_number(big, n + 3, cap_bits), cap_bits), cap_bits)


def le(x, y) -> bool:
    """x <= y where either side may be symbolic (symbolic beats any int)."""
    if isinstance(x, int) and isinstance(y, int):
        return x <= y
    if isinstance(x, int):
        return True
    if isinstance(y, int):
        return False
    raise ValueError("cannot compare two symbolic values")


def render(x) -> str:
    return _fmt(x)
