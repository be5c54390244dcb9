"""Builtin models, the last-exponent function, blocks and canonical families.

Worlds of the two parametrised families are pairs (i, j); their string
ids are ``"i_j"`` (see :func:`pt`).  Cyclic indices use representatives
``1..k`` as in ``[i]_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bisim import BisimFamily
from .errors import BudgetExceeded, ITLError, guard_limit
from .formula import And, Atom, Box, Formula, Imp, Neg, Next, Or
from .model import Model

DIAM_GUARD = 12


def pt(i: int, j: int) -> str:
    return f"{i}_{j}"


def unpt(w: str) -> tuple[int, int]:
    i, j = w.split("_")
    return int(i), int(j)


def cyc(i: int, k: int) -> int:
    """Representative of i modulo k in 1..k."""
    return (i - 1) % k + 1


def last_exponent(m: int) -> int:
    if m < 1:
        raise ValueError("last_exponent needs a positive integer")
    return (m & -m).bit_length() - 1


# ---------------------------------------------------------------- models


def fig_iltl() -> Model:
    return Model(["w", "x", "y"], le=[("w", "x"), ("w", "y")],
                 succ={"w": "w", "x": "y", "y": "w"}, valuation={"y": ["p"]})


def fig_imla() -> Model:
    return Model(["w", "v", "u"], le=[("v", "u")],
                 succ={"w": "v", "v": "v", "u": "u"}, valuation={"u": ["p"]})


def ht_model(n: int) -> Model:
    if n is None or n < 1:
        raise ITLError("ht needs n >= 1")
    k = n + 2
    worlds = [pt(i, j) for i in range(1, k + 1) for j in (0, 1)]
    le = [(pt(i, 0), pt(i, 1)) for i in range(1, k + 1)]
    succ = {pt(i, j): pt(cyc(i + 1, k), j) for i in range(1, k + 1) for j in (0, 1)}
    val = {w: ["p"] for w in worlds if w != pt(k, 0)}
    return Model(worlds, le, succ, val)


def diam_model(n: int) -> Model:
    if n is None or n < 0:
        raise ITLError("diam needs n >= 0")
    limit = guard_limit(DIAM_GUARD)
    if limit is not None and n > limit:
        raise BudgetExceeded(f"diam({n}) has {2 ** n * (n + 1)} worlds; guard is n <= {limit}")
    k = 2 ** n
    worlds = [pt(i, j) for i in range(1, k + 1) for j in range(n + 1)]
    le = [(pt(i, j), pt(i, j + 1)) for i in range(1, k + 1) for j in range(n)]
    succ = {pt(i, j): pt(cyc(i + 1, k), j) for i in range(1, k + 1) for j in range(n + 1)}
    val = {pt(i, j): ["p"] for i in range(1, k + 1) for j in range(n + 1) if j > n - last_exponent(i)}
    return Model(worlds, le, succ, val)


BUILTINS = ("fig-iltl", "fig-imla", "ht", "diam")


def builtin_model(name: str, n: int | None = None) -> Model:
    if name == "fig-iltl":
        return fig_iltl()
    if name == "fig-imla":
        return fig_imla()
    if name == "ht":
        return ht_model(n)
    if name == "diam":
        return diam_model(n)
    raise ITLError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")


# ---------------------------------------------------------------- blocks


@dataclass(frozen=True)
class Block:
    n: int
    m: int
    a: int
    b: int
    kind: str

    @property
    def columns(self) -> range:
        return range((self.a - 1) * 2 ** self.m + 1, self.a * 2 ** self.m + 1)

    @property
    def cells(self) -> list[str]:
        return [pt(i, self.b) for i in self.columns]

    def pattern(self) -> tuple[bool, ...]:
        return block_pattern(self.n, self.m, self.a, self.b)


def _check_block(n, m, a, b):
    if not 1 <= m <= n:
        raise ITLError(f"block granularity m={m} outside [1, {n}]")
    if not 1 <= a <= 2 ** (n - m):
        raise ITLError(f"block index a={a} outside [1, {2 ** (n - m)}]")
    if not 0 <= b <= n:
        raise ITLError(f"block height b={b} outside [0, {n}]")


def block_classify(n: int, m: int, a: int, b: int) -> Block:
    _check_block(n, m, a, b)
    if b <= n - m - last_exponent(a):
        kind = "initial"
    elif b <= n - m + 1:
        kind = "terminal"
    else:
        kind = "regular"
    return Block(n, m, a, b, kind)


def block_pattern(n: int, m: int, a: int, b: int) -> tuple[bool, ...]:
    """p-pattern of B_m(a, b) in diam(n), read from the valuation rule."""
    return tuple(b > n - last_exponent(i) for i in range((a - 1) * 2 ** m + 1, a * 2 ** m + 1))


def block_kind_by_scan(n: int, m: int, a: int, b: int) -> str:
    """Classify a block from its valuation pattern alone."""
    pat = block_pattern(n, m, a, b)
    if not any(pat):
        return "initial"
    if pat[-1] and not any(pat[:-1]):
        return "terminal"
    return "regular"


def block_of(m: int, i: int) -> int:
    """Index a of the m-block containing column i."""
    return (i - 1) // 2 ** m + 1


def diam_related(n: int, m: int, x: tuple[int, int], y: tuple[int, int]) -> bool:
    """x ~_m y in diam(n): same residue mod 2^m and congruent m-blocks."""
    if (x[0] - y[0]) % 2 ** m:
        return False
    return block_pattern(n, m, block_of(m, x[0]), x[1]) == block_pattern(n, m, block_of(m, y[0]), y[1])


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class CanonicalFamily:
    name: str
    n: int
    family: BisimFamily

    @property
    def levels(self):
        return self.family.levels


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _ht_level(n: int, m: int) -> frozenset:
    k = n + 2
    pts = [(i, j) for i in range(1, k + 1) for j in (0, 1)]
    uf = _UnionFind(pts)
    small = [x for x in pts if x[0] * (1 - x[1]) <= n - m + 1]
    # every pair from `small` satisfies the generating condition
    for x in small[1:]:
        uf.union(small[0], x)
    return frozenset((pt(*x), pt(*y)) for x in pts for y in pts if uf.find(x) == uf.find(y))


def _diam_level(n: int, m: int) -> frozenset:
    k = 2 ** n
    pts = [(i, j) for i in range(1, k + 1) for j in range(n + 1)]
    pattern = {}
    for i, j in pts:
        pattern[(i, j)] = block_pattern(n, m, block_of(m, i), j)
    return frozenset(
        (pt(*x), pt(*y)) for x in pts for y in pts
        if (x[0] - y[0]) % 2 ** m == 0 and pattern[x] == pattern[y]
    )


def canonical_family(name: str, n: int) -> CanonicalFamily:
    """Graded relations on the builtins: ht levels 0..n, diam levels 0..n-1."""
    if name == "ht":
        ht_model(n)  # parameter check
        levels = tuple(_ht_level(n, m) for m in range(n + 1))
        return CanonicalFamily(name, n, BisimFamily(levels, "until"))
    if name == "diam":
        if n is None or n < 1:
            raise ITLError("the diam family needs n >= 1")
        limit = guard_limit(DIAM_GUARD)
        if limit is not None and n > limit:
            raise BudgetExceeded(f"diam({n}) exceeds the size guard")
        levels = tuple(_diam_level(n, m) for m in range(n))
        return CanonicalFamily(name, n, BisimFamily(levels, "release"))
    raise ITLError(f"no canonical family for {name!r}")


# ---------------------------------------------------------------- formulas


def diamond_def_formula() -> Formula:
    """A formula equivalent to <>p on here-and-there models."""
    p = Atom("p")
    em = Or(p, Neg(p))
    alpha = Box(Imp(p, Box(em)))
    beta = Box(Imp(Next(Box(em)), Or(Or(p, Neg(p)), Next(Box(Neg(p))))))
    gamma = And(Box(em), Neg(Box(Neg(p))))
    return Imp(And(alpha, beta), gamma)


__all__ = [
    "pt", "unpt", "cyc", "last_exponent", "builtin_model", "fig_iltl", "fig_imla",
    "ht_model", "diam_model", "Block", "block_classify", "block_pattern",
    "block_kind_by_scan", "block_of", "diam_related", "CanonicalFamily",
    "canonical_family", "diamond_def_formula",
]
