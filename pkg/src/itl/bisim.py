"""Bounded bisimulation families for the X, U and R fragments.

A family is a decreasing chain ``Z_0 ⊇ Z_1 ⊇ … ⊇ Z_n`` of relations
between the worlds of two models.  The temporal clauses quantify over
all orbit positions; on finite models positions beyond one pass around
the orbit lasso add nothing, so the checks range over
``horizon * (len(prefix) + len(cycle))`` positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Model, _bits, _orbit_idx

FLAVORS = ("next", "until", "release")


@dataclass(frozen=True)
class BisimFamily:
    levels: tuple  # tuple of frozensets of (w1, w2) pairs
    flavor: str = "next"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        object.__setattr__(self, "levels", tuple(frozenset(z) for z in self.levels))

    @property
    def n(self) -> int:
        return len(self.levels) - 1

    def level_of(self, pair) -> int:
        """Highest level containing the pair, or -1."""
        best = -1
        for i, z in enumerate(self.levels):
            if pair in z:
                best = i
        return best


@dataclass
class CheckResult:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


class _Level:
    """Bitmask view of one relation Z_i, with the two domination tables.

    ``above[x1]`` is the set of x2 such that some u1 ≽ x1 and u2 ≼ x2 are
    related; ``below[x1]`` the set of x2 with some v1 ≼ x1, v2 ≽ x2 related.
    """

    def __init__(self, M1: Model, M2: Model, rows: list[int]):
        self.rows = rows
        reach_down = [0] * M1.n  # u2's related to some u1 ≽ x1
        reach_up = [0] * M1.n
        for x1 in range(M1.n):
            acc = 0
            for u1 in _bits(M1.up[x1]):
                acc |= rows[u1]
            reach_down[x1] = acc
            acc = 0
            for v1 in _bits(M1.down[x1]):
                acc |= rows[v1]
            reach_up[x1] = acc
        # close under the M2 order: u2 ≼ x2 means x2 in up(u2)
        self.above = [_spread(M2.up, m) for m in reach_down]
        self.below = [_spread(M2.down, m) for m in reach_up]


def _spread(cones, mask):
    out = 0
    for j in _bits(mask):
        out |= cones[j]
    return out


def _rows_of(M1: Model, M2: Model, pairs) -> list[int]:
    rows = [0] * M1.n
    for a, b in pairs:
        rows[M1.index[a]] |= 1 << M2.index[b]
    return rows


def _positions(M: Model, i: int, horizon: int) -> list[int]:
    pre, cyc = _orbit_idx(M, i)
    span = horizon * (len(pre) + len(cyc))
    seq = pre + cyc
    while len(seq) < span:
        seq = seq + cyc
    return seq[:span]


def _until_forth(a, b, rel):
    """∀k1 ∃k2: rel(a[k1], b[k2]) and every j2 < k2 is met by some j1 < k1."""
    covered = 0  # positions j2 met by some earlier a[j1]
    for k1, x1 in enumerate(a):
        first_gap = 0
        while first_gap < len(b) and covered >> first_gap & 1:
            first_gap += 1
        row = rel[x1]
        if not any(row >> b[k2] & 1 for k2 in range(min(first_gap + 1, len(b)))):
            return k1
        for j2, x2 in enumerate(b):
            if row >> x2 & 1:
                covered |= 1 << j2
    return None


def _until_back(a, b, rel):
    """∀k2 ∃k1: rel(a[k1], b[k2]) and every j1 < k1 is met by some j2 < k2."""
    covered = 0  # positions j1 met by some earlier b[j2]
    for k2, x2 in enumerate(b):
        first_gap = 0
        while first_gap < len(a) and covered >> first_gap & 1:
            first_gap += 1
        if not any(rel[a[k1]] >> x2 & 1 for k1 in range(min(first_gap + 1, len(a)))):
            return k2
        for j1, x1 in enumerate(a):
            if rel[x1] >> x2 & 1:
                covered |= 1 << j1
    return None


def _pair_ok(M1, M2, i1, i2, lev: _Level, flavor, horizon):
    """Return None if (i1, i2) passes every step clause against ``lev``."""
    rows = lev.rows
    for v1 in _bits(M1.up[i1]):
        if not rows[v1] & M2.up[i2]:
            return ("forth_imp", M1.worlds[v1])
    back = 0
    for v1 in _bits(M1.up[i1]):
        back |= rows[v1]
    missing = M2.up[i2] & ~back
    if missing:
        return ("back_imp", M2.worlds[next(_bits(missing))])
    if not rows[M1.succ[i1]] >> M2.succ[i2] & 1:
        return ("forth_next", None)
    if flavor == "next":
        return None
    a = _positions(M1, i1, horizon)
    b = _positions(M2, i2, horizon)
    if flavor == "until":
        k = _until_forth(a, b, lev.above)
        if k is not None:
            return ("forth_until", k)
        k = _until_back(a, b, lev.below)
        if k is not None:
            return ("back_until", k)
    else:
        k = _until_back(a, b, lev.above)
        if k is not None:
            return ("forth_release", k)
        k = _until_forth(a, b, lev.below)
        if k is not None:
            return ("back_release", k)
    return None


def _atom_rows(M1: Model, M2: Model) -> list[int]:
    names = sorted(M1.atoms | M2.atoms)
    rows = []
    for i in range(M1.n):
        row = 0
        for j in range(M2.n):
            if all((M1.atom_masks.get(p, 0) >> i & 1) == (M2.atom_masks.get(p, 0) >> j & 1) for p in names):
                row |= 1 << j
        rows.append(row)
    return rows


def check_family(M1: Model, M2: Model, F: BisimFamily, horizon: int = 1) -> CheckResult:
    viol = []
    atoms_ok = _atom_rows(M1, M2)
    levels = [_rows_of(M1, M2, z) for z in F.levels]
    for i, rows in enumerate(levels):
        for i1 in range(M1.n):
            bad = rows[i1] & ~atoms_ok[i1]
            for i2 in _bits(bad):
                viol.append(("atoms", i, (M1.worlds[i1], M2.worlds[i2])))
    for i in range(len(levels) - 1):
        lower, upper = levels[i], levels[i + 1]
        lev = _Level(M1, M2, lower)
        for i1 in range(M1.n):
            for i2 in _bits(upper[i1]):
                pair = (M1.worlds[i1], M2.worlds[i2])
                if not lower[i1] >> i2 & 1:
                    viol.append(("inclusion", i + 1, pair))
                    continue
                why = _pair_ok(M1, M2, i1, i2, lev, F.flavor, horizon)
                if why is not None:
                    viol.append((why[0], i + 1, pair))
    return CheckResult(not viol, viol)


def max_family(M1: Model, M2: Model, n: int, flavor: str = "next", horizon: int = 1) -> BisimFamily:
    """Largest family of the given depth, by level-wise refinement."""
    rows = _atom_rows(M1, M2)
    levels = [rows]
    for _ in range(n):
        lev = _Level(M1, M2, rows)
        new = [0] * M1.n
        for i1 in range(M1.n):
            for i2 in _bits(rows[i1]):
                if _pair_ok(M1, M2, i1, i2, lev, flavor, horizon) is None:
                    new[i1] |= 1 << i2
        rows = new
        levels.append(rows)
    pairs = [frozenset((M1.worlds[i1], M2.worlds[i2]) for i1 in range(M1.n) for i2 in _bits(r[i1])) for r in levels]
    return BisimFamily(tuple(pairs), flavor)
