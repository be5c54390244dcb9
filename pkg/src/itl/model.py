"""Finite dynamic posets and the satisfaction relation.

Worlds are string ids.  Internally a model keeps bitmask up-sets and
an index-based successor array so truth sets can be computed as bit
operations; ``eval`` instead walks orbit lassos world by world, and the
two routes are cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ModelError
from .formula import (
    And, Atom, Bottom, Box, Diam, Formula, Imp, Neg, Next, Or, Release, Until,
)


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def close_order(n: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    """Reflexive-transitive closure as a list of up-set bitmasks."""
    up = [1 << i for i in range(n)]
    for a, b in edges:
        up[a] |= 1 << b
    for k in range(n):
        bit = 1 << k
        uk = up[k]
        for i in range(n):
            if up[i] & bit:
                up[i] |= uk
    return up


class Model:
    """A finite dynamic poset with a valuation.

    ``le`` holds generator edges of the order; the closure is computed
    here.  ``succ`` maps every world to exactly one world.
    """

    def __init__(self, worlds: Iterable[str], le: Iterable[tuple[str, str]] = (),
                 succ: Mapping[str, str] | Iterable[tuple[str, str]] = (),
                 valuation: Mapping[str, Iterable[str]] | None = None):
        self.worlds = tuple(worlds)
        self.index = {w: i for i, w in enumerate(self.worlds)}
        if len(self.index) != len(self.worlds):
            raise ModelError("duplicate world id")
        n = self.n = len(self.worlds)
        if n == 0:
            raise ModelError("a model needs at least one world")
        self.le_edges = tuple((a, b) for a, b in le)
        edges = [(self._idx(a), self._idx(b)) for a, b in self.le_edges]
        self.up = close_order(n, edges)
        pairs = succ.items() if isinstance(succ, Mapping) else succ
        target = [None] * n
        for a, b in pairs:
            i, j = self._idx(a), self._idx(b)
            if target[i] is not None and target[i] != j:
                raise ModelError(f"succ is not functional at {a}")
            target[i] = j
        missing = [self.worlds[i] for i, t in enumerate(target) if t is None]
        if missing:
            raise ModelError(f"succ is partial: no successor for {', '.join(missing)}")
        self.succ = target
        masks: dict[str, int] = {}
        for w, atoms in (valuation or {}).items():
            i = self._idx(w)
            for p in atoms:
                masks[p] = masks.get(p, 0) | (1 << i)
        self.atom_masks = masks
        self._finish()

    @classmethod
    def from_arrays(cls, worlds, up, succ, atom_masks, le_edges=None):
        """Build from already-closed bitmask data; no validation."""
        m = cls.__new__(cls)
        m.worlds = tuple(worlds)
        m.index = {w: i for i, w in enumerate(m.worlds)}
        m.n = len(m.worlds)
        m.up = list(up)
        m.succ = list(succ)
        m.atom_masks = {p: v for p, v in atom_masks.items() if v}
        if le_edges is None:
            le_edges = [(m.worlds[i], m.worlds[j]) for i in range(m.n) for j in _bits(m.up[i]) if i != j]
        m.le_edges = tuple(le_edges)
        m._finish()
        return m

    def _finish(self):
        n = self.n
        self.full = (1 << n) - 1
        down = [0] * n
        for i in range(n):
            for j in _bits(self.up[i]):
                down[j] |= 1 << i
        self.down = down
        self._preimage = [0] * n
        for i, t in enumerate(self.succ):
            self._preimage[t] |= 1 << i

    def _idx(self, w):
        try:
            return self.index[w]
        except KeyError:
            raise ModelError(f"unknown world {w!r}") from None

    # -- plain accessors

    def S(self, w: str) -> str:
        return self.worlds[self.succ[self._idx(w)]]

    def le(self, w: str, v: str) -> bool:
        return bool(self.up[self._idx(w)] >> self._idx(v) & 1)

    def up_set(self, w: str) -> list[str]:
        return [self.worlds[j] for j in _bits(self.up[self._idx(w)])]

    def V(self, w: str) -> frozenset:
        i = self._idx(w)
        return frozenset(p for p, m in self.atom_masks.items() if m >> i & 1)

    @property
    def atoms(self) -> frozenset:
        return frozenset(self.atom_masks)

    @property
    def valuation(self) -> dict:
        return {w: self.V(w) for w in self.worlds}

    def worlds_of(self, mask: int) -> frozenset:
        return frozenset(self.worlds[i] for i in _bits(mask))

    def mask_of(self, ws: Iterable[str]) -> int:
        out = 0
        for w in ws:
            out |= 1 << self._idx(w)
        return out

    def order_pairs(self) -> frozenset:
        return frozenset((self.worlds[i], self.worlds[j]) for i in range(self.n) for j in _bits(self.up[i]))

    def key(self):
        """Structural identity: worlds, closed order, successor, valuation."""
        return (self.worlds, tuple(self.up), tuple(self.succ),
                tuple(sorted((p, m) for p, m in self.atom_masks.items() if m)))

    def __eq__(self, other):
        return isinstance(other, Model) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Model({self.n} worlds)"

    def pre(self, mask: int) -> int:
        """Worlds whose successor lies in ``mask``."""
        out = 0
        for j in _bits(mask):
            out |= self._preimage[j]
        return out

    def truth_mask(self, phi: Formula, cache: dict | None = None) -> int:
        return truth_mask(self, phi, {} if cache is None else cache)


# ---------------------------------------------------------------- classes


@dataclass
class ClassReport:
    is_poset: bool
    is_monotone: bool
    is_forward_confluent: bool
    is_backward_confluent: bool
    is_persistent: bool
    is_here_and_there: bool
    violations: list = field(default_factory=list)
    columns: list | None = None  # HT columns as (bottom, top) pairs

    @property
    def ok(self) -> bool:
        """The three invariants every model must satisfy."""
        return self.is_poset and self.is_monotone and self.is_forward_confluent

    def flags(self) -> dict:
        return {
            "poset": self.is_poset,
            "monotone": self.is_monotone,
            "forward_confluent": self.is_forward_confluent,
            "backward_confluent": self.is_backward_confluent,
            "persistent": self.is_persistent,
            "here_and_there": self.is_here_and_there,
        }


def validate(M: Model) -> ClassReport:
    W = M.worlds
    viol = []
    poset = True
    for i in range(M.n):
        for j in _bits(M.up[i]):
            if j > i and M.up[j] >> i & 1:
                poset = False
                viol.append(("antisymmetry", W[i], W[j]))
    mono = True
    for p, m in sorted(M.atom_masks.items()):
        for i in _bits(m):
            bad = M.up[i] & ~m
            if bad:
                mono = False
                viol.append(("monotone", W[i], W[next(_bits(bad))], p))
    fc = True
    for i in range(M.n):
        si = M.succ[i]
        for j in _bits(M.up[i]):
            if not M.up[si] >> M.succ[j] & 1:
                fc = False
                viol.append(("forward_confluence", W[i], W[j]))
    bc = True
    for i in range(M.n):
        images = 0
        for j in _bits(M.up[i]):
            images |= 1 << M.succ[j]
        missing = M.up[M.succ[i]] & ~images
        if missing:
            bc = False
            viol.append(("backward_confluence", W[i], W[next(_bits(missing))]))
    persistent = fc and bc
    if not persistent:
        viol.append(("persistent", "forward" if not fc else "backward"))
    columns, why = _ht_columns(M) if persistent and poset else (None, "not persistent")
    if columns is None:
        viol.append(("here_and_there", why))
    return ClassReport(poset, mono, fc, bc, persistent, columns is not None, viol, columns)


def _ht_columns(M: Model):
    """Find the (bottom, top) column partition of a here-and-there frame."""
    n = M.n
    if n % 2:
        return None, "odd number of worlds"
    partner = [None] * n
    for i in range(n):
        comparable = (M.up[i] | M.down[i]) & ~(1 << i)
        if comparable == 0 or comparable & (comparable - 1):
            return None, f"world {M.worlds[i]} is not in a two-element column"
        partner[i] = comparable.bit_length() - 1
    cols = []
    top_of = {}
    for i in range(n):
        if M.up[i] >> partner[i] & 1 and partner[i] != i:
            cols.append((i, partner[i]))
            top_of[i] = partner[i]
    for b, t in cols:
        sb, st = M.succ[b], M.succ[t]
        if sb not in top_of or top_of[sb] != st:
            return None, f"successor does not act columnwise at {M.worlds[b]}"
    return [(M.worlds[b], M.worlds[t]) for b, t in cols], None


# ---------------------------------------------------------------- orbits


@dataclass(frozen=True)
class Lasso:
    prefix: tuple
    cycle: tuple

    @property
    def sequence(self) -> tuple:
        return self.prefix + self.cycle

    def at(self, k: int):
        """S^k(w) read off the lasso."""
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]


def _orbit_idx(M: Model, i: int):
    seen = {}
    seq = []
    while i not in seen:
        seen[i] = len(seq)
        seq.append(i)
        i = M.succ[i]
    start = seen[i]
    return seq[:start], seq[start:]


def orbit(M: Model, w: str) -> Lasso:
    pre, cyc = _orbit_idx(M, M._idx(w))
    return Lasso(tuple(M.worlds[i] for i in pre), tuple(M.worlds[i] for i in cyc))


# ---------------------------------------------------------------- semantics


def eval(M: Model, w: str, phi: Formula) -> bool:  # noqa: A001 - mirrors the logic's name
    """Pointwise satisfaction following the clauses directly."""
    memo: dict = {}
    orbits: dict = {}

    def seq(i):
        if i not in orbits:
            pre, cyc = _orbit_idx(M, i)
            orbits[i] = pre + cyc
        return orbits[i]

    def sat(i, f):
        key = (i, f)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Bottom):
            r = False
        elif isinstance(f, Atom):
            r = bool(M.atom_masks.get(f.name, 0) >> i & 1)
        elif isinstance(f, And):
            r = sat(i, f.left) and sat(i, f.right)
        elif isinstance(f, Or):
            r = sat(i, f.left) or sat(i, f.right)
        elif isinstance(f, Imp):
            r = all(not sat(j, f.left) or sat(j, f.right) for j in _bits(M.up[i]))
        elif isinstance(f, Neg):
            r = not any(sat(j, f.arg) for j in _bits(M.up[i]))
        elif isinstance(f, Next):
            r = sat(M.succ[i], f.arg)
        elif isinstance(f, Diam):
            r = any(sat(j, f.arg) for j in seq(i))
        elif isinstance(f, Box):
            r = all(sat(j, f.arg) for j in seq(i))
        elif isinstance(f, Until):
            r = False
            for j in seq(i):
                if sat(j, f.right):
                    r = True
                    break
                if not sat(j, f.left):
                    break
        elif isinstance(f, Release):
            r = True
            for j in seq(i):
                # psi first: phi must hold strictly earlier
                if not sat(j, f.right):
                    r = False
                    break
                if sat(j, f.left):
                    break
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[key] = r
        return r

    return sat(M._idx(w), phi)


def truth_mask(M: Model, phi: Formula, cache: dict) -> int:
    """Truth set as a bitmask, via fixpoints over the successor map."""
    hit = cache.get(phi)
    if hit is not None:
        return hit
    if isinstance(phi, Bottom):
        r = 0
    elif isinstance(phi, Atom):
        r = M.atom_masks.get(phi.name, 0)
    elif isinstance(phi, And):
        r = truth_mask(M, phi.left, cache) & truth_mask(M, phi.right, cache)
    elif isinstance(phi, Or):
        r = truth_mask(M, phi.left, cache) | truth_mask(M, phi.right, cache)
    elif isinstance(phi, (Imp, Neg)):
        if isinstance(phi, Imp):
            a, b = truth_mask(M, phi.left, cache), truth_mask(M, phi.right, cache)
        else:
            a, b = truth_mask(M, phi.arg, cache), 0
        bad = a & ~b
        r = 0
        for i in range(M.n):
            if not M.up[i] & bad:
                r |= 1 << i
    elif isinstance(phi, Next):
        r = M.pre(truth_mask(M, phi.arg, cache))
    elif isinstance(phi, Diam):
        a = truth_mask(M, phi.arg, cache)
        r = a
        while True:
            nxt = a | M.pre(r)
            if nxt == r:
                break
            r = nxt
    elif isinstance(phi, Box):
        a = truth_mask(M, phi.arg, cache)
        r = a
        while True:
            nxt = a & M.pre(r)
            if nxt == r:
                break
            r = nxt
    elif isinstance(phi, Until):
        a, b = truth_mask(M, phi.left, cache), truth_mask(M, phi.right, cache)
        r = b
        while True:
            nxt = b | (a & M.pre(r))
            if nxt == r:
                break
            r = nxt
    elif isinstance(phi, Release):
        a, b = truth_mask(M, phi.left, cache), truth_mask(M, phi.right, cache)
        r = b
        while True:
            nxt = b & (a | M.pre(r))
            if nxt == r:
                break
            r = nxt
    else:
        raise TypeError(f"not a formula: {phi!r}")
    cache[phi] = r
    return r


def is_up_closed(M: Model, mask: int) -> bool:
    return all(M.up[i] & ~mask == 0 for i in _bits(mask))


def truth_set(M: Model, phi: Formula) -> frozenset:
    mask = truth_mask(M, phi, {})
    assert is_up_closed(M, mask), f"truth set of {phi} is not upward closed"
    return M.worlds_of(mask)
