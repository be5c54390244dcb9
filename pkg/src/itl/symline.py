"""Exact evaluation on the integer line with a root below it.

Worlds are the integers plus a root ``r``.  The order relates ``r`` to
everything and otherwise only each world to itself; ``S(r) = r`` and
``S(n) = n + 1``; ``p`` holds exactly on ``[0, +inf)``.  Truth sets are
finite unions of integer intervals (``None`` marks an infinite end) plus
a flag for the root.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ITLError
from .formula import (
    And, Atom, Bottom, Box, Diam, Formula, Imp, Neg, Next, Or, Release, Until,
    atoms_of,
)

ROOT = "r"
LINE_ATOM = "p"


def _lo_key(lo):
    return float("-inf") if lo is None else lo


def _hi_key(hi):
    return float("inf") if hi is None else hi


def _normalize(intervals):
    items = sorted((iv for iv in intervals if _lo_key(iv[0]) <= _hi_key(iv[1])), key=lambda iv: _lo_key(iv[0]))
    out = []
    for lo, hi in items:
        if out and _lo_key(lo) <= _hi_key(out[-1][1]) + 1:
            plo, phi = out[-1]
            out[-1] = (plo, None if hi is None or phi is None else max(phi, hi))
        else:
            out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True)
class LineSet:
    contains_root: bool
    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @classmethod
    def empty(cls) -> "LineSet":
        return cls(False, ())

    @classmethod
    def everything(cls) -> "LineSet":
        return cls(True, ((None, None),))

    def has_int(self, n: int) -> bool:
        return any(_lo_key(lo) <= n <= _hi_key(hi) for lo, hi in self.intervals)

    def __contains__(self, w) -> bool:
        if w == ROOT:
            return self.contains_root
        return self.has_int(int(w))

    @property
    def all_integers(self) -> bool:
        return self.intervals == ((None, None),)

    def is_normal(self) -> bool:
        return _normalize(self.intervals) == self.intervals

    # integer-only helpers; the root flag is handled by the callers

    def ints_complement(self) -> tuple:
        out, cur = [], None  # cur: first integer not yet covered, None = -inf
        started = False
        for lo, hi in self.intervals:
            if lo is not None and (not started or cur is not None):
                out.append((cur if started else None, lo - 1))
            started = True
            if hi is None:
                return _normalize(out)
            cur = hi + 1
        out.append((cur if started else None, None))
        return _normalize(out)

    def sup(self):
        """Largest integer in the set; +inf as None, empty as False."""
        if not self.intervals:
            return False
        return self.intervals[-1][1]

    def __str__(self):
        parts = ["r"] if self.contains_root else []
        for lo, hi in self.intervals:
            left = "(-inf" if lo is None else f"[{lo}"
            right = "+inf)" if hi is None else f"{hi}]"
            parts.append(f"{left}, {right}")
        return "{" + "; ".join(parts) + "}"


def _meet(a, b):
    out = []
    for alo, ahi in a:
        for blo, bhi in b:
            lo = blo if alo is None else alo if blo is None else max(alo, blo)
            hi = bhi if ahi is None else ahi if bhi is None else min(ahi, bhi)
            out.append((lo, hi))
    return _normalize(out)


def _ints_subset(a, b) -> bool:
    return _meet(a, b) == _normalize(a)


def _ints_not(s: LineSet) -> tuple:
    return s.ints_complement()


def _until_ints(a: tuple, b: tuple) -> tuple:
    out = list(b)
    bset = LineSet(False, b)
    for lo, hi in a:
        limit = bset if hi is None else LineSet(False, _meet(b, ((None, hi + 1),)))
        top = limit.sup()
        if top is False:
            continue
        out.append((lo, None if top is None else top - 1))
    return _normalize(out)


def line_truth_set(phi: Formula, free_atoms_false: bool = False) -> LineSet:
    extra = atoms_of(phi) - {LINE_ATOM}
    if extra and not free_atoms_false:
        raise ITLError(f"the line model only interprets atom p; found {', '.join(sorted(extra))}")
    memo = {}

    def go(f):
        hit = memo.get(f)
        if hit is not None:
            return hit
        memo[f] = res = _step(f, go)
        return res

    return go(phi)


def _step(f, go) -> LineSet:
    if isinstance(f, Bottom):
        return LineSet.empty()
    if isinstance(f, Atom):
        return LineSet(False, ((0, None),)) if f.name == LINE_ATOM else LineSet.empty()
    if isinstance(f, And):
        a, b = go(f.left), go(f.right)
        return LineSet(a.contains_root and b.contains_root, _meet(a.intervals, b.intervals))
    if isinstance(f, Or):
        a, b = go(f.left), go(f.right)
        return LineSet(a.contains_root or b.contains_root, a.intervals + b.intervals)
    if isinstance(f, (Imp, Neg)):
        a = go(f.left if isinstance(f, Imp) else f.arg)
        b = go(f.right) if isinstance(f, Imp) else LineSet.empty()
        ints = _ints_not(a) + b.intervals
        root = (not a.contains_root or b.contains_root) and _ints_subset(a.intervals, b.intervals)
        return LineSet(root, ints)
    if isinstance(f, Next):
        a = go(f.arg)
        shifted = tuple((None if lo is None else lo - 1, None if hi is None else hi - 1) for lo, hi in a.intervals)
        return LineSet(a.contains_root, shifted)
    if isinstance(f, Diam):
        a = go(f.arg)
        top = a.sup()
        ints = () if top is False else ((None, top),)
        return LineSet(a.contains_root, ints)
    if isinstance(f, Box):
        a = go(f.arg)
        ints = (a.intervals[-1],) if a.intervals and a.intervals[-1][1] is None else ()
        return LineSet(a.contains_root, ints)
    if isinstance(f, Until):
        a, b = go(f.left), go(f.right)
        return LineSet(b.contains_root, _until_ints(a.intervals, b.intervals))
    if isinstance(f, Release):
        a, b = go(f.left), go(f.right)
        dual = _until_ints(_ints_not(a), _ints_not(b))
        return LineSet(b.contains_root, LineSet(False, dual).ints_complement())
    raise TypeError(f"not a formula: {f!r}")


def parse_world(text: str):
    if text == ROOT:
        return ROOT
    try:
        return int(text)
    except ValueError:
        raise ITLError(f"line world must be 'r' or an integer, got {text!r}") from None


def line_eval(w, phi: Formula, free_atoms_false: bool = False) -> bool:
    return w in line_truth_set(phi, free_atoms_false)


def truncation(k: int):
    """Finite window [-k, k] of the line with S(k) = k, without the root."""
    from .model import Model
    worlds = [str(i) for i in range(-k, k + 1)]
    succ = {str(i): str(min(i + 1, k)) for i in range(-k, k + 1)}
    val = {str(i): ["p"] for i in range(0, k + 1)}
    return Model(worlds, [], succ, val)
