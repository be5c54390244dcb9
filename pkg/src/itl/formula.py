"""Formulas of intuitionistic linear temporal logic.

The AST is a set of small immutable classes.  ``parse`` and ``render``
implement the concrete syntax::

    atoms      [a-z]\\w*
    constants  F (falsum), T (sugar for F -> F)
    unary      ~  X  <>  []          (tightest)
    temporal   U  R                  (right associative, not mixable)
    and        &
    or         |
    implies    ->                    (right associative)
    iff        <->                   (sugar, loosest, non associative)

Unicode spellings (⊥ ⊤ ¬ ✕ ◊ □ ∧ ∨ → ↔) are accepted as well.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import BudgetExceeded, ParseError, guard_limit


class Formula:
    __slots__ = ()
    tag = -1
    arity = 0

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.tag,) + self.args()))

    def args(self) -> tuple:
        raise NotImplementedError

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self.args() == other.args()

    def __str__(self):
        return render(self)

    def __reduce__(self):
        # rebuild on unpickling so the cached hash matches the local process
        return (type(self), self.args())

    def children(self) -> tuple:
        return ()


@dataclass(frozen=True, eq=False, repr=False)
class Bottom(Formula):
    tag = 0

    def args(self):
        return ()

    def __repr__(self):
        return "Bottom()"


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    name: str
    tag = 1

    def args(self):
        return (self.name,)

    def __repr__(self):
        return self.name


@dataclass(frozen=True, eq=False, repr=False)
class _Unary(Formula):
    arg: Formula
    arity = 1

    def args(self):
        return (self.arg,)

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"{type(self).__name__}({self.arg!r})"


@dataclass(frozen=True, eq=False, repr=False)
class _Binary(Formula):
    left: Formula
    right: Formula
    arity = 2

    def args(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Neg(_Unary):
    tag = 2


class And(_Binary):
    tag = 3


class Or(_Binary):
    tag = 4


class Imp(_Binary):
    tag = 5


class Next(_Unary):
    tag = 6


class Diam(_Unary):
    tag = 7


class Box(_Unary):
    tag = 8


class Until(_Binary):
    tag = 9


class Release(_Binary):
    tag = 10


BOTTOM = Bottom()
TOP = Imp(BOTTOM, BOTTOM)

UNARY = (Neg, Next, Diam, Box)
BINARY = (And, Or, Imp, Until, Release)
CONSTRUCTORS = (Bottom, Atom, Neg, And, Or, Imp, Next, Diam, Box, Until, Release)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Imp(a, b), Imp(b, a))


def atom(name: str) -> Atom:
    return Atom(name)


# ---------------------------------------------------------------- fragments


class Fragment(enum.Enum):
    L_X = "X"
    L_DiamBox = "DiamBox"
    L_U = "U"
    L_R = "R"
    L_BoxU = "BoxU"
    L_DiamR = "DiamR"
    L_full = "full"

    @property
    def constructors(self) -> tuple:
        extra = {
            "X": (),
            "DiamBox": (Diam, Box),
            "U": (Until,),
            "R": (Release,),
            "BoxU": (Box, Until),
            "DiamR": (Diam, Release),
            "full": (Diam, Box, Until, Release),
        }[self.value]
        base = (Bottom, Atom, Neg, And, Or, Imp, Next)
        return tuple(c for c in CONSTRUCTORS if c in base or c in extra)

    @classmethod
    def from_name(cls, name: str) -> "Fragment":
        key = name.strip()
        for frag in cls:
            if key in (frag.name, frag.value) or key.lower() in (frag.name.lower(), frag.value.lower()):
                return frag
        raise ValueError(f"unknown fragment {name!r}")


def in_fragment(phi: Formula, fragment: Fragment) -> bool:
    allowed = fragment.constructors
    return all(type(sub) in allowed for sub in subformulas(phi))


# ---------------------------------------------------------------- measures


def subformulas(phi: Formula) -> Iterator[Formula]:
    """Yield every subformula occurrence, parents before children."""
    stack = [phi]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children()))


def length(phi: Formula) -> int:
    if isinstance(phi, (Bottom, Atom)):
        return 0
    return 1 + sum(length(c) for c in phi.children())


def atoms_of(phi: Formula) -> frozenset:
    return frozenset(s.name for s in subformulas(phi) if isinstance(s, Atom))


def closure(*phis: Formula) -> frozenset:
    """Smallest subformula-closed set containing the arguments."""
    out = set()
    for phi in phis:
        out.update(subformulas(phi))
    return frozenset(out)


def is_closed(formulas: Iterable[Formula]) -> bool:
    s = set(formulas)
    return all(c in s for f in s for c in f.children())


def sort_key(phi: Formula):
    return (length(phi), render(phi))


def ordered(formulas: Iterable[Formula]) -> list:
    """Deterministic listing of a formula set: by length, then text."""
    return sorted(formulas, key=sort_key)


# ---------------------------------------------------------------- rendering

_UNARY_TEXT = {Neg: "~", Next: "X ", Diam: "<>", Box: "[]"}
_BINARY_TEXT = {And: "&", Or: "|", Imp: "->", Until: "U", Release: "R"}
_PREC = {Imp: 1, Or: 2, And: 3, Until: 4, Release: 4}
_UNICODE = {Neg: "¬", Next: "✕", Diam: "◊", Box: "□", And: "∧", Or: "∨", Imp: "→", Until: "U", Release: "R"}


def _prec(phi):
    if isinstance(phi, _Binary) and phi != TOP:
        return _PREC[type(phi)]
    return 5


def render(phi: Formula, unicode: bool = False) -> str:
    """Render with the fewest parentheses that parse back to ``phi``."""
    if isinstance(phi, Bottom):
        return "⊥" if unicode else "F"
    if isinstance(phi, Atom):
        return phi.name
    if phi == TOP:
        return "⊤" if unicode else "T"
    if isinstance(phi, _Unary):
        op = _UNICODE[type(phi)] if unicode else _UNARY_TEXT[type(phi)]
        return op + _wrap(phi.arg, _prec(phi.arg) < 5, unicode)
    kind = type(phi)
    p = _PREC[kind]
    lp, rp = _prec(phi.left), _prec(phi.right)
    if kind in (Until, Release):
        lpar = lp <= p
        rpar = rp < p or (rp == p and type(phi.right) is not kind)
    elif kind is Imp:
        lpar, rpar = lp <= p, rp < p
    else:
        lpar, rpar = lp < p, rp <= p
    op = _UNICODE[kind] if unicode else _BINARY_TEXT[kind]
    return f"{_wrap(phi.left, lpar, unicode)} {op} {_wrap(phi.right, rpar, unicode)}"


def _wrap(phi, paren, unicode):
    text = render(phi, unicode)
    return f"({text})" if paren else text


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<sym><->|->|<>|\[\]|[()~&|¬✕◊□∧∨→↔⊥⊤])|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<bad>\S))"
)
_ALIASES = {"¬": "~", "✕": "X", "◊": "<>", "□": "[]", "∧": "&", "∨": "|", "→": "->", "↔": "<->", "⊥": "F", "⊤": "T"}
_KEYWORDS = {"X", "U", "R", "F", "T"}
_ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_PRIMARY_START = {"(", "~", "X", "<>", "[]", "F", "T", "atom"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []  # (kind, value, char offset)
        pos = 0
        while True:
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                break
            start = m.start(m.lastgroup)
            val = m.group(m.lastgroup)
            if m.lastgroup == "bad":
                raise ParseError(f"unknown operator {val!r}", self._byte(start), _PRIMARY_START)
            if m.lastgroup == "sym":
                val = _ALIASES.get(val, val)
                self.tokens.append((val, val, start))
            elif val in _KEYWORDS:
                self.tokens.append((val, val, start))
            elif _ATOM_RE.match(val):
                self.tokens.append(("atom", val, start))
            else:
                raise ParseError(f"unknown operator or bad identifier {val!r}", self._byte(start), _PRIMARY_START)
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.i = 0

    def _byte(self, char_offset):
        return len(self.text[:char_offset].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, val, off = self.tokens[self.i]
        what = "end of input" if kind == "eof" else repr(val)
        raise ParseError(f"unexpected {what}", self._byte(off), expected)

    def expect(self, kind):
        if self.peek() != kind:
            self.fail({kind})
        return self.take()

    def parse(self):
        phi = self.iff()
        if self.peek() != "eof":
            self.fail({"eof", "->", "<->", "|", "&", "U", "R"})
        return phi

    def iff(self):
        left = self.imp()
        if self.peek() == "<->":
            self.take()
            right = self.imp()
            if self.peek() == "<->":
                self.fail({"eof", ")"})
            return iff(left, right)
        return left

    def imp(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.imp())
        return left

    def disj(self):
        phi = self.conj()
        while self.peek() == "|":
            self.take()
            phi = Or(phi, self.conj())
        return phi

    def conj(self):
        phi = self.temporal()
        while self.peek() == "&":
            self.take()
            phi = And(phi, self.temporal())
        return phi

    def temporal(self):
        operands = [self.unary()]
        op = None
        while self.peek() in ("U", "R"):
            if op is not None and self.peek() != op:
                kind, val, off = self.tokens[self.i]
                raise ParseError("mixing U and R requires parentheses", self._byte(off), {op})
            op = self.take()[0]
            operands.append(self.unary())
        phi = operands.pop()
        cls = Until if op == "U" else Release
        while operands:
            phi = cls(operands.pop(), phi)
        return phi

    def unary(self):
        kind = self.peek()
        if kind == "~":
            self.take()
            return Neg(self.unary())
        if kind == "X":
            self.take()
            return Next(self.unary())
        if kind == "<>":
            self.take()
            return Diam(self.unary())
        if kind == "[]":
            self.take()
            return Box(self.unary())
        if kind == "F":
            self.take()
            return BOTTOM
        if kind == "T":
            self.take()
            return TOP
        if kind == "atom":
            return Atom(self.take()[1])
        if kind == "(":
            self.take()
            phi = self.iff()
            self.expect(")")
            return phi
        self.fail(_PRIMARY_START)


def parse(text: str) -> Formula:
    return _Parser(text).parse()


# ---------------------------------------------------------------- rewriting


def _rebuild(phi, children):
    if isinstance(phi, _Unary):
        return type(phi)(children[0])
    return type(phi)(children[0], children[1])


def translate(phi: Formula, target: Fragment) -> Formula:
    """Rewrite into L_BoxU or L_DiamR using the standard interdefinitions."""
    if target not in (Fragment.L_BoxU, Fragment.L_DiamR):
        raise ValueError("translate targets L_BoxU or L_DiamR")
    if isinstance(phi, (Bottom, Atom)):
        return phi
    kids = [translate(c, target) for c in phi.children()]
    if target is Fragment.L_BoxU:
        if isinstance(phi, Diam):
            return Until(TOP, kids[0])
        if isinstance(phi, Release):
            a, b = kids
            return Or(Until(b, And(a, b)), Box(b))
    else:
        if isinstance(phi, Box):
            return Release(BOTTOM, kids[0])
        if isinstance(phi, Until):
            a, b = kids
            return And(Release(b, Or(a, b)), Diam(b))
    return _rebuild(phi, kids)


def next_normal_form(phi: Formula) -> Formula:
    """Push every X down to atoms.  Sound over persistent models only."""
    if isinstance(phi, (Bottom, Atom)):
        return phi
    if isinstance(phi, Next):
        return _push_next(next_normal_form(phi.arg))
    return _rebuild(phi, [next_normal_form(c) for c in phi.children()])


def _push_next(phi):
    # phi is already in normal form
    if isinstance(phi, Bottom):
        return phi
    if isinstance(phi, (Atom, Next)):
        return Next(phi)
    if isinstance(phi, Neg):
        return Neg(_push_next(phi.arg))
    return _rebuild(phi, [_push_next(c) for c in phi.children()])


def is_next_normal(phi: Formula) -> bool:
    for sub in subformulas(phi):
        if isinstance(sub, Next):
            inner = sub.arg
            while isinstance(inner, Next):
                inner = inner.arg
            if not isinstance(inner, (Atom, Bottom)):
                return False
    return True


# ---------------------------------------------------------------- enumeration

DEFAULT_ENUM_CAP = 2_000_000


def count_formulas(n_atoms: int, fragment: Fragment, max_length: int) -> int:
    cons = fragment.constructors
    u = sum(1 for c in cons if c in UNARY)
    b = sum(1 for c in cons if c in BINARY)
    counts = [1 + n_atoms]
    for n in range(1, max_length + 1):
        pairs = sum(counts[i] * counts[n - 1 - i] for i in range(n))
        counts.append(u * counts[n - 1] + b * pairs)
    return sum(counts)


def enumerate_formulas(atoms: Iterable[str], fragment: Fragment, max_length: int, cap: int | None = DEFAULT_ENUM_CAP) -> Iterator[Formula]:
    """Every formula of the fragment up to the given length, each once.

    Order: by length, then constructor, then children in enumeration order.
    """
    names = sorted(set(atoms))
    total = count_formulas(len(names), fragment, max_length)
    limit = guard_limit(cap) if cap is not None else None
    if limit is not None and total > limit:
        raise BudgetExceeded(f"{total} formulas exceed the enumeration cap {limit}")
    cons = fragment.constructors
    by_len: list[list[Formula]] = []
    for n in range(max_length + 1):
        layer = []
        if n == 0:
            layer.append(BOTTOM)
            layer.extend(Atom(a) for a in names)
        else:
            for c in cons:
                if c in UNARY:
                    layer.extend(c(x) for x in by_len[n - 1])
                elif c in BINARY:
                    for i in range(n):
                        for x in by_len[i]:
                            for y in by_len[n - 1 - i]:
                                layer.append(c(x, y))
        by_len.append(layer)
        yield from layer
