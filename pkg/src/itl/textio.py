"""Line-oriented text formats for models, labelled trees and families.

Model format (``#`` starts a comment)::

    world <id> [atom ...]
    le <id> <id>          # order generator edge, closure computed
    succ <id> <id>

Stratified models add ``stratum <index> <id>`` lines and an optional
``loop <a> <b>`` header followed by ``map <id> <id>`` lines giving the
step out of the last stratum into stratum ``a``.

Labelled trees::

    node <id> [label-token ...]
    edge <parent> <child>
    point <id>            # optional

Bisimulation families::

    flavor <next|until|release>     # optional
    level <i>: (w,v) (w,v) ...
"""

from __future__ import annotations

import re

from .errors import ParseError
from .model import Model, _bits

_ID = re.compile(r"[A-Za-z0-9_.'~-]+\Z")


def _lines(text):
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield num, line.split()


def _need(tokens, count, num, usage):
    if len(tokens) != count:
        raise ParseError(f"line {num}: expected '{usage}'")


def _check_id(tok, num):
    if not _ID.match(tok):
        raise ParseError(f"line {num}: bad id {tok!r}")
    return tok


def cover_edges(M: Model) -> list:
    out = []
    for i in range(M.n):
        above = M.up[i] & ~(1 << i)
        for j in _bits(above):
            between = above & M.down[j] & ~(1 << j)
            if not between:
                out.append((M.worlds[i], M.worlds[j]))
    return out


def model_to_text(M: Model) -> str:
    lines = []
    for w in M.worlds:
        lines.append(" ".join(["world", w] + sorted(M.V(w))))
    for a, b in cover_edges(M):
        lines.append(f"le {a} {b}")
    for w in M.worlds:
        lines.append(f"succ {w} {M.S(w)}")
    return "\n".join(lines) + "\n"


def _read_model_parts(text):
    worlds, val, le, succ = [], {}, [], []
    strata, loop, loop_map = {}, None, {}
    for num, tok in _lines(text):
        kw = tok[0]
        if kw == "world":
            if len(tok) < 2:
                raise ParseError(f"line {num}: expected 'world <id> [atom ...]'")
            w = _check_id(tok[1], num)
            worlds.append(w)
            val[w] = tok[2:]
        elif kw == "le":
            _need(tok, 3, num, "le <id> <id>")
            le.append((tok[1], tok[2]))
        elif kw == "succ":
            _need(tok, 3, num, "succ <id> <id>")
            succ.append((tok[1], tok[2]))
        elif kw == "stratum":
            _need(tok, 3, num, "stratum <index> <id>")
            strata[tok[2]] = _int(tok[1], num)
        elif kw == "loop":
            _need(tok, 3, num, "loop <a> <b>")
            loop = (_int(tok[1], num), _int(tok[2], num))
        elif kw == "map":
            _need(tok, 3, num, "map <id> <id>")
            loop_map[tok[1]] = tok[2]
        else:
            raise ParseError(f"line {num}: unknown keyword {kw!r}")
    return worlds, val, le, succ, strata, loop, loop_map


def _int(tok, num):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {num}: expected an integer, got {tok!r}") from None


def model_from_text(text: str) -> Model:
    worlds, val, le, succ, strata, loop, loop_map = _read_model_parts(text)
    if strata or loop:
        from .strat import stratified_from_parts
        return stratified_from_parts(worlds, val, le, succ, strata, loop, loop_map).as_model()
    return Model(worlds, le, succ, val)


def stratified_from_text(text: str):
    from .strat import stratified_from_parts
    worlds, val, le, succ, strata, loop, loop_map = _read_model_parts(text)
    return stratified_from_parts(worlds, val, le, succ, strata, loop, loop_map)


def stratified_to_text(S) -> str:
    lines = []
    for idx, stratum in enumerate(S.strata):
        for w in stratum.nodes:
            lines.append(" ".join(["world", w] + sorted(S.valuation[w])))
    for idx, stratum in enumerate(S.strata):
        for w in stratum.nodes:
            lines.append(f"stratum {idx} {w}")
    for stratum in S.strata:
        for a, b in stratum.edges:
            lines.append(f"le {a} {b}")
    for w, v in S.step.items():
        lines.append(f"succ {w} {v}")
    if S.loop is not None:
        a, sigma = S.loop
        lines.append(f"loop {a} {len(S.strata)}")
        for w in S.strata[-1].nodes:
            lines.append(f"map {w} {sigma[w]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- trees


def tree_from_text(text: str):
    from .combinat import LabelledTree
    nodes, labels, edges, point = [], {}, [], None
    for num, tok in _lines(text):
        if tok[0] == "node":
            if len(tok) < 2:
                raise ParseError(f"line {num}: expected 'node <id> [label ...]'")
            nodes.append(_check_id(tok[1], num))
            labels[tok[1]] = frozenset(tok[2:])
        elif tok[0] == "edge":
            _need(tok, 3, num, "edge <parent> <child>")
            edges.append((tok[1], tok[2]))
        elif tok[0] == "point":
            _need(tok, 2, num, "point <id>")
            point = tok[1]
        else:
            raise ParseError(f"line {num}: unknown keyword {tok[0]!r}")
    return LabelledTree(nodes, edges, labels), point


def _label_tokens(label):
    if isinstance(label, (frozenset, set)):
        return sorted(str(x) for x in label)
    return [str(label)]


def tree_to_text(T, point=None) -> str:
    lines = [" ".join(["node", str(v)] + _label_tokens(T.label[v])) for v in T.nodes]
    lines += [f"edge {a} {b}" for a, b in T.edges]
    if point is not None:
        lines.append(f"point {point}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- families

_PAIR = re.compile(r"\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)")


def family_to_text(F) -> str:
    lines = [f"flavor {F.flavor}"]
    for i, z in enumerate(F.levels):
        pairs = " ".join(f"({a},{b})" for a, b in sorted(z))
        lines.append(f"level {i}: {pairs}".rstrip())
    return "\n".join(lines) + "\n"


def family_from_text(text: str, flavor: str | None = None):
    from .bisim import BisimFamily
    levels = {}
    found_flavor = None
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("flavor"):
            found_flavor = line.split()[1]
            continue
        m = re.match(r"level\s+(\d+)\s*:(.*)\Z", line)
        if not m:
            raise ParseError(f"line {num}: expected 'level <i>: (w,v) ...'")
        rest = m.group(2)
        pairs = _PAIR.findall(rest)
        if _PAIR.sub("", rest).strip():
            raise ParseError(f"line {num}: malformed pair list")
        levels[int(m.group(1))] = frozenset(pairs)
    if sorted(levels) != list(range(len(levels))):
        raise ParseError("family levels must be numbered 0..n without gaps")
    return BisimFamily(tuple(levels[i] for i in range(len(levels))), flavor or found_flavor or "next")
