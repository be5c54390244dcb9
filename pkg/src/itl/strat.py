"""Stratified models, the bounded stratifier, eventualities and speedups.

A :class:`StratifiedModel` holds strata ``W_0 .. W_{N-1}`` (each a tree
under the order), a step map ``W_i -> W_{i+1}`` for ``i < N-1`` and an
optional loop ``(a, sigma)`` where ``sigma`` sends ``W_{N-1}`` into
``W_a``; the loop already includes the step out of the last stratum.
With a loop present the structure is a finite presentation of an
eventually periodic stratified model, and :meth:`as_model` is its
loop-back model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import bounds
from .bisim import CheckResult
from .combinat import (
    LabelledTree, are_bimersive, check_simulation, condense,
)
from .errors import ITLError, ModelError
from .formula import Atom, Box, Formula, Until, ordered
from .model import Model, _bits, _orbit_idx, truth_mask


@dataclass(frozen=True)
class Stratum:
    nodes: tuple
    edges: tuple = ()  # parent -> child tree edges

    def tree(self, label=None) -> LabelledTree:
        return LabelledTree(self.nodes, self.edges, label or {})


class StratifiedModel:
    def __init__(self, strata, step, valuation, loop=None):
        self.strata = [s if isinstance(s, Stratum) else Stratum(tuple(s[0]), tuple(s[1])) for s in strata]
        self.step = dict(step)
        self.valuation = {w: frozenset(v) for w, v in valuation.items()}
        self.loop = None if loop is None else (loop[0], dict(loop[1]))
        self.level_of = {}
        for i, s in enumerate(self.strata):
            for w in s.nodes:
                if w in self.level_of:
                    raise ModelError(f"node {w!r} lies in two strata")
                self.level_of[w] = i
        for w in self.level_of:
            self.valuation.setdefault(w, frozenset())
        self._check()

    # -- structure

    @property
    def N(self) -> int:
        return len(self.strata)

    @property
    def nodes(self) -> list:
        return [w for s in self.strata for w in s.nodes]

    def _check(self):
        if not self.strata:
            raise ModelError("a stratified model needs at least one stratum")
        self._trees = [s.tree() for s in self.strata]
        for i, s in enumerate(self.strata):
            for a, b in s.edges:
                if self.level_of.get(a) != i or self.level_of.get(b) != i:
                    raise ModelError(f"order edge ({a}, {b}) leaves stratum {i}")
        for i in range(self.N - 1):
            self._check_map(self.strata[i], i + 1, self.step, f"step {i}")
        if self.loop is not None:
            a, sigma = self.loop
            if not 0 <= a < self.N:
                raise ModelError(f"loop target {a} outside 0..{self.N - 1}")
            self._check_map(self.strata[-1], a, sigma, "loop")

    def _check_map(self, src, target, fn, what):
        T_src = self._trees[self.strata.index(src)]
        T_dst = self._trees[target]
        for w in src.nodes:
            v = fn.get(w)
            if v is None or self.level_of.get(v) != target:
                raise ModelError(f"{what}: {w!r} is not sent into stratum {target}")
        for w in src.nodes:
            for u in T_src.above(w):
                if not T_dst.le(fn[w], fn[u]):
                    raise ModelError(f"{what}: not forward confluent at ({w}, {u})")

    def tree(self, i: int, label=None) -> LabelledTree:
        return self.strata[i].tree(label)

    def succ_of(self, w):
        i = self.level_of[w]
        if i < self.N - 1:
            return self.step[w]
        if self.loop is None:
            return None
        return self.loop[1][w]

    def le_edges(self) -> list:
        return [e for s in self.strata for e in s.edges]

    def as_model(self) -> Model:
        return loop_back(self)

    def __repr__(self):
        sizes = ",".join(str(len(s.nodes)) for s in self.strata)
        tail = "" if self.loop is None else f", loop->{self.loop[0]}"
        return f"StratifiedModel([{sizes}]{tail})"


def loop_back(S: StratifiedModel) -> Model:
    if S.loop is None:
        raise ITLError("loop_back needs a loop")
    succ = {w: S.succ_of(w) for w in S.nodes}
    return Model(S.nodes, S.le_edges(), succ, S.valuation)


def stratified_from_parts(worlds, val, le, succ, strata, loop, loop_map) -> StratifiedModel:
    if not strata:
        raise ModelError("no stratum lines")
    missing = [w for w in worlds if w not in strata]
    if missing:
        raise ModelError(f"worlds without a stratum: {', '.join(missing)}")
    N = max(strata.values()) + 1
    layers = [[] for _ in range(N)]
    for w in worlds:
        layers[strata[w]].append(w)
    edges = [[] for _ in range(N)]
    for a, b in le:
        if a not in strata or b not in strata:
            raise ModelError(f"unknown world in le {a} {b}")
        edges[strata[a]].append((a, b))
    step = {}
    for a, b in succ:
        if strata.get(a) == N - 1:
            raise ModelError(f"succ from the last stratum ({a}); use loop/map lines")
        step[a] = b
    loop_val = None
    if loop is not None:
        a, b = loop
        if b != N:
            raise ModelError(f"loop {a} {b}: b must equal the number of strata ({N})")
        loop_val = (a, loop_map)
    return StratifiedModel([Stratum(tuple(l), tuple(e)) for l, e in zip(layers, edges)], step,
                           {w: val.get(w, ()) for w in worlds}, loop_val)


# ---------------------------------------------------------------- checking


@dataclass
class StratReport:
    stratified: bool
    expanding: bool = False
    model: StratifiedModel | None = None
    reason: str = ""

    def __bool__(self):
        return self.stratified


def _components(M: Model) -> list[int]:
    comp = [-1] * M.n
    count = 0
    for i in range(M.n):
        if comp[i] >= 0:
            continue
        stack = [i]
        comp[i] = count
        while stack:
            x = stack.pop()
            for y in _bits(M.up[x] | M.down[x]):
                if comp[y] < 0:
                    comp[y] = count
                    stack.append(y)
        count += 1
    return comp


def check_stratified(M: Model) -> StratReport:
    """Find strata: order components chained by S into a lasso.

    The last stratum must loop back to a strictly earlier one; a component
    sent into itself cannot be a stratum.
    """
    comp = _components(M)
    k = max(comp) + 1
    nxt = [None] * k
    for i in range(M.n):
        c, d = comp[i], comp[M.succ[i]]
        if c == d:
            return StratReport(False, reason=f"S maps stratum of {M.worlds[i]} into itself")
        if nxt[c] not in (None, d):
            return StratReport(False, reason=f"S splits the component of {M.worlds[i]}")
        nxt[c] = d
    indeg = [0] * k
    for c in range(k):
        indeg[nxt[c]] += 1
    starts = [c for c in range(k) if indeg[c] == 0]
    if len(starts) > 1:
        return StratReport(False, reason="components do not form a single S-chain")
    start = starts[0] if starts else comp[0]
    chain, seen = [], {}
    c = start
    while c not in seen:
        seen[c] = len(chain)
        chain.append(c)
        c = nxt[c]
    if len(chain) != k:
        return StratReport(False, reason="components do not form a single S-chain")
    a = seen[c]
    layers = []
    for c in chain:
        members = [i for i in range(M.n) if comp[i] == c]
        sub = set(members)
        edges = []
        for i in members:
            strict = M.up[i] & ~(1 << i)
            for j in _bits(strict):
                if not strict & M.down[j] & ~(1 << j) and j in sub:
                    edges.append((M.worlds[i], M.worlds[j]))
        try:
            LabelledTree([M.worlds[i] for i in members], edges)
        except ModelError as exc:
            return StratReport(False, reason=f"stratum is not a tree: {exc}")
        layers.append(Stratum(tuple(M.worlds[i] for i in members), tuple(edges)))
    last = set(layers[-1].nodes)
    step = {w: M.S(w) for w in M.worlds if w not in last}
    sigma = {w: M.S(w) for w in last}
    S = StratifiedModel(layers, step, M.valuation, (a, sigma))
    return StratReport(True, _expanding(S, range(S.N - 1)), S)


def _expanding(S: StratifiedModel, indices) -> bool:
    for i in indices:
        T_src, T_dst = S.tree(i), S.tree(i + 1)
        nodes = S.strata[i].nodes
        for w in nodes:
            for v in nodes:
                if T_dst.le(S.step[w], S.step[v]) and not T_src.le(w, v):
                    return False
    return True


def check_strata(S: StratifiedModel) -> StratReport:
    """Report for an already stratified (possibly truncated) structure."""
    return StratReport(True, _expanding(S, range(S.N - 1)), S)


# ---------------------------------------------------------------- stratifier


@dataclass
class StratifierState:
    points: set
    edges: set
    h: dict
    horizon: int
    strategy: str
    repairs: list = field(default_factory=list)  # (k, x, y, H, v, column)
    skipped: list = field(default_factory=list)
    complete: bool = True

    def stratum(self, y: int) -> list:
        return sorted((p for p in self.points if p[1] == y), key=lambda p: p[0])

    def images(self, y: int) -> list:
        return [(x, self.h[(x, y)]) for x, _ in self.stratum(y)]


def _labels(M: Model, sigma) -> list:
    sig = ordered(sigma)
    cache = {}
    masks = [truth_mask(M, phi, cache) for phi in sig]
    return [frozenset(phi for phi, m in zip(sig, masks) if m >> i & 1) for i in range(M.n)], sig


def stratify_bounded(M: Model, w: str, sigma, rounds: int, horizon: int, strategy: str = "saturate"):
    """Build the stratified unfolding of (M, w) on rows 0..horizon.

    ``saturate`` repairs, row by row and highest column first, every label
    reachable above a point but not yet present above its image point,
    using at most ``rounds`` repairs; ``diagonal`` runs ``rounds`` steps of
    the plain enumeration of (column, row, label) defects.
    """
    if horizon < 0:
        raise ITLError("horizon must be non-negative")
    if strategy not in ("saturate", "diagonal"):
        raise ValueError("strategy is 'saturate' or 'diagonal'")
    labels, sig = _labels(M, sigma)
    wi = M.index[w]
    spine = [wi]
    for _ in range(horizon):
        spine.append(M.succ[spine[-1]])
    st = StratifierState({(0, y) for y in range(horizon + 1)}, set(),
                         {(0, y): M.worlds[spine[y]] for y in range(horizon + 1)}, horizon, strategy)

    def add_column(col, x, y, v, k, H):
        cur = v
        for row in range(y, horizon + 1):
            st.points.add((col, row))
            st.edges.add(((x, row), (col, row)))
            st.h[(col, row)] = M.worlds[cur]
            cur = M.succ[cur]
        st.repairs.append((k, x, y, H, M.worlds[v], col))

    if strategy == "saturate":
        _saturate(M, st, labels, rounds, horizon, add_column)
    else:
        _diagonal(M, st, labels, sig, rounds, horizon, add_column)
    return _truncation(M, st), st


def _above(st, p):
    out, stack = [p], [p]
    kids = {}
    for a, b in st.edges:
        kids.setdefault(a, []).append(b)
    while stack:
        x = stack.pop()
        for c in kids.get(x, ()):
            out.append(c)
            stack.append(c)
    return out


def _saturate(M, st, labels, rounds, horizon, add_column):
    used = 0
    for y in range(horizon + 1):
        todo = sorted((x for x, yy in st.points if yy == y), reverse=True)
        while todo:
            x = todo.pop(0)
            hx = M.index[st.h[(x, y)]]
            for v in _bits(M.up[hx]):
                present = {labels[M.index[st.h[q]]] for q in _above(st, (x, y))}
                if labels[v] in present:
                    continue
                if used >= rounds:
                    st.complete = False
                    st.skipped.append((x, y, labels[v]))
                    continue
                used += 1
                col = used
                add_column(col, x, y, v, used - 1, labels[v])
                todo.insert(0, col)


def _defects(n_labels):
    t = 0
    while True:
        for x in range(t + 1):
            for y in range(t + 1 - x):
                for H in range(n_labels):
                    if x + y + bin(H).count("1") == t:
                        yield x, y, H
        t += 1


def _diagonal(M, st, labels, sig, rounds, horizon, add_column):
    def bitmask(lab):
        return sum(1 << j for j, phi in enumerate(sig) if phi in lab)
    gen = _defects(1 << len(sig))
    for k in range(rounds):
        x, y, H = next(gen)
        if x > k:
            st.skipped.append((x, y, H))
            continue
        if y > horizon:
            st.skipped.append((x, y, H))
            continue
        if (x, y) not in st.points:
            continue
        hx = M.index[st.h[(x, y)]]
        v = next((v for v in _bits(M.up[hx]) if bitmask(labels[v]) == H), None)
        if v is None:
            continue
        add_column(k + 1, x, y, v, k, labels[v])
    st.complete = False


def point_id(p) -> str:
    return f"{p[0]}_{p[1]}"


def _truncation(M, st) -> StratifiedModel:
    strata = []
    for y in range(st.horizon + 1):
        pts = st.stratum(y)
        edges = sorted(((point_id(a), point_id(b)) for a, b in st.edges if a[1] == y), key=str)
        strata.append(Stratum(tuple(point_id(p) for p in pts), tuple(edges)))
    step = {point_id(p): point_id((p[0], p[1] + 1)) for p in st.points if p[1] < st.horizon}
    val = {point_id(p): M.V(st.h[p]) for p in st.points}
    return StratifiedModel(strata, step, val, None)


def check_state(st: StratifierState, M: Model) -> CheckResult:
    viol = []
    cols = sorted({x for x, _ in st.points})
    count = len(st.repairs)
    bound = count if st.strategy == "saturate" else max((r[0] + 1 for r in st.repairs), default=0)
    for x, y in st.points:
        if x > bound:
            viol.append(("column_bound", (x, y)))
        nxt = (x, y + 1)
        if y < st.horizon:
            if nxt not in st.points:
                viol.append(("closed_under_S", (x, y)))
            elif M.S(st.h[(x, y)]) != st.h[nxt]:
                viol.append(("h_commutes", (x, y)))
    parents = {}
    for a, b in st.edges:
        if a[1] != b[1] or not a[0] < b[0]:
            viol.append(("edge_shape", (a, b)))
        if b in parents:
            viol.append(("unique_parent", b))
        parents[b] = a
        if not M.le(st.h[a], st.h[b]):
            viol.append(("h_monotone", (a, b)))
        if b[1] < st.horizon and ((a[0], a[1] + 1), (b[0], b[1] + 1)) not in st.edges:
            viol.append(("forward_confluent", (a, b)))
        if (b[0], b[1] - 1) in st.points and ((a[0], a[1] - 1), (b[0], b[1] - 1)) not in st.edges:
            viol.append(("backward_confluent", (a, b)))
    for p in st.points:
        seen, cur = 0, p
        while cur in parents and seen <= len(st.points):
            cur = parents[cur]
            seen += 1
        if cur != (0, p[1]):
            viol.append(("path_from_spine", p))
    return CheckResult(not viol, viol)


# ---------------------------------------------------------------- eventualities


@dataclass
class Eventuality:
    world: str
    formula: Formula
    fulfillment: list
    time: int


def fulfillment(M: Model, w: str, phi: Formula) -> Eventuality | None:
    if not isinstance(phi, (Box, Until)):
        raise ITLError("fulfillment needs a [] or U formula")
    cache = {}
    whole = truth_mask(M, phi, cache)
    i = M.index[w]
    pre, cyc = _orbit_idx(M, i)
    seq = pre + cyc
    if isinstance(phi, Box):
        if whole >> i & 1:
            return None
        target = truth_mask(M, phi.arg, cache)
        for n, j in enumerate(seq):
            if not target >> j & 1:
                return Eventuality(w, phi, [M.worlds[x] for x in seq[:n + 1]], n)
    else:
        if not whole >> i & 1:
            return None
        target = truth_mask(M, phi.right, cache)
        for n, j in enumerate(seq):
            if target >> j & 1:
                return Eventuality(w, phi, [M.worlds[x] for x in seq[:n + 1]], n)
    raise ITLError("internal error: eventuality without fulfillment")


def check_fulfillment(M: Model, ev: Eventuality) -> bool:
    seq = ev.fulfillment
    if seq[0] != ev.world or any(M.S(seq[k]) != seq[k + 1] for k in range(len(seq) - 1)):
        return False
    from .model import eval as model_eval
    phi = ev.formula
    if isinstance(phi, Box):
        return (not model_eval(M, seq[-1], phi.arg)) and all(model_eval(M, v, phi.arg) for v in seq[:-1])
    return model_eval(M, seq[-1], phi.right) and all(
        model_eval(M, v, phi.left) and not model_eval(M, v, phi.right) for v in seq[:-1])


# ---------------------------------------------------------------- speedups


@dataclass
class Speedup:
    model: StratifiedModel
    pi: dict
    point: object = None


def sigma_labels(S: StratifiedModel, sigma) -> dict:
    M = loop_back(S)
    labels, _ = _labels(M, sigma)
    return {w: labels[M.index[w]] for w in M.worlds}


def _fresh(taken, base):
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def _rebuild(S, strata, succ, valuation, a_new):
    """StratifiedModel from strata and a total successor map."""
    last = set(strata[-1].nodes)
    step = {w: v for w, v in succ.items() if w not in last}
    loop = None if a_new is None else (a_new, {w: succ[w] for w in last})
    return StratifiedModel(strata, step, valuation, loop)


def su_normalize(S: StratifiedModel, k: int, sigma, point=None, allow_loop: bool = False) -> Speedup:
    """Replace stratum k by its condensation under the sigma-labelling."""
    if S.loop is None:
        raise ITLError("su_normalize needs a looped model to evaluate labels")
    a = S.loop[0]
    if not 0 <= k < S.N:
        raise ITLError(f"stratum {k} outside 0..{S.N - 1}")
    if k >= a and not allow_loop:
        raise ITLError(f"stratum {k} lies on the loop (a={a}); only prefix strata are supported")
    sigma = list(sigma)
    lab = sigma_labels(S, sigma)
    stratum = S.strata[k]
    T = stratum.tree({w: lab[w] for w in stratum.nodes})
    res = condense(T, point)
    taken = set(S.nodes)
    names = {u: _fresh(taken, f"k{k}n{i}") for i, u in enumerate(res.tree.subtree(res.tree.root))}
    new_nodes = tuple(names[u] for u in res.tree.subtree(res.tree.root))
    new_edges = tuple((names[p], names[c]) for p, c in res.tree.edges)
    rho = {w: names[u] for w, u in res.rho.items()}
    iota = {names[u]: w for u, w in res.iota.items()}
    succ = {w: S.succ_of(w) for w in S.nodes}
    new_succ = {}
    for w, v in succ.items():
        if w in rho:
            continue
        new_succ[w] = rho[v] if S.level_of[v] == k else v
    for u, w in iota.items():
        new_succ[u] = succ[w]
        if S.level_of[succ[w]] == k:
            new_succ[u] = rho[succ[w]]
    valuation = {w: S.valuation[w] for w in S.nodes if w not in rho}
    inv = {v: u for u, v in names.items()}
    for u in new_nodes:
        valuation[u] = frozenset(f.name for f in res.tree.label[inv[u]] if isinstance(f, Atom))
    strata = list(S.strata)
    strata[k] = Stratum(new_nodes, new_edges)
    model = _rebuild(S, strata, new_succ, valuation, S.loop[0])
    pi = {w: w for w in S.nodes if w not in rho}
    pi.update(iota)
    return Speedup(model, pi, None if res.point is None else names[res.point])


def su_collapse(S: StratifiedModel, k: int, l: int, sigma_map: dict, sigma, point=None,
                allow_loop: bool = False) -> Speedup:
    """Drop strata k+1..l, sending W_k on through sigma_map: W_k -> W_l."""
    if S.loop is None:
        raise ITLError("su_collapse needs a looped model to evaluate labels")
    a = S.loop[0]
    if not 0 <= k < l < S.N:
        raise ITLError(f"need 0 <= k < l < {S.N}")
    if k < a <= l:
        raise ITLError(f"collapse {k}..{l} would remove the loop target {a}")
    if a <= k and not allow_loop:
        raise ITLError("collapsing inside the loop changes every period; pass allow_loop")
    lab = sigma_labels(S, sigma)
    A = S.strata[k].tree({w: lab[w] for w in S.strata[k].nodes})
    B = S.strata[l].tree({w: lab[w] for w in S.strata[l].nodes})
    chk = check_simulation(sigma_map, A, B, "immersion")
    if not chk:
        raise ITLError(f"sigma is not an immersion: {chk.violations[:3]}")
    if point is not None:
        wk, wl = point
        if sigma_map.get(wk) != wl:
            raise ITLError("sigma does not send the designated points to each other")
    succ = {w: S.succ_of(w) for w in S.nodes}
    removed = {w for m in range(k + 1, l + 1) for w in S.strata[m].nodes}
    new_succ = {}
    for w, v in succ.items():
        if w in removed:
            continue
        new_succ[w] = succ[sigma_map[w]] if S.level_of[w] == k else v
    strata = [s for m, s in enumerate(S.strata) if not k < m <= l]
    valuation = {w: S.valuation[w] for w in S.nodes if w not in removed}
    model = _rebuild(S, strata, new_succ, valuation, a if a <= k else a - (l - k))
    pi = {w: w for w in model.nodes}
    for w in S.strata[k].nodes:
        pi[w] = sigma_map[w]
    return Speedup(model, pi, None if point is None else point[0])


def unroll(S: StratifiedModel, periods: int) -> StratifiedModel:
    """Insert ``periods`` extra copies of the loop strata before looping."""
    if S.loop is None:
        raise ITLError("unroll needs a loop")
    if periods == 0:
        return S
    a, sigma = S.loop
    span = list(range(a, S.N))
    taken = set(S.nodes)
    strata = list(S.strata)
    valuation = dict(S.valuation)
    copies = []
    for j in range(1, periods + 1):
        ren = {w: _fresh(taken, f"{w}~{j}") for m in span for w in S.strata[m].nodes}
        copies.append(ren)
        for m in span:
            s = S.strata[m]
            strata.append(Stratum(tuple(ren[w] for w in s.nodes), tuple((ren[x], ren[y]) for x, y in s.edges)))
            for w in s.nodes:
                valuation[ren[w]] = S.valuation[w]
    step = dict(S.step)
    chain = [dict((w, w) for m in span for w in S.strata[m].nodes)] + copies
    for j, ren in enumerate(chain):
        for m in span:
            for w in S.strata[m].nodes:
                src = ren[w]
                if m < S.N - 1:
                    step[src] = ren[S.step[w]]
                elif j + 1 < len(chain):
                    step[src] = chain[j + 1][sigma[w]]
    last = copies[-1]
    new_sigma = {last[w]: last[sigma[w]] for w in S.strata[-1].nodes}
    return StratifiedModel(strata, step, valuation, (a + periods * len(span), new_sigma))


def copy_map(S: StratifiedModel, m: int, j: int) -> dict:
    """Node map from stratum m to its j-th copy made by :func:`unroll`."""
    return {w: f"{w}~{j}" for w in S.strata[m].nodes}


# ---------------------------------------------------------------- good models


@dataclass
class GoodReport:
    ok: bool
    clauses: dict
    details: dict
    note: str = "length bound read with n = |Sigma|"

    def __bool__(self):
        return self.ok


def is_good(S: StratifiedModel, a: int, b: int, sigma) -> GoodReport:
    sigma = list(sigma)
    s = len(sigma)
    details = {}
    if not 0 <= a < b < S.N:
        raise ITLError(f"need 0 <= a < b < {S.N} (both strata materialized)")
    limit = bounds.good_length_bound(s)
    c1 = a < b and bounds.le(b, limit)
    details["length_bound"] = bounds.render(limit)
    lab = sigma_labels(S, sigma)
    A = S.strata[a].tree({w: lab[w] for w in S.strata[a].nodes})
    B = S.strata[b].tree({w: lab[w] for w in S.strata[b].nodes})
    c2 = are_bimersive(A, B)
    M = loop_back(S)
    worst = -1
    for w in S.strata[a].nodes:
        for phi in sigma:
            if isinstance(phi, (Box, Until)):
                ev = fulfillment(M, w, phi)
                if ev is not None:
                    worst = max(worst, ev.time)
    details["fulfillment_time"] = worst
    c3 = worst < b - a
    size = bounds.q_number(2 ** (s + 1), s + 3)
    details["stratum_bound"] = bounds.render(size)
    c4 = all(bounds.le(len(S.strata[c].nodes), size) for c in range(b))
    clauses = {"length": c1, "bimersive": c2, "fulfillment": c3, "size": c4}
    return GoodReport(all(clauses.values()), clauses, details)


# ---------------------------------------------------------------- random lassos


def random_stratified(seed: int, strata: int = 4, max_nodes: int = 4, atoms=("p", "q"),
                      loop_start: int | None = None) -> StratifiedModel:
    """Random looped stratified model with tree strata and monotone steps."""
    import random
    rng = random.Random(seed)
    trees = []
    for i in range(strata):
        n = rng.randint(1, max_nodes)
        names = [f"s{i}n{j}" for j in range(n)]
        edges = [(names[rng.randrange(j)], names[j]) for j in range(1, n)]
        trees.append((names, edges))
    layers = [Stratum(tuple(n), tuple(e)) for n, e in trees]
    val = {}
    for names, edges in trees:
        T = LabelledTree(names, edges)
        for p in sorted(atoms):
            seeds = [w for w in names if rng.random() < 0.3]
            for w in seeds:
                for u in T.above(w):
                    val.setdefault(u, set()).add(p)
    a = rng.randrange(strata) if loop_start is None else loop_start

    def monotone(src, dst):
        Ts, Td = LabelledTree(*src), LabelledTree(*dst)
        out = {}
        for w in Ts.subtree(Ts.root):
            base = out[Ts.parent[w]] if w in Ts.parent else Td.root
            out[w] = rng.choice(Td.above(base))
        return out

    step = {}
    for i in range(strata - 1):
        step.update(monotone(trees[i], trees[i + 1]))
    sigma = monotone(trees[-1], trees[a])
    return StratifiedModel(layers, step, val, (a, sigma))


__all__ = [
    "Stratum", "StratifiedModel", "StratReport", "StratifierState", "Eventuality", "Speedup",
    "GoodReport", "check_stratified", "check_strata", "stratify_bounded", "check_state",
    "fulfillment", "check_fulfillment", "su_normalize", "su_collapse", "loop_back", "unroll",
    "copy_map", "is_good", "random_stratified", "sigma_labels", "stratified_from_parts",
]
