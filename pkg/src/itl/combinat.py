"""Labelled posets and trees: level, quasimodels, simulations, condensation.

Orders are given by generator edges and closed reflexively and
transitively.  Node ids may be any hashable value; labels any hashable
value (formula sets when the structure comes from a model).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bisim import CheckResult
from .bounds import e_number, fmp_bound, q_number  # noqa: F401 - re-exported
from .errors import BudgetExceeded, ITLError, ModelError, guard_limit
from .formula import Formula, Imp, render
from .model import Model, _bits, close_order, truth_mask

GRAPH_GUARD = 200_000


def label_key(label):
    """A total sort key for labels of mixed shapes."""
    if isinstance(label, Formula):
        return (2, render(label))
    if isinstance(label, (frozenset, set)):
        return (3, tuple(sorted(label_key(x) for x in label)))
    if isinstance(label, tuple):
        return (4, tuple(label_key(x) for x in label))
    if isinstance(label, bool):
        return (0, int(label))
    if isinstance(label, int):
        return (0, label)
    return (1, str(label))


class LabelledPoset:
    def __init__(self, nodes, edges=(), label=None):
        self.nodes = tuple(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ModelError("duplicate node")
        self.edges = tuple((a, b) for a, b in edges)
        n = self.n = len(self.nodes)
        try:
            idx = [(self.index[a], self.index[b]) for a, b in self.edges]
        except KeyError as exc:
            raise ModelError(f"edge mentions unknown node {exc.args[0]!r}") from None
        self.up = close_order(n, idx)
        self.down = [0] * n
        for i in range(n):
            for j in _bits(self.up[i]):
                self.down[j] |= 1 << i
        for i in range(n):
            if self.up[i] & self.down[i] & ~(1 << i):
                raise ModelError(f"order is cyclic through {self.nodes[i]!r}")
        label = label or {}
        self.label = {v: label.get(v, frozenset()) for v in self.nodes}

    def le(self, a, b) -> bool:
        return bool(self.up[self.index[a]] >> self.index[b] & 1)

    def lt(self, a, b) -> bool:
        return a != b and self.le(a, b)

    def above(self, v) -> list:
        return [self.nodes[j] for j in _bits(self.up[self.index[v]])]

    def covers(self) -> list:
        out = []
        for i in range(self.n):
            strict = self.up[i] & ~(1 << i)
            for j in _bits(strict):
                if not strict & self.down[j] & ~(1 << j):
                    out.append((self.nodes[i], self.nodes[j]))
        return out

    def cover_children(self) -> dict:
        kids = {v: [] for v in self.nodes}
        for a, b in self.covers():
            kids[a].append(b)
        return kids

    def minimal(self) -> list:
        return [v for i, v in enumerate(self.nodes) if self.down[i] == 1 << i]

    def is_forest(self) -> bool:
        for i in range(self.n):
            below = self.down[i]
            for a in _bits(below):
                for b in _bits(below):
                    if not (self.up[a] >> b & 1 or self.up[b] >> a & 1):
                        return False
        return True

    def relabel(self, fn) -> "LabelledPoset":
        return LabelledPoset(self.nodes, self.edges, {v: fn(v, self.label[v]) for v in self.nodes})

    @property
    def labels(self) -> frozenset:
        return frozenset(self.label.values())

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"{type(self).__name__}({self.n} nodes)"


class LabelledTree(LabelledPoset):
    def __init__(self, nodes, edges=(), label=None, root=None):
        super().__init__(nodes, edges, label)
        parents = {}
        for a, b in self.edges:
            if b in parents and parents[b] != a:
                raise ModelError(f"node {b!r} has two parents")
            parents[b] = a
        roots = [v for v in self.nodes if v not in parents]
        if len(roots) != 1:
            raise ModelError(f"a tree needs exactly one root, found {len(roots)}")
        if root is not None and root != roots[0]:
            raise ModelError(f"declared root {root!r} is not the root")
        self.root = roots[0]
        self.parent = parents
        self.children = {v: [] for v in self.nodes}
        for a, b in self.edges:
            if b not in self.children[a]:
                self.children[a].append(b)

    def subtree(self, v) -> list:
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children[x]))
        return out


def tree_from_poset(A: LabelledPoset) -> LabelledTree:
    """View a tree-ordered poset with one minimum as a LabelledTree."""
    return LabelledTree(A.nodes, A.covers(), A.label)


# ---------------------------------------------------------------- level


def levels(A: LabelledPoset, depth: bool = False) -> dict:
    order = sorted(range(A.n), key=lambda i: -bin(A.up[i]).count("1"))
    # nodes with smaller up-sets are computed first
    order.reverse()
    lev = [0] * A.n
    for i in order:
        best = 0
        for j in _bits(A.up[i] & ~(1 << i)):
            if depth or A.label[A.nodes[j]] != A.label[A.nodes[i]]:
                best = max(best, lev[j])
        lev[i] = best + 1
    return {A.nodes[i]: lev[i] for i in range(A.n)}


def level(A: LabelledPoset, w=None, depth: bool = False) -> int:
    table = levels(A, depth)
    if w is not None:
        return table[w]
    return max(table.values(), default=0)


# ---------------------------------------------------------------- quasimodels


def to_labelled(M: Model, sigma) -> LabelledPoset:
    sigma = list(sigma)
    cache = {}
    masks = [(phi, truth_mask(M, phi, cache)) for phi in sigma]
    label = {w: frozenset(phi for phi, m in masks if m >> i & 1) for i, w in enumerate(M.worlds)}
    edges = [(M.worlds[i], M.worlds[j]) for i in range(M.n) for j in _bits(M.up[i]) if i != j]
    return LabelledPoset(M.worlds, edges, label)


def is_quasimodel(A: LabelledPoset, sigma) -> CheckResult:
    viol = []
    sigma = frozenset(sigma)
    for i, w in enumerate(A.nodes):
        lw = A.label[w]
        if not lw <= sigma:
            viol.append(("label_outside_sigma", w))
        for j in _bits(A.up[i]):
            if not lw <= A.label[A.nodes[j]]:
                viol.append(("monotone", w, A.nodes[j]))
    for phi in sigma:
        if not isinstance(phi, Imp):
            continue
        for i, w in enumerate(A.nodes):
            holds = all(phi.left not in A.label[A.nodes[j]] or phi.right in A.label[A.nodes[j]]
                        for j in _bits(A.up[i]))
            if holds != (phi in A.label[w]):
                viol.append(("implication", w, phi))
    return CheckResult(not viol, viol)


# ---------------------------------------------------------------- simulations


def _as_pairs(R):
    if isinstance(R, dict):
        return set(R.items())
    return set(R)


def _simulation_violations(pairs, A, B, tag=""):
    viol = []
    dom = {a for a, _ in pairs}
    for w in A.nodes:
        if w not in dom:
            viol.append((tag + "domain", w))
    by_src = {}
    for a, b in pairs:
        if a not in A.index or b not in B.index:
            viol.append((tag + "unknown_node", (a, b)))
            continue
        by_src.setdefault(a, []).append(b)
    for a, b in pairs:
        if a not in A.index or b not in B.index:
            continue
        if A.label[a] != B.label[b]:
            viol.append((tag + "label", (a, b)))
        for a2 in A.above(a):
            if not any(B.le(b, b2) for b2 in by_src.get(a2, ())):
                viol.append((tag + "forth", (a, b), a2))
    return viol


def _functional(pairs):
    seen = {}
    for a, b in pairs:
        if seen.setdefault(a, b) != b:
            return False
    return True


def check_simulation(R, A: LabelledPoset, B: LabelledPoset, kind: str = "simulation") -> CheckResult:
    """Check ``R`` against the defining clauses of ``kind``.

    ``kind`` is ``simulation``, ``immersion`` or ``condensation``; for the
    last one ``R`` is a pair ``(rho, iota)`` of maps.
    """
    if kind == "condensation":
        rho, iota = R
        rp, ip = _as_pairs(rho), _as_pairs(iota)
        viol = _simulation_violations(rp, A, B, "rho_") + _simulation_violations(ip, B, A, "iota_")
        if not _functional(rp):
            viol.append(("rho_not_function", None))
        if not _functional(ip):
            viol.append(("iota_not_function", None))
        rho_map, iota_map = dict(rp), dict(ip)
        hit = set(rho_map.values())
        for b in B.nodes:
            if b not in hit:
                viol.append(("rho_not_surjective", b))
            if b in iota_map and rho_map.get(iota_map[b]) != b:
                viol.append(("rho_iota_not_identity", b))
        return CheckResult(not viol, viol)
    pairs = _as_pairs(R)
    viol = _simulation_violations(pairs, A, B)
    if kind == "immersion" and not _functional(pairs):
        viol.append(("not_function", None))
    elif kind not in ("simulation", "immersion"):
        raise ValueError(f"unknown simulation kind {kind!r}")
    return CheckResult(not viol, viol)


def immersion_from_simulation(sigma, A: LabelledTree, B: LabelledPoset, w, w2) -> dict:
    """Partial immersion on the subtree of ``w`` inside ``sigma``, sending w to w2."""
    pairs = _as_pairs(sigma)
    if (w, w2) not in pairs:
        raise ITLError(f"({w!r}, {w2!r}) is not in the simulation")
    options = {}
    for a, b in pairs:
        options.setdefault(a, []).append(b)
    for a in options:
        options[a].sort(key=lambda b: B.index[b])
    out = {}
    stack = [(w, w2)]
    while stack:
        x, y = stack.pop()
        out[x] = y
        for c in A.children[x]:
            pick = next((b for b in options.get(c, ()) if B.le(y, b)), None)
            if pick is None:
                raise ITLError(f"not a simulation: no image for {c!r} above {y!r}")
            stack.append((c, pick))
    return out


# ---------------------------------------------------------------- immersions


def find_immersion(A: LabelledPoset, B: LabelledPoset) -> dict | None:
    """Some immersion A -> B (a label-preserving monotone map), or None."""
    if A.is_forest():
        return _tree_immersion(A, B)
    return _search_immersion(A, B)


def _tree_immersion(A, B):
    kids = A.cover_children()
    memo = {}

    def can(w, v):
        key = (w, v)
        if key in memo:
            return memo[key]
        ok = A.label[w] == B.label[v] and all(
            any(can(c, v2) for v2 in B.above(v)) for c in kids[w])
        memo[key] = ok
        return ok

    out = {}

    def place(w, v):
        out[w] = v
        for c in kids[w]:
            place(c, next(v2 for v2 in B.above(v) if can(c, v2)))

    for r in A.minimal():
        v = next((v for v in B.nodes if can(r, v)), None)
        if v is None:
            return None
        place(r, v)
    return out


def _search_immersion(A, B):
    order = sorted(range(A.n), key=lambda i: bin(A.down[i]).count("1"))
    assign = [None] * A.n

    def rec(pos):
        if pos == len(order):
            return True
        i = order[pos]
        preds = [j for j in _bits(A.down[i]) if j != i]
        for v in range(B.n):
            if A.label[A.nodes[i]] != B.label[B.nodes[v]]:
                continue
            if all(B.up[assign[j]] >> v & 1 for j in preds):
                assign[i] = v
                if rec(pos + 1):
                    return True
        assign[i] = None
        return False

    if not rec(0):
        return None
    return {A.nodes[i]: B.nodes[assign[i]] for i in range(A.n)}


def _mark(A: LabelledPoset, point):
    return A.relabel(lambda v, l: (l, v == point))


def are_bimersive(A: LabelledPoset, B: LabelledPoset, point_a=None, point_b=None) -> bool:
    """Immersions exist both ways; pass both points for the pointed notion."""
    if (point_a is None) != (point_b is None):
        raise ValueError("give both points or neither")
    if point_a is not None:
        A, B = _mark(A, point_a), _mark(B, point_b)
    return find_immersion(A, B) is not None and find_immersion(B, A) is not None


# ---------------------------------------------------------------- universal graph


@dataclass
class LabelledGraph:
    nodes: list
    succ: dict
    label: dict

    def __len__(self):
        return len(self.nodes)


def graph_node_key(y):
    if y[0] == 1:
        return (1, label_key(y[1]))
    return (y[0], label_key(y[1]), tuple(sorted(graph_node_key(c) for c in y[2])))


def universal_graph(labels, k: int) -> LabelledGraph:
    """The stage-k labelled DAG; nodes are (1, l) or (j, l, frozenset C)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    labels = sorted(set(labels), key=label_key)
    size = e_number(len(labels), k)
    limit = guard_limit(GRAPH_GUARD)
    if limit is not None and not (isinstance(size, int) and size <= limit):
        raise BudgetExceeded(f"universal graph would have {size} nodes; guard is {limit}")
    nodes = [(1, l) for l in labels]
    succ = {y: [] for y in nodes}
    lab = {y: y[1] for y in nodes}
    for stage in range(2, k + 1):
        prev = list(nodes)
        for l in labels:
            for mask in range(1 << len(prev)):
                C = frozenset(prev[i] for i in _bits(mask))
                y = (stage, l, C)
                nodes.append(y)
                succ[y] = sorted(C, key=graph_node_key)
                lab[y] = l
    return LabelledGraph(nodes, succ, lab)


def unravel(G, y) -> LabelledTree:
    """Tree of all paths from ``y``; accepts a LabelledGraph or a LabelledPoset."""
    if isinstance(G, LabelledPoset):
        kids = G.cover_children()
        lab = G.label
    else:
        kids, lab = G.succ, G.label
    nodes, edges, label = [], [], {}
    stack = [(y,)]
    while stack:
        path = stack.pop()
        nodes.append(path)
        label[path] = lab[path[-1]]
        for c in reversed(kids[path[-1]]):
            child = path + (c,)
            edges.append((path, child))
            stack.append(child)
    return LabelledTree(nodes, edges, label)


# ---------------------------------------------------------------- condensation


@dataclass
class Condensation:
    tree: LabelledTree
    rho: dict
    iota: dict
    point: object = None
    source_level: int = 0

    def check(self, source: LabelledPoset) -> CheckResult:
        return check_simulation((self.rho, self.iota), source, self.tree, "condensation")


def _canonical(T: LabelledTree, lev: dict):
    """Graph node for each subtree, built bottom-up from the level table."""
    canon, frontier, region = {}, {}, {}
    for w in reversed(_preorder(T)):
        lw = T.label[w]
        same, nxt, stack = [], [], [w]
        while stack:
            x = stack.pop()
            same.append(x)
            for c in T.children[x]:
                (stack if T.label[c] == lw else nxt).append(c)
        region[w], frontier[w] = same, nxt
        if lev[w] == 1:
            canon[w] = (1, lw)
        else:
            canon[w] = (lev[w], lw, frozenset(canon[v] for v in nxt))
    return canon, frontier, region


def _preorder(T):
    return T.subtree(T.root)


def condense(T: LabelledTree, point=None) -> Condensation:
    """Condense ``T`` onto an unravelling of the universal graph.

    With ``point`` set, labels are first tagged with a point marker so the
    result is a pointed condensation; the marker is removed afterwards and
    the image of the point is reported.
    """
    if point is not None:
        marked = _mark(T, point)
        res = condense(LabelledTree(marked.nodes, marked.edges, marked.label))
        plain = {v: l[0] for v, l in res.tree.label.items()}
        image = next(v for v, l in res.tree.label.items() if l[1])
        tree = LabelledTree(res.tree.nodes, res.tree.edges, plain)
        return Condensation(tree, res.rho, res.iota, image, res.source_level)
    lev = levels(T)
    canon, frontier, region = _canonical(T, lev)
    s = canon[T.root]

    kids = {}

    def graph_children(y):
        if y not in kids:
            kids[y] = [] if y[0] == 1 else sorted(y[2], key=graph_node_key)
        return kids[y]

    nodes, edges, label = [], [], {}
    stack = [(s,)]
    while stack:
        path = stack.pop()
        nodes.append(path)
        label[path] = path[-1][1]
        for c in reversed(graph_children(path[-1])):
            edges.append((path, path + (c,)))
            stack.append(path + (c,))
    U = LabelledTree(nodes, edges, label)

    rho, iota_rel = {}, set()
    work = [(T.root, ())]
    while work:
        w, prefix = work.pop()
        path = prefix + (canon[w],)
        for x in region[w]:
            rho[x] = path
        iota_rel.add((path, w))
        for v in frontier[w]:
            work.append((v, path))
    # iota_rel pairs each path with the subtree roots it was built from;
    # it is a simulation contained in the inverse of rho
    iota = immersion_from_simulation(iota_rel, U, T, (s,), T.root)
    return Condensation(U, rho, iota, None, lev[T.root])


def condense_checked(T: LabelledTree, point=None) -> Condensation:
    res = condense(T, point)
    source = _mark(T, point) if point is not None else T
    target = res.tree if point is None else _mark(res.tree, res.point)
    chk = check_simulation((res.rho, res.iota), source, target, "condensation")
    if not chk:
        raise ITLError(f"internal error: condensation check failed: {chk.violations[:3]}")
    return res


# ---------------------------------------------------------------- random trees


def random_labelled_tree(seed: int, max_nodes: int, labels, max_level: int | None = None,
                         change: float = 0.25, tries: int = 1000) -> LabelledTree:
    rng = random.Random(seed)
    labels = sorted(set(labels), key=label_key)
    for _ in range(tries):
        n = rng.randint(1, max_nodes)
        lab = {0: rng.choice(labels)}
        edges = []
        for v in range(1, n):
            p = rng.randrange(v)
            edges.append((p, v))
            lab[v] = rng.choice(labels) if rng.random() < change else lab[p]
        T = LabelledTree(range(n), edges, lab)
        if max_level is None or level(T) <= max_level:
            return T
    raise ITLError("could not draw a tree within the level limit")


def relabel_nodes(T: LabelledTree, prefix: str = "n") -> tuple[LabelledTree, dict]:
    """Copy with string ids ``n0, n1, ...`` in preorder; returns (tree, old->new)."""
    names = {v: f"{prefix}{i}" for i, v in enumerate(T.subtree(T.root))}
    return LabelledTree([names[v] for v in T.nodes], [(names[a], names[b]) for a, b in T.edges],
                        {names[v]: T.label[v] for v in T.nodes}), names
