"""Exhaustive and random model generation, and bounded decision.

Enumeration order: world count, then the strict order relation read as
a bitmask (bit ``i*n+j`` for ``i < j``), then the successor map in
lexicographic order, then valuations (one up-set per atom, atoms in
sorted order, each up-set in bitmask order).  No isomorphism reduction.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .errors import BudgetExceeded, ITLError, guard_limit
from .formula import Formula
from .model import Model, _bits, close_order, eval as model_eval, truth_mask, validate

CLASSES = ("all", "persistent", "here_and_there", "finite_tree_order")
MODES = ("validity", "satisfiability")
WORLD_GUARD = 5
HT_WORLD_GUARD = 8


@dataclass(frozen=True)
class SearchSpec:
    max_worlds: int
    atoms: frozenset = frozenset()
    class_filter: str = "all"
    mode: str = "validity"
    seed: int = 0
    min_worlds: int = 1

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be at least 1")
        if self.class_filter not in CLASSES:
            raise ValueError(f"class_filter must be one of {CLASSES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.class_filter == "here_and_there" and self.max_worlds % 2:
            raise ValueError("here-and-there search needs an even max_worlds")


@dataclass
class Verdict:
    outcome: str
    witness: tuple | None = None
    models_checked: int = 0

    @property
    def holds(self) -> bool:
        return self.outcome == "holds_within_bound"


def world_names(n: int) -> tuple:
    return tuple(f"w{i}" for i in range(n))


# ---------------------------------------------------------------- frames


def _order_key(n, up):
    key = 0
    for i in range(n):
        for j in _bits(up[i]):
            if i != j:
                key |= 1 << (i * n + j)
    return key


@lru_cache(maxsize=None)
def posets(n: int) -> tuple:
    """All partial orders on n labelled points, as up-set bitmask tuples."""
    if n == 0:
        return ((),)
    out = []
    for up in posets(n - 1):
        k = n - 1
        downs = _down_closed(n - 1, up)
        ups = _up_closed(n - 1, up)
        for d in downs:
            for u in ups:
                if d & u:
                    continue
                if any(up[i] & u != u for i in _bits(d)):
                    continue
                new = list(up) + [(1 << k) | u]
                for i in _bits(d):
                    new[i] |= (1 << k) | u
                out.append(tuple(new))
    out.sort(key=lambda up: _order_key(n, up))
    return tuple(out)


def _up_closed(n, up):
    return [m for m in range(1 << n) if all(up[i] & ~m == 0 for i in _bits(m))]


def _down_closed(n, up):
    return [m for m in range(1 << n) if _is_down(n, up, m)]


def _is_down(n, up, m):
    # i in m and j <= i implies j in m
    for j in range(n):
        if not m >> j & 1 and up[j] & m:
            return False
    return True


def _is_tree_order(n, up):
    down = [0] * n
    for i in range(n):
        for j in _bits(up[i]):
            down[j] |= 1 << i
    for i in range(n):
        for a in _bits(down[i]):
            for b in _bits(down[i]):
                if not (up[a] >> b & 1 or up[b] >> a & 1):
                    return False
    return True


def _fc_maps(n, up):
    """Forward-confluent successor maps in lexicographic order."""
    s = [0] * n

    def rec(i):
        if i == n:
            yield tuple(s)
            return
        for v in range(n):
            ok = True
            for j in range(i):
                if up[j] >> i & 1 and not up[s[j]] >> v & 1:
                    ok = False
                    break
                if up[i] >> j & 1 and not up[v] >> s[j] & 1:
                    ok = False
                    break
            if ok:
                s[i] = v
                yield from rec(i + 1)

    yield from rec(0)


def _backward_confluent(n, up, s):
    for i in range(n):
        images = 0
        for j in _bits(up[i]):
            images |= 1 << s[j]
        if up[s[i]] & ~images:
            return False
    return True


def _ht_frames(n):
    m = n // 2
    frames = []

    def pairings(free):
        if not free:
            yield []
            return
        i = free[0]
        for j in free[1:]:
            rest = [x for x in free if x not in (i, j)]
            for tail in pairings(rest):
                yield [(i, j)] + tail
                yield [(j, i)] + tail

    for cols in pairings(list(range(n))):
        up = [1 << i for i in range(n)]
        for b, t in cols:
            up[b] |= 1 << t
        for f in itertools.product(range(m), repeat=m):
            s = [0] * n
            for c, (b, t) in enumerate(cols):
                s[b] = cols[f[c]][0]
                s[t] = cols[f[c]][1]
            frames.append((tuple(up), tuple(s)))
    frames.sort(key=lambda fr: (_order_key(n, fr[0]), fr[1]))
    return frames


def frames(spec: SearchSpec) -> Iterator[tuple]:
    """(n, up, succ) triples in enumeration order."""
    guard = guard_limit(HT_WORLD_GUARD if spec.class_filter == "here_and_there" else WORLD_GUARD)
    if guard is not None and spec.max_worlds > guard:
        raise BudgetExceeded(f"max_worlds={spec.max_worlds} exceeds the guard {guard} (set ITL_SIZE_GUARD to override)")
    for n in range(max(1, spec.min_worlds), spec.max_worlds + 1):
        if spec.class_filter == "here_and_there":
            if n % 2:
                continue
            for up, s in _ht_frames(n):
                yield n, up, s
            continue
        for up in posets(n):
            if spec.class_filter == "finite_tree_order" and not _is_tree_order(n, up):
                continue
            for s in _fc_maps(n, up):
                if spec.class_filter == "persistent" and not _backward_confluent(n, up, s):
                    continue
                yield n, up, s


def valuations(n: int, up, atoms) -> Iterator[dict]:
    names = sorted(atoms)
    choices = _up_closed(n, up)
    for combo in itertools.product(choices, repeat=len(names)):
        yield dict(zip(names, combo))


def enumerate_models(spec: SearchSpec) -> Iterator[Model]:
    for n, up, s in frames(spec):
        worlds = world_names(n)
        for val in valuations(n, up, spec.atoms):
            yield Model.from_arrays(worlds, up, s, val)


def count_models(spec: SearchSpec) -> int:
    total = 0
    for n, up, _ in frames(spec):
        total += len(_up_closed(n, up)) ** len(spec.atoms)
    return total


# ---------------------------------------------------------------- decision


def _scan(phi, spec, frame_list):
    """First witness in the given frames: (position, model, world) or None."""
    want_true = spec.mode == "satisfiability"
    checked = 0
    for pos, (n, up, s) in enumerate(frame_list):
        shell = Model.from_arrays(world_names(n), up, s, {})
        for val in valuations(n, up, spec.atoms):
            shell.atom_masks = {p: m for p, m in val.items() if m}
            mask = truth_mask(shell, phi, {})
            checked += 1
            hit = mask if want_true else shell.full & ~mask
            if hit:
                w = shell.worlds[(hit & -hit).bit_length() - 1]
                model = Model.from_arrays(shell.worlds, up, s, val)
                return pos, model, w, checked
    return None, None, None, checked


def _scan_job(args):
    phi, spec, chunk, offset = args
    pos, model, w, checked = _scan(phi, spec, chunk)
    return (None if pos is None else pos + offset), model, w, checked


def bounded_decide(phi: Formula, spec: SearchSpec, jobs: int = 1) -> Verdict:
    frame_list = list(frames(spec))
    if jobs <= 1 or len(frame_list) < 2 * jobs:
        pos, model, w, checked = _scan(phi, spec, frame_list)
        results = [(pos, model, w, checked)]
    else:
        size = -(-len(frame_list) // jobs)
        tasks = [(phi, spec, frame_list[i:i + size], i) for i in range(0, len(frame_list), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_job, tasks))
    found = [r for r in results if r[0] is not None]
    checked = sum(r[3] for r in results)
    if not found:
        return Verdict("holds_within_bound", None, checked)
    _, model, w, _ = min(found, key=lambda r: r[0])
    expected = spec.mode == "satisfiability"
    if model_eval(model, w, phi) != expected:
        raise ITLError("internal error: witness does not re-check")
    return Verdict("witness_found", (model, w), checked)


# ---------------------------------------------------------------- random


def _random_order(rng, n, tree=False):
    perm = list(range(n))
    rng.shuffle(perm)
    edges = []
    if tree:
        for pos in range(1, n):
            if rng.random() < 0.75:
                edges.append((perm[rng.randrange(pos)], perm[pos]))
    else:
        density = rng.choice((0.15, 0.3, 0.5))
        for a in range(n):
            for b in range(a + 1, n):
                if rng.random() < density:
                    edges.append((perm[a], perm[b]))
    return close_order(n, edges), perm


def _random_succ(rng, n, up, perm):
    s = [None] * n
    for i in perm:  # perm is a linear extension of the order
        cand = (1 << n) - 1
        for j in range(n):
            if j != i and up[j] >> i & 1:
                cand &= up[s[j]]
        if not cand:
            return None
        options = list(_bits(cand))
        s[i] = rng.choice(options)
    return s


def _random_val(rng, n, up, atoms):
    val = {}
    for p in sorted(atoms):
        seed = 0
        for i in range(n):
            if rng.random() < 0.35:
                seed |= 1 << i
        mask = 0
        for i in _bits(seed):
            mask |= up[i]
        val[p] = mask
    return val


def random_model(spec: SearchSpec, max_tries: int = 20000) -> Model:
    rng = random.Random(spec.seed)
    if spec.class_filter == "here_and_there":
        m = rng.randint(1, spec.max_worlds // 2)
        n = 2 * m
        up = [1 << i for i in range(n)]
        for c in range(m):
            up[2 * c] |= 1 << (2 * c + 1)
        f = [rng.randrange(m) for _ in range(m)]
        s = [2 * f[i // 2] + i % 2 for i in range(n)]
        val = _random_val(rng, n, up, spec.atoms)
        return Model.from_arrays(world_names(n), up, s, val)
    for _ in range(max_tries):
        n = rng.randint(max(1, spec.min_worlds), spec.max_worlds)
        up, perm = _random_order(rng, n, tree=spec.class_filter == "finite_tree_order")
        s = _random_succ(rng, n, up, perm)
        if s is None:
            continue
        if spec.class_filter == "persistent" and not _backward_confluent(n, up, s):
            continue
        val = _random_val(rng, n, up, spec.atoms)
        model = Model.from_arrays(world_names(n), up, s, val)
        return model
    raise ITLError(f"random_model gave up after {max_tries} rejections")


def random_models(spec: SearchSpec, count: int) -> list[Model]:
    """``count`` models from consecutive seeds starting at ``spec.seed``."""
    out = []
    for k in range(count):
        out.append(random_model(SearchSpec(spec.max_worlds, spec.atoms, spec.class_filter, spec.mode, spec.seed + k, spec.min_worlds)))
    return out


def passes_filter(model: Model, class_filter: str) -> bool:
    rep = validate(model)
    if not rep.ok:
        return False
    if class_filter == "persistent":
        return rep.is_persistent
    if class_filter == "here_and_there":
        return rep.is_here_and_there
    if class_filter == "finite_tree_order":
        return _is_tree_order(model.n, model.up)
    return True
