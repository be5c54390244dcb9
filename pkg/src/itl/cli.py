"""Command-line entry point: ``itl <command> [options]``.

Exit status is 0 when the check holds, 1 when a witness or violation was
found and 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds as B
from .errors import ITLError
from .formula import Fragment, next_normal_form, parse, render, translate
from .model import eval as model_eval
from .model import truth_set, validate

OK, FOUND, USAGE = 0, 1, 2


class _Out:
    """Collects report lines; machine format keeps key=value records only."""

    def __init__(self, machine: bool):
        self.machine = machine
        self.lines = []

    def kv(self, key, value):
        self.lines.append(f"{key}={_fmt(value)}")

    def text(self, human, key=None, value=None):
        if self.machine:
            if key is not None:
                self.kv(key, value)
        else:
            self.lines.append(human)

    def block(self, name, body):
        # embedded documents (models, trees) are framed the same way in both formats
        if self.machine:
            self.lines.append(f"begin={name}")
            self.lines.extend(body.rstrip("\n").splitlines())
            self.lines.append(f"end={name}")
        else:
            self.lines.append(body.rstrip("\n"))

    def flush(self):
        if self.lines:
            sys.stdout.write("\n".join(self.lines) + "\n")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple, set, frozenset)):
        return ",".join(str(x) for x in v)
    return str(v)


# ---------------------------------------------------------------- input helpers


def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ITLError(f"cannot read {path}: {exc.strerror}") from None


def _add_model_args(p, positional=True):
    if positional:
        p.add_argument("source", nargs="?", help="model file, or - for stdin")
    p.add_argument("--model", help="model file, or - for stdin")
    p.add_argument("--builtin", "--name", dest="builtin", help="builtin model name")
    p.add_argument("--n", type=int, help="size parameter of the builtin")


def _load_model(args):
    from .families import builtin_model
    from .textio import model_from_text
    path = args.model or getattr(args, "source", None)
    if args.builtin and path:
        raise ITLError("give either a model file or --builtin, not both")
    if args.builtin:
        return builtin_model(args.builtin, args.n)
    if not path:
        raise ITLError("no model given (file, - or --builtin)")
    return model_from_text(_read(path))


def _world(M, w):
    if w not in M.index:
        raise ITLError(f"unknown world {w!r}")
    return w


def _sorted_worlds(M, ws):
    return [w for w in M.worlds if w in ws]


# ---------------------------------------------------------------- commands


def cmd_check(args, out):
    M = _load_model(args)
    phi = parse(args.formula)
    if args.world is None:
        ws = _sorted_worlds(M, truth_set(M, phi))
        out.text(" ".join(ws), "truth_set", ws)
        return OK
    value = model_eval(M, _world(M, args.world), phi)
    out.text(_fmt(value), "result", value)
    return OK if value else FOUND


def cmd_classify(args, out):
    M = _load_model(args)
    rep = validate(M)
    for key, value in rep.flags().items():
        out.kv(key, value)
    if rep.columns is not None and rep.is_here_and_there:
        out.kv("columns", [f"{a}/{b}" for a, b in rep.columns])
    for v in rep.violations:
        out.kv("violation", v)
    return OK if rep.ok else FOUND


def cmd_decide(args, out):
    from .oracle import SearchSpec, bounded_decide
    from .textio import model_to_text
    phi = parse(args.formula)
    atoms = _split(args.atoms) if args.atoms is not None else sorted(_atoms(phi))
    spec = SearchSpec(args.max_worlds, frozenset(atoms), args.class_filter, args.mode, args.seed)
    verdict = bounded_decide(phi, spec, args.jobs)
    out.kv("outcome", verdict.outcome)
    out.kv("models_checked", verdict.models_checked)
    if verdict.witness is None:
        return OK
    model, w = verdict.witness
    out.kv("world", w)
    out.block("model", model_to_text(model))
    return FOUND


def _atoms(phi):
    from .formula import atoms_of
    return atoms_of(phi)


def _split(text):
    return [t for t in text.replace(",", " ").split() if t]


def _two_models(args):
    from .families import builtin_model
    from .textio import model_from_text
    if args.canonical:
        M = builtin_model(args.canonical, args.n)
        return M, M
    if not (args.model1 and args.model2):
        raise ITLError("bisim needs --model1 and --model2, or --canonical")
    M1 = model_from_text(_read(args.model1))
    M2 = M1 if args.model2 == args.model1 else model_from_text(_read(args.model2))
    return M1, M2


def cmd_bisim(args, out):
    from .bisim import check_family, max_family
    from .families import canonical_family
    from .textio import family_from_text, family_to_text
    M1, M2 = _two_models(args)
    if args.family:
        F = family_from_text(_read(args.family), args.flavor)
    elif args.canonical and args.max is None:
        F = canonical_family(args.canonical, args.n).family
    else:
        depth = args.max if args.max is not None else 0
        F = max_family(M1, M2, depth, args.flavor or "next", args.horizon)
        if args.pair:
            a, b = _pair(args.pair)
            out.kv("level", F.level_of((a, b)))
        else:
            out.block("family", family_to_text(F))
        return OK
    res = check_family(M1, M2, F, args.horizon)
    out.kv("flavor", F.flavor)
    out.kv("levels", len(F.levels))
    out.kv("ok", res.ok)
    for clause, lev, pair in res.violations[:args.limit]:
        out.kv("violation", f"{clause} level={lev} pair=({pair[0]},{pair[1]})")
    if args.pair:
        out.kv("level", F.level_of(_pair(args.pair)))
    return OK if res.ok else FOUND


def _pair(text):
    parts = _split(text.strip("()"))
    if len(parts) != 2:
        raise ITLError(f"expected a pair 'w,v', got {text!r}")
    return parts[0], parts[1]


def cmd_gen(args, out):
    from .families import builtin_model, canonical_family
    from .textio import family_to_text, model_to_text
    if args.family:
        if not args.builtin:
            raise ITLError("--family needs --name ht or --name diam")
        out.block("family", family_to_text(canonical_family(args.builtin, args.n).family))
        return OK
    if args.builtin:
        out.block("model", model_to_text(builtin_model(args.builtin, args.n)))
        return OK
    from .oracle import SearchSpec, random_model
    spec = SearchSpec(args.worlds, frozenset(_split(args.atoms)), args.class_filter, seed=args.seed)
    out.block("model", model_to_text(random_model(spec)))
    return OK


def cmd_translate(args, out):
    phi = parse(args.formula)
    if args.to in ("next-normal", "nnf"):
        res = next_normal_form(phi)
    else:
        res = translate(phi, Fragment.from_name(args.to))
    out.text(render(res, unicode=args.unicode), "formula", render(res, unicode=args.unicode))
    return OK


def cmd_bounds(args, out):
    cap = args.cap_bits
    done = False
    if args.e is not None:
        out.text(B.render(B.e_number(*args.e, cap_bits=cap)), "e", B.render(B.e_number(*args.e, cap_bits=cap)))
        done = True
    if args.q is not None:
        out.text(B.render(B.q_number(*args.q, cap_bits=cap)), "q", B.render(B.q_number(*args.q, cap_bits=cap)))
        done = True
    if args.fmp is not None:
        out.text(B.render(B.fmp_bound(args.fmp, cap)), "fmp", B.render(B.fmp_bound(args.fmp, cap)))
        done = True
    if args.good is not None:
        val = B.good_length_bound(args.good, cap)
        out.text(B.render(val), "good", B.render(val))
        done = True
    if not done:
        raise ITLError("bounds needs --e, --q, --fmp or --good")
    return OK


def cmd_condense(args, out):
    from .combinat import condense_checked, relabel_nodes
    from .textio import tree_from_text, tree_to_text
    T, point = tree_from_text(_read(args.source))
    point = args.point or point
    res = condense_checked(T, point)
    tree, names = relabel_nodes(res.tree, "c")
    out.kv("source_nodes", len(T.nodes))
    out.kv("nodes", len(tree.nodes))
    out.kv("level", res.source_level)
    out.block("tree", tree_to_text(tree, None if res.point is None else names[res.point]))
    for v in T.nodes:
        out.kv("rho", f"{v}:{names[res.rho[v]]}")
    for path in res.tree.nodes:
        out.kv("iota", f"{names[path]}:{res.iota[path]}")
    return OK


def cmd_stratify(args, out):
    from .strat import check_state, stratify_bounded
    from .textio import stratified_to_text
    M = _load_model(args)
    sigma = [parse(f) for f in args.sigma] if args.sigma else []
    S, st = stratify_bounded(M, _world(M, args.world), sigma, args.rounds, args.horizon, args.strategy)
    chk = check_state(st, M)
    for y in range(st.horizon + 1):
        row = " ".join(f"({x},{w})" for x, w in st.images(y))
        out.text(f"row {y}: {row}", f"row{y}", [f"{x}:{w}" for x, w in st.images(y)])
    out.kv("repairs", len(st.repairs))
    out.kv("complete", st.complete)
    out.kv("invariants", chk.ok)
    for v in chk.violations[:args.limit]:
        out.kv("violation", v)
    if args.emit:
        out.block("model", stratified_to_text(S))
    return OK if chk.ok else FOUND


def cmd_line(args, out):
    from .symline import line_eval, line_truth_set, parse_world
    phi = parse(args.formula)
    if args.world is None:
        s = line_truth_set(phi, args.free_atoms_false)
        out.text(str(s), "truth_set", str(s))
        return OK
    value = line_eval(parse_world(args.world), phi, args.free_atoms_false)
    out.text(_fmt(value), "result", value)
    return OK if value else FOUND


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    from .oracle import CLASSES, MODES
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"), default="human")

    ap = argparse.ArgumentParser(prog="itl", description="Intuitionistic temporal logic toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="evaluate a formula on a model")
    _add_model_args(p)
    p.add_argument("--world")
    p.add_argument("--formula", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("classify", parents=[common], help="report the frame classes of a model")
    _add_model_args(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("decide", parents=[common], help="search all small models for a countermodel")
    p.add_argument("--formula", required=True)
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--atoms", help="atoms to vary (default: those of the formula)")
    p.add_argument("--class", dest="class_filter", choices=CLASSES, default="all")
    p.add_argument("--mode", choices=MODES, default="validity")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_decide)

    p = sub.add_parser("bisim", parents=[common], help="check or compute bounded bisimulations")
    p.add_argument("--model1")
    p.add_argument("--model2")
    p.add_argument("--canonical", choices=("ht", "diam"))
    p.add_argument("--n", type=int)
    p.add_argument("--family", help="family file to check")
    p.add_argument("--max", type=int, help="compute the largest family of this depth")
    p.add_argument("--flavor", choices=("next", "until", "release"))
    p.add_argument("--pair", help="report the highest level containing w,v")
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(fn=cmd_bisim)

    p = sub.add_parser("gen", parents=[common], help="emit a builtin, a canonical family or a random model")
    p.add_argument("--builtin", "--name", dest="builtin")
    p.add_argument("--n", type=int)
    p.add_argument("--family", action="store_true")
    p.add_argument("--worlds", type=int, default=3)
    p.add_argument("--atoms", default="p")
    p.add_argument("--class", dest="class_filter", choices=CLASSES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("translate", parents=[common], help="rewrite a formula into another fragment")
    p.add_argument("--formula", required=True)
    p.add_argument("--to", required=True, help="BoxU, DiamR or next-normal")
    p.add_argument("--unicode", action="store_true")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("bounds", parents=[common], help="evaluate the size recurrences")
    p.add_argument("--e", type=int, nargs=2, metavar=("N", "K"))
    p.add_argument("--q", type=int, nargs=2, metavar=("N", "K"))
    p.add_argument("--fmp", type=int, metavar="S")
    p.add_argument("--good", type=int, metavar="N")
    p.add_argument("--cap-bits", type=int, default=B.DEFAULT_CAP_BITS)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("condense", parents=[common], help="condense a labelled tree")
    p.add_argument("source", help="tree file, or - for stdin")
    p.add_argument("--point")
    p.set_defaults(fn=cmd_condense)

    p = sub.add_parser("stratify", parents=[common], help="run the bounded stratifier")
    _add_model_args(p)
    p.add_argument("--world", required=True)
    p.add_argument("--sigma", action="append", help="formula of the label set (repeatable)")
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--strategy", choices=("saturate", "diagonal"), default="saturate")
    p.add_argument("--emit", action="store_true", help="also print the truncated stratified model")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(fn=cmd_stratify)

    p = sub.add_parser("line", parents=[common], help="evaluate on the integer line with a root")
    p.add_argument("--world", help="r or an integer (omit for the whole truth set)")
    p.add_argument("--formula", required=True)
    p.add_argument("--free-atoms-false", action="store_true")
    p.set_defaults(fn=cmd_line)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    out = _Out(args.format == "machine")
    try:
        code = args.fn(args, out)
    except (ITLError, ValueError) as exc:
        print(f"itl: error: {exc}", file=sys.stderr)
        return USAGE
    out.flush()
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
