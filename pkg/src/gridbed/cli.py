"""Command line entry point.

Exit codes: 0 yes/valid, 1 no/invalid, 2 unknown (budget exhausted), 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .dispatch import ALGORITHMS, default_budget, solve_dispatch
from .embedding import GridEmbedding, distance_approximation, validate
from .formats import (
    FormatError,
    LabelledGraph,
    parse_3partition,
    parse_batteries,
    parse_dimacs,
    parse_embedding,
    parse_graph,
    serialize_batteries,
    serialize_embedding,
    serialize_graph,
    serialize_placement,
)
from .graph import is_connected
from .oracle import Answer, min_distance_approximation
from .reductions import (
    STRIP_METHODS,
    assignment_to_placement,
    batteries_brute_force,
    construct_3partition_witness,
    construct_batteries_witness,
    construct_naesat_witness,
    reduce_3partition,
    reduce_batteries_to_grid,
    reduce_naesat,
    reduce_sat_to_batteries,
    strip_pack,
    three_partition_brute_force,
)
from .render import render_ascii, render_svg, save_figure

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3
EXIT_OF = {Answer.YES: EXIT_YES, Answer.NO: EXIT_NO, Answer.UNKNOWN: EXIT_UNKNOWN}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors, not the 'unknown' exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _rect(s: str) -> tuple[int, int]:
    try:
        h, w = (int(x) for x in s.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"rectangles are written HxW, got {s!r}") from None
    if h < 1 or w < 1:
        raise argparse.ArgumentTypeError("rectangle sides must be positive")
    return h, w


def _load_graph(path: str) -> LabelledGraph:
    return parse_graph(_read(path))


def _load_embedding(path: str, lg: LabelledGraph, k: int | None = None, r: int | None = None) -> GridEmbedding:
    f = parse_embedding(_read(path), k, r, labels=lg.labels)
    missing = set(range(lg.graph.n)) - set(f.pos)
    if missing:
        names = ", ".join(lg.labels[v] for v in sorted(missing)[:5])
        raise FormatError(f"embedding misses {len(missing)} vertices ({names})")
    return f


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args: argparse.Namespace) -> int:
    lg = _load_graph(args.graph)
    budget = args.budget if args.budget is not None else default_budget()
    try:
        d = solve_dispatch(lg.graph, args.k, args.r, args.algo, budget)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = d.result
    lines = [f"answer: {res.answer.value}", f"algorithm: {d.algorithm}",
             "attempts: " + " ".join(f"{n}={a}" for n, a in d.attempts)]
    if "reason" in res.stats:
        lines.append(f"reason: {res.stats['reason']}")
    if res.yes:
        lines.append(f"a: {d.a_f if d.a_f is not None else '-'}")
        lines.append(f"witness: {args.output if args.output else 'stdout'}")
    sys.stdout.write("\n".join(lines) + "\n")
    if res.yes:
        _write(args.output, serialize_embedding(res.witness, lg.labels))
        if args.figure:
            save_figure(res.witness, lg.graph, args.figure, lg.labels)
    if args.report:
        report = {"answer": res.answer.value, "algorithm": d.algorithm, "attempts": d.attempts,
                  "a": d.a_f, "k": args.k, "r": args.r, "budget": budget, "witness": args.output,
                  "stats": {key: val for key, val in res.stats.items() if isinstance(val, (int, float, str, list))}}
        _write(args.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OF[res.answer] if res.answer in EXIT_OF else EXIT_INPUT


def cmd_check(args: argparse.Namespace) -> int:
    lg = _load_graph(args.graph)
    f = _load_embedding(args.embedding, lg, args.k, args.r)
    chk = validate(lg.graph, f)
    if not chk:
        print(f"invalid: {chk.reason}")
        return EXIT_NO
    print(f"valid: {f.k}x{f.r}")
    if is_connected(lg.graph):
        print(f"a: {distance_approximation(lg.graph, f).a_f}")
    return EXIT_YES


def cmd_afparam(args: argparse.Namespace) -> int:
    lg = _load_graph(args.graph)
    g = lg.graph
    if not is_connected(g):
        raise InputError("the distance approximation needs a connected graph")
    if args.embedding:
        f = _load_embedding(args.embedding, lg, args.k, args.r)
        chk = validate(g, f)
        if not chk:
            raise InputError(f"invalid embedding: {chk.reason}")
        rep = distance_approximation(g, f)
        u, v = rep.witness_pair
        print(f"a_f: {rep.a_f}")
        print(f"pair: {lg.labels[u]} {lg.labels[v]}")
        return EXIT_YES
    if args.k is None or args.r is None:
        raise InputError("without an embedding, give -k and -r to minimise over all embeddings")
    budget = args.budget if args.budget is not None else default_budget()
    best = min_distance_approximation(g, args.k, args.r, budget=budget)
    if best is None:
        print("a_G: unknown")
        return EXIT_UNKNOWN
    print(f"a_G: {best}")
    return EXIT_YES if best < g.n else EXIT_NO


def cmd_gen(args: argparse.Namespace) -> int:
    found = True
    if args.kind == "sat2batteries":
        pi = parse_dimacs(_read(args.input))
        b = reduce_sat_to_batteries(pi)
        _write(args.output, serialize_batteries(b))
        if args.with_witness:
            alpha = next(pi.solutions(), None)
            found = alpha is not None
            if found:
                _write(args.with_witness, serialize_placement(assignment_to_placement(alpha, b.rows)))
    elif args.kind == "batteries2grid":
        b = parse_batteries(_read(args.input))
        red = reduce_batteries_to_grid(b)
        _write(args.output, serialize_graph(red.graph, red.labels, [f"grid {red.k} {red.r}"]))
        if args.with_witness:
            sol = batteries_brute_force(b)
            found = sol.placement is not None
            if found:
                _write(args.with_witness, serialize_embedding(construct_batteries_witness(b, sol.placement),
                                                              red.labels))
    elif args.kind == "3partition":
        w = parse_3partition(_read(args.input))
        try:
            red3 = reduce_3partition(w, normalize=not args.no_normalize)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        _write(args.output, serialize_graph(red3.graph, red3.labels, [f"grid {red3.k} {red3.r}"]))
        if args.with_witness:
            part = three_partition_brute_force(w)
            found = part is not None
            if found:
                f = construct_3partition_witness(w, part, normalize=not args.no_normalize)
                _write(args.with_witness, serialize_embedding(f, red3.labels))
    else:
        pi = parse_dimacs(_read(args.input), nae=True)
        try:
            redn = reduce_naesat(pi)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        _write(args.output, serialize_graph(redn.graph, redn.labels, [f"grid {redn.k} {redn.r}"]))
        if args.with_witness:
            alpha = next(pi.solutions(), None)
            found = alpha is not None
            if found:
                _write(args.with_witness, serialize_embedding(construct_naesat_witness(pi, alpha), redn.labels))
    if not found:
        print("no witness: the source instance has no solution", file=sys.stderr)
        return EXIT_NO
    return EXIT_YES


def cmd_strip_pack(args: argparse.Namespace) -> int:
    budget = args.budget if args.budget is not None else default_budget()
    res = strip_pack(args.rects, args.k, args.width, budget=budget, method=args.method)
    print(f"answer: {res.answer.value}")
    if res.yes:
        for t, (a, b, h, w) in enumerate(res.stats["placements"]):
            print(f"rect {t} {args.rects[t][0]}x{args.rects[t][1]}: row {a} col {b} size {h}x{w}")
    return EXIT_OF[res.answer]


def cmd_render(args: argparse.Namespace) -> int:
    lg = _load_graph(args.graph)
    f = _load_embedding(args.embedding, lg)
    try:
        if args.format == "svg":
            text = render_svg(f, lg.graph, lg.labels)
        else:
            text = render_ascii(f, lg.graph) + "\n"
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(args.output, text)
    if args.figure:
        save_figure(f, lg.graph, args.figure, lg.labels)
    return EXIT_YES


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridbed", description="Decide and draw k x r grid embeddings of graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="decide whether GRAPH embeds in a k x r grid")
    s.add_argument("graph")
    s.add_argument("-k", type=_positive, required=True, help="number of rows")
    s.add_argument("-r", type=_positive, required=True, help="number of columns")
    s.add_argument("--algo", choices=ALGORITHMS, default="auto")
    s.add_argument("--budget", type=_positive, help="node budget per solver (default: $GRIDBED_BUDGET)")
    s.add_argument("-o", "--output", help="witness embedding file (default: stdout)")
    s.add_argument("--report", help="write a JSON report")
    s.add_argument("--figure", help="also draw the witness with matplotlib (png, pdf, svg)")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="validate an embedding file against GRAPH")
    c.add_argument("graph")
    c.add_argument("embedding")
    c.add_argument("-k", type=_positive)
    c.add_argument("-r", type=_positive)
    c.set_defaults(func=cmd_check)

    a = sub.add_parser("afparam", help="distance approximation of an embedding, or its minimum over a grid")
    a.add_argument("graph")
    a.add_argument("embedding", nargs="?")
    a.add_argument("-k", type=_positive)
    a.add_argument("-r", type=_positive)
    a.add_argument("--budget", type=_positive)
    a.set_defaults(func=cmd_afparam)

    g = sub.add_parser("gen", help="generate hardness-reduction instances")
    g.add_argument("kind", choices=("sat2batteries", "batteries2grid", "3partition", "naesat"))
    g.add_argument("input", help="DIMACS CNF, batteries or 3-partition file")
    g.add_argument("-o", "--output", help="instance file (default: stdout)")
    g.add_argument("--with-witness", metavar="PATH", help="also write the certified witness")
    g.add_argument("--no-normalize", action="store_true", help="3partition: use the weights as given")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("strip-pack", help="pack rectangles HxW into a k x width strip")
    t.add_argument("rects", nargs="+", type=_rect)
    t.add_argument("-k", type=_positive, required=True, help="strip height")
    t.add_argument("-w", "--width", type=_positive, required=True, help="strip width")
    t.add_argument("--budget", type=_positive)
    t.add_argument("--method", choices=STRIP_METHODS, default="components",
                   help="whole-rectangle search or the generic grid solvers")
    t.set_defaults(func=cmd_strip_pack)

    d = sub.add_parser("render", help="draw an embedding as ASCII or SVG")
    d.add_argument("graph")
    d.add_argument("embedding")
    d.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    d.add_argument("-o", "--output")
    d.add_argument("--figure", help="also draw with matplotlib (png, pdf, svg)")
    d.set_defaults(func=cmd_render)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FormatError, ValueError) as exc:
        print(f"gridbed: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"gridbed: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
