"""Command-line interface.

Exit codes: 0 verdict true, 1 verdict false, 2 unknown (a budget ran out),
3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from .automata import DEFAULT_STATE_BUDGET, ExtractorAutomaton, format_automaton, parse_automaton
from .errors import ContractError, ParseError, ResourceLimitError
from .expr import compile_expr, parse_expr_file
from .grammar import DEFAULT_ROW_BUDGET, ExtractorGrammar, format_grammar, parse_grammar
from .markers import GammaTuple
from .oracle import oracle_eval
from .problems import ProblemAnswer, evaluate, table_contains, table_disjoint, table_empty, table_equiv, tuple_member
from .reductions import parse_dimacs, parse_pcp, pcp_to_disjointness, sat_to_containment

EXIT_TRUE, EXIT_FALSE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_extractor(text: str, state_budget: int = DEFAULT_STATE_BUDGET) -> ExtractorAutomaton | ExtractorGrammar:
    """Parse an automaton, grammar or expression file, telling them apart by their headers."""
    keys = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" in line and not line.lower().startswith("expr:"):
            keys.add("->")
        keys.add(line.partition(":")[0].strip().lower())
    if "expr" in keys:
        e, ctx = parse_expr_file(text)
        M = compile_expr(e, ctx.sigma, state_budget)
        return M.with_context(ctx)
    if "initial" in keys or "states" in keys:
        return parse_automaton(text)
    if "->" in keys or "start" in keys:
        return parse_grammar(text)
    raise ParseError("cannot tell the file type: expected 'initial:', 'expr:' or grammar rules")


def _document(arg: str) -> str:
    if arg.startswith("@"):
        return _read(arg[1:]).rstrip("\n")
    return arg


def _print_answer(answer: ProblemAnswer) -> int:
    print(json.dumps(answer.to_json(), sort_keys=True))
    if answer.verdict is None:
        return EXIT_UNKNOWN
    return EXIT_TRUE if answer.verdict else EXIT_FALSE


# -- subcommands ---------------------------------------------------------------------


def _render_table(E, w: str, fmt: str, header: bool, limit: int | None, budget: int) -> str:
    T = evaluate(E, w, limit=limit, budget=budget)
    if fmt == "csv":
        return (f"# document: {w}\n" if header else "") + T.to_csv()
    return json.dumps({"document": w, "count": len(T), "rows": T.to_json()}, sort_keys=True) + "\n"


def cmd_eval(args) -> int:
    E = load_extractor(_read(args.extractor), args.state_budget)
    docs = [_document(arg) for arg in args.documents]
    header = len(docs) > 1
    render = partial(_render_table, E, fmt=args.format, header=header, limit=args.limit, budget=args.budget)
    if args.jobs > 1 and len(docs) > 1:
        # map keeps input order; each document's output is buffered whole
        with ProcessPoolExecutor(max_workers=min(args.jobs, len(docs))) as pool:
            outputs = pool.map(render, docs)
            for text in outputs:
                sys.stdout.write(text)
    else:
        for w in docs:
            sys.stdout.write(render(w))
    return EXIT_TRUE


def cmd_member(args) -> int:
    E = load_extractor(_read(args.extractor), args.state_budget)
    w = _document(args.document)
    try:
        raw = json.loads(args.tuple)
    except json.JSONDecodeError as exc:
        raise ParseError(f"tuple is not valid JSON: {exc.msg}", 1, exc.colno) from None
    if not isinstance(raw, dict):
        raise ParseError("tuple must be a JSON object mapping attributes to position lists")
    full = {x: () for x in E.context.gamma}
    full.update(raw)
    t = GammaTuple.make(full, len(w))
    verdict = tuple_member(E, w, t)
    print(json.dumps({"problem": "member", "verdict": verdict}))
    return EXIT_TRUE if verdict else EXIT_FALSE


def cmd_empty(args) -> int:
    E = load_extractor(_read(args.extractor), args.state_budget)
    return _print_answer(table_empty(E, _document(args.document)))


def _pair(args):
    E1 = load_extractor(_read(args.first), args.state_budget)
    E2 = load_extractor(_read(args.second), args.state_budget)
    return E1, E2, _document(args.document)


def cmd_disjoint(args) -> int:
    E1, E2, w = _pair(args)
    return _print_answer(table_disjoint(E1, E2, w, args.budget))


def cmd_contains(args) -> int:
    E1, E2, w = _pair(args)
    return _print_answer(table_contains(E1, E2, w, args.budget, args.state_budget))


def cmd_equiv(args) -> int:
    E1, E2, w = _pair(args)
    return _print_answer(table_equiv(E1, E2, w, args.budget, args.state_budget))


def cmd_compile(args) -> int:
    text = _read(args.expression)
    e, ctx = parse_expr_file(text)
    M = compile_expr(e, ctx.sigma, args.state_budget).with_context(ctx)
    out = format_automaton(M)
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return EXIT_TRUE


def cmd_verify(args) -> int:
    E = load_extractor(_read(args.extractor), args.state_budget)
    w = _document(args.document)
    engine = evaluate(E, w, budget=args.budget)
    expected = oracle_eval(E, w)
    agree = engine == expected
    record = {
        "document": w,
        "agree": agree,
        "engine_rows": len(engine),
        "oracle_rows": len(expected),
    }
    if not agree:
        record["only_engine"] = [t.to_json() for t in sorted(engine.rows - expected.rows, key=GammaTuple.sort_key)]
        record["only_oracle"] = [t.to_json() for t in sorted(expected.rows - engine.rows, key=GammaTuple.sort_key)]
    print(json.dumps(record, sort_keys=True))
    return EXIT_TRUE if agree else EXIT_FALSE


def cmd_reduce(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    text = _read(args.instance)
    if args.kind == "sat":
        M1, M2, w = sat_to_containment(parse_dimacs(text))
        files = {"m1.aut": format_automaton(M1), "m2.aut": format_automaton(M2)}
    else:
        G1, G2, w = pcp_to_disjointness(parse_pcp(text))
        files = {"g1.cfg": format_grammar(G1), "g2.cfg": format_grammar(G2)}
    files["document.txt"] = w + "\n"
    for name, content in files.items():
        (out / name).write_text(content)
    print(json.dumps({"kind": args.kind, "document": w, "files": sorted(str(out / n) for n in files)}))
    return EXIT_TRUE


# -- argument parsing --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="extractkit", description="Evaluate and decide problems about regular and context-free extractors.")
    parser.add_argument("--budget", type=int, default=DEFAULT_ROW_BUDGET, help="row budget for enumeration (default %(default)s)")
    parser.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET, help="state budget for subset constructions (default %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="print the table E(w) for each document")
    p.add_argument("extractor")
    p.add_argument("documents", nargs="+", metavar="document", help="document string, or @file")
    p.add_argument("--format", choices=["rows", "csv"], default="rows")
    p.add_argument("--limit", type=int, default=None, help="print at most this many rows")
    p.add_argument("--jobs", type=int, default=1, help="evaluate documents in this many processes; output keeps input order")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("member", help="is a tuple a row of E(w)?")
    p.add_argument("extractor")
    p.add_argument("document")
    p.add_argument("tuple", help='JSON object, e.g. \'{"x": [1, 3]}\'; missing attributes are empty')
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("empty", help="is E(w) empty?")
    p.add_argument("extractor")
    p.add_argument("document")
    p.set_defaults(func=cmd_empty)

    for name, func, text in (
        ("disjoint", cmd_disjoint, "are E1(w) and E2(w) disjoint?"),
        ("contains", cmd_contains, "is E1(w) a subset of E2(w)?"),
        ("equiv", cmd_equiv, "are E1(w) and E2(w) equal?"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("first")
        p.add_argument("second")
        p.add_argument("document")
        p.set_defaults(func=func)

    p = sub.add_parser("compile", help="compile an expression file into an automaton file")
    p.add_argument("expression")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="cross-check the engine against the brute-force oracle")
    p.add_argument("extractor")
    p.add_argument("document")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="write hardness-reduction fixtures")
    p.add_argument("kind", choices=["sat", "pcp"])
    p.add_argument("instance", help="DIMACS file for sat, 'bound: k' plus pair lines for pcp")
    p.add_argument("-o", "--output", required=True, help="directory for the generated files")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"extractkit: unknown: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (ParseError, ContractError, UsageError) as exc:
        print(f"extractkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
