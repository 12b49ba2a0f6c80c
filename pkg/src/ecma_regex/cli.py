"""Command-line surface.

Exit codes: `match` uses 0 match / 1 no-match / 2 pattern error. The suite
commands (fuzz, diff, corpus, check-rewrite) use 0 pass, 1 violations or
counterexample, 2 infrastructure error. Input strings accept the corpus escape
syntax (\\xHH, \\uHHHH) so surrogate and non-ASCII tests stay shell-portable.
"""

from __future__ import annotations

import argparse
import json
import sys

from .ast import Flags
from .compiler import ResourceLimit, compile_pattern
from .early_errors import validate
from .executor import exec_pattern
from .harness import (
    FuzzConfig,
    OracleUnavailable,
    decode_escapes,
    differential_run,
    generate_cases,
    bundled_corpus_lines,
    run_corpus,
    run_invariant_suite,
)
from .optimizer import check_equivalence, rewrite_strictly_nullable_stars
from .parser import DecodeError, ParseError, ast_from_json, ast_to_json, parse_pattern, to_pattern_string


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except OracleUnavailable as exc:
        print(f"oracle unavailable: {exc}", file=sys.stderr)
        return 2
    except (ParseError, DecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecma-regex",
        description="ECMAScript regular-expression semantics, executable",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("match", help="run one exec and print the record")
    p.add_argument("pattern")
    p.add_argument("input")
    p.add_argument("--flags", default="")
    p.add_argument("--start", type=int, default=0, help="lastIndex in code units")
    p.add_argument("--json", action="store_true", help="(default; kept for symmetry)")
    p.set_defaults(handler=cmd_match)

    p = sub.add_parser("test", help="boolean match from position 0")
    p.add_argument("pattern")
    p.add_argument("input")
    p.add_argument("--flags", default="")
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("ast", help="dump the parsed AST as JSON")
    p.add_argument("pattern", nargs="?")
    p.add_argument("--flags", default="")
    p.add_argument("--from-json", metavar="FILE", help="decode an AST file and reprint it")
    p.set_defaults(handler=cmd_ast)

    p = sub.add_parser("validate", help="report early errors")
    p.add_argument("pattern")
    p.add_argument("--flags", default="")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("fuzz", help="seeded invariant fuzzing (optionally differential)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--alphabet", default="abc")
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--oracle-cmd", help="also cross-check against this oracle command")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_fuzz)

    p = sub.add_parser("diff", help="differential run against an oracle process")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--alphabet", default="abc")
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--oracle-cmd", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_diff)

    p = sub.add_parser("check-rewrite", help="brute-force equivalence of two patterns")
    p.add_argument("pattern_a")
    p.add_argument("pattern_b")
    p.add_argument("--flags", default="")
    p.add_argument("--alphabet", default="ab")
    p.add_argument("--max-len", type=int, default=3)
    p.set_defaults(handler=cmd_check_rewrite)

    p = sub.add_parser("rewrite", help="apply the strictly-nullable star elimination")
    p.add_argument("pattern")
    p.add_argument("--flags", default="")
    p.set_defaults(handler=cmd_rewrite)

    p = sub.add_parser("corpus", help="run a conformance corpus file")
    p.add_argument("file", nargs="?", help="defaults to the bundled corpus")
    p.set_defaults(handler=cmd_corpus)

    return parser


def _compile_checked(pattern: str, flag_letters: str):
    flags = Flags.parse(flag_letters)
    node = parse_pattern(pattern, flags)
    errors = validate(node, flags)
    if errors:
        for err in errors:
            print(err.render(), file=sys.stderr)
        return None, None
    return compile_pattern(node, flags), flags


def cmd_match(args) -> int:
    compiled, _ = _compile_checked(args.pattern, args.flags)
    if compiled is None:
        return 2
    try:
        record = exec_pattern(compiled, decode_escapes(args.input), args.start)
    except ResourceLimit:
        print("error: backtracking step budget exhausted", file=sys.stderr)
        return 2
    if record is None:
        print(json.dumps({"matched": False}))
        return 1
    print(json.dumps(record.to_json_dict(), ensure_ascii=True))
    return 0


def cmd_test(args) -> int:
    compiled, _ = _compile_checked(args.pattern, args.flags)
    if compiled is None:
        return 2
    from .executor import test_pattern

    ok = test_pattern(compiled, decode_escapes(args.input))
    print("true" if ok else "false")
    return 0 if ok else 1


def cmd_ast(args) -> int:
    if args.from_json:
        with open(args.from_json, encoding="utf-8") as f:
            node, flags = ast_from_json(f.read())
    else:
        if args.pattern is None:
            print("error: a pattern or --from-json is required", file=sys.stderr)
            return 2
        flags = Flags.parse(args.flags)
        node = parse_pattern(args.pattern, flags)
    print(ast_to_json(node, flags))
    return 0


def cmd_validate(args) -> int:
    flags = Flags.parse(args.flags)
    node = parse_pattern(args.pattern, flags)
    errors = validate(node, flags)
    if not errors:
        print("ok")
        return 0
    for err in errors:
        print(err.render())
    return 1


def _config_from_args(args) -> FuzzConfig:
    return FuzzConfig(
        seed=args.seed,
        case_count=args.cases,
        alphabet=tuple(args.alphabet),
        max_input_len=args.max_len,
        max_regex_depth=args.depth,
    )


def cmd_fuzz(args) -> int:
    cases = generate_cases(_config_from_args(args))
    report = run_invariant_suite(cases)
    exit_code = 0 if report.passed else 1
    if args.oracle_cmd:
        diff = differential_run(cases, args.oracle_cmd.split())
        if args.json:
            print(json.dumps({"invariants": report.to_json_dict(), "diff": diff.to_json_dict()}))
        else:
            print(report.summary())
            print(diff.summary())
        if not diff.passed:
            exit_code = 1
        return exit_code
    if args.json:
        print(json.dumps(report.to_json_dict()))
    else:
        print(report.summary())
        for v in report.violations[:20]:
            print(f"  case {v.case_id} seed {v.seed}: {v.kind} {v.detail}")
            print(f"    repro: {v.repro}")
    return exit_code


def cmd_diff(args) -> int:
    cases = generate_cases(_config_from_args(args))
    report = differential_run(cases, args.oracle_cmd.split())
    if args.json:
        print(json.dumps(report.to_json_dict()))
    else:
        print(report.summary())
        for d in report.disagreements[:20]:
            print(f"  case {d.case_id} /{d.pattern}/{d.flags} on {d.input!r}@{d.last_index}")
            print(f"    ours:   {json.dumps(d.ours)}")
            print(f"    oracle: {json.dumps(d.oracle)}")
            print(f"    repro:  {d.repro}")
    return 0 if report.passed else 1


def cmd_check_rewrite(args) -> int:
    flags = Flags.parse(args.flags)
    a = parse_pattern(args.pattern_a, flags)
    b = parse_pattern(args.pattern_b, flags)
    report = check_equivalence(a, b, flags, decode_escapes(args.alphabet), args.max_len)
    print(json.dumps(report.to_json_dict()))
    return 0 if report.equivalent else 1


def cmd_rewrite(args) -> int:
    flags = Flags.parse(args.flags)
    node = parse_pattern(args.pattern, flags)
    rewritten = rewrite_strictly_nullable_stars(node)
    print(to_pattern_string(rewritten, flags))
    return 0


def cmd_corpus(args) -> int:
    if args.file:
        try:
            with open(args.file, encoding="utf-8") as f:
                lines = f.read().splitlines()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        lines = bundled_corpus_lines()
    report = run_corpus(lines)
    for r in report.results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} line {r.line_number}: {r.pattern}  ({r.detail})")
    print(report.summary())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
