"""Verification harness: seeded fuzzing, invariant suites, differential runs.

The generator builds ASTs directly (the parser has its own round-trip tests),
over a small alphabet so matches are common. Everything is deterministic from
the seed: a case id plus the config reproduces the exact regex and inputs.

The differential runner talks to an oracle process over JSON lines on
stdin/stdout: one request per line, one response per line, in order, UTF-8.
Requests: {"pattern","flags","input","lastIndex"}. Responses: {"status":"ok",
"matched",...} or {"status":"error","message"}. The oracle being missing is an
infrastructure condition (OracleUnavailable), not a test failure.
"""

from __future__ import annotations

import json
import random
import subprocess
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .ast import (
    ANCHOR_KINDS,
    Anchor,
    Backreference,
    Char,
    CharRange,
    CharacterClass,
    ClassEscape,
    Concat,
    Disjunction,
    Dot,
    Empty,
    Flags,
    Group,
    LOOK_KINDS,
    Lookaround,
    NamedBackreference,
    NonCapturingGroup,
    Quantified,
    Quantifier,
    RegexNode,
    UnicodeProperty,
)
from .compiler import (
    AssertionFailure,
    EngineError,
    OutOfFuel,
    Recorder,
    ResourceLimit,
    compile_pattern,
)
from .charmodel import model_for, utf16_units
from .early_errors import validate
from .executor import exec_pattern
from .parser import to_pattern_string

DOCUMENTED_FOLDING_CODEPOINTS = frozenset({0x0390, 0x03B0, 0x00DF, 0x1E9E, 0x1FD3, 0x1FE3})

DEFAULT_FLAG_PROBABILITIES = {
    "i": 0.2,
    "m": 0.15,
    "s": 0.15,
    "u": 0.3,
    "y": 0.1,
    "d": 0.1,
    "g": 0.1,
}


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    alphabet: tuple[str, ...] = ("a", "b", "c")
    max_regex_depth: int = 6
    max_input_len: int = 8
    flags_distribution: dict = field(default_factory=lambda: dict(DEFAULT_FLAG_PROBABILITIES))
    case_count: int = 1000
    inputs_per_case: int = 3
    max_quantifier: int = 5
    group_name_pool: tuple[str, ...] = ("A", "B", "C")


@dataclass(frozen=True)
class FuzzCase:
    case_id: int
    seed: int
    node: RegexNode
    flags: Flags
    inputs: tuple[str, ...]
    starts: tuple[int, ...]  # one per input, an index into the model's characters


def generate_regex(cfg: FuzzConfig, rng: random.Random) -> tuple[RegexNode, Flags]:
    """One random AST + flags passing validation (regenerates on violation)."""
    while True:
        flags = _random_flags(cfg, rng)
        gen = _Gen(cfg, rng, flags)
        node = gen.node(cfg.max_regex_depth)
        if not validate(node, flags):
            return node, flags


class _Gen:
    def __init__(self, cfg: FuzzConfig, rng: random.Random, flags: Flags):
        self.cfg = cfg
        self.rng = rng
        self.flags = flags
        self.used_names: list[str] = []
        # Characters must come from the active model: astral alphabet entries
        # are single code points under `u` but surrogate halves without it.
        if flags.unicode:
            self.char_pool = tuple(ord(ch) for ch in cfg.alphabet)
        else:
            pool: list[int] = []
            for ch in cfg.alphabet:
                pool.extend(utf16_units(ch))
            self.char_pool = tuple(pool)

    def node(self, depth: int) -> RegexNode:
        if depth <= 0:
            return self.leaf()
        return self.rng.choices(
            [self.leaf, self.concat, self.disjunction, self.quantified, self.group,
             self.noncapturing, self.lookaround],
            weights=[30, 22, 14, 14, 8, 6, 6],
        )[0](depth)

    def leaf(self, depth: int = 0) -> RegexNode:
        choices = [
            (self.char, 40),
            (self.char_class, 12),
            (lambda: Dot(), 6),
            (lambda: ClassEscape(self.rng.choice("dDwWsS")), 6),
            (lambda: Anchor(self.rng.choice(ANCHOR_KINDS)), 8),
            (lambda: Empty(), 4),
            (lambda: Backreference(self.rng.randint(1, 3)), 6),
            (self.named_backref, 4),
        ]
        if self.flags.unicode:
            choices.append((self.unicode_property, 6))
        funcs, weights = zip(*choices)
        return self.rng.choices(funcs, weights=weights)[0]()

    def char(self) -> RegexNode:
        return Char(self.rng.choice(self.char_pool))

    def char_class(self) -> RegexNode:
        atoms = []
        for _ in range(self.rng.randint(1, 3)):
            kind = self.rng.random()
            if kind < 0.6:
                cp = self.rng.choice(self.char_pool)
                atoms.append(CharRange(cp, cp))
            elif kind < 0.85:
                lo, hi = sorted(
                    (self.rng.choice(self.char_pool), self.rng.choice(self.char_pool))
                )
                atoms.append(CharRange(lo, hi))
            else:
                atoms.append(ClassEscape(self.rng.choice("dDwWsS")))
        return CharacterClass(self.rng.random() < 0.3, tuple(atoms))

    def unicode_property(self) -> RegexNode:
        name, value = self.rng.choice(
            [("General_Category", "Letter"), ("General_Category", "L"), ("L", None)]
        )
        return UnicodeProperty(name, value, self.rng.random() < 0.3)

    def named_backref(self) -> RegexNode:
        pool = self.used_names or list(self.cfg.group_name_pool)
        return NamedBackreference(self.rng.choice(pool))

    def concat(self, depth: int) -> RegexNode:
        # Keep the tree print-faithful: a concat operand cannot be a bare
        # disjunction, an Empty (it would vanish), or a left-nested concat.
        left = self.node_no_toplevel_disjunction(depth - 1)
        right = self.node(depth - 1)
        if isinstance(right, (Disjunction, Empty)):
            right = NonCapturingGroup(right)
        if isinstance(left, (Concat, Empty)):
            left = NonCapturingGroup(left)
        return Concat(left, right)

    def node_no_toplevel_disjunction(self, depth: int) -> RegexNode:
        node = self.node(depth)
        if isinstance(node, Disjunction):
            return NonCapturingGroup(node)
        return node

    def disjunction(self, depth: int) -> RegexNode:
        left = self.node_no_toplevel_disjunction(depth - 1)
        right = self.node(depth - 1)
        return Disjunction(left, right)

    def quantified(self, depth: int) -> RegexNode:
        body = self.node(depth - 1)
        if not _quantifiable(body):
            body = NonCapturingGroup(body)
        low = self.rng.randint(0, 2)
        kind = self.rng.random()
        if kind < 0.45:
            bounds = self.rng.choice([(0, None), (1, None), (0, 1)])
        elif kind < 0.75:
            bounds = (low, None)
        else:
            bounds = (low, self.rng.randint(low, self.cfg.max_quantifier))
        return Quantified(body, Quantifier(bounds[0], bounds[1], self.rng.random() < 0.7))

    def group(self, depth: int) -> RegexNode:
        name = None
        available = [n for n in self.cfg.group_name_pool if n not in self.used_names]
        if available and self.rng.random() < 0.4:
            name = self.rng.choice(available)
            self.used_names.append(name)
        return Group(self.node(depth - 1), name)

    def noncapturing(self, depth: int) -> RegexNode:
        return NonCapturingGroup(self.node(depth - 1))

    def lookaround(self, depth: int) -> RegexNode:
        return Lookaround(self.rng.choice(LOOK_KINDS), self.node(depth - 1))


def _quantifiable(node: RegexNode) -> bool:
    return isinstance(
        node,
        (Char, Dot, CharacterClass, ClassEscape, UnicodeProperty, Group, NonCapturingGroup,
         Backreference, NamedBackreference),
    )


def _random_flags(cfg: FuzzConfig, rng: random.Random) -> Flags:
    letters = "".join(
        letter for letter, p in sorted(cfg.flags_distribution.items()) if rng.random() < p
    )
    return Flags.parse(letters)


def generate_cases(cfg: FuzzConfig) -> list[FuzzCase]:
    master = random.Random(cfg.seed)
    cases = []
    for case_id in range(cfg.case_count):
        case_seed = master.getrandbits(64)
        rng = random.Random(case_seed)
        node, flags = generate_regex(cfg, rng)
        model = model_for(flags)
        inputs = []
        starts = []
        for _ in range(cfg.inputs_per_case):
            length = rng.randint(0, cfg.max_input_len)
            text = "".join(rng.choice(cfg.alphabet) for _ in range(length))
            inputs.append(text)
            starts.append(rng.randint(0, len(model.tokenize(utf16_units(text)))))
        cases.append(
            FuzzCase(case_id, case_seed, node, flags, tuple(inputs), tuple(starts))
        )
    return cases


def _char_to_unit_index(model, text: str, char_index: int) -> int:
    units = utf16_units(text)
    chars = model.tokenize(units)
    offset = 0
    for ch in chars[:char_index]:
        offset += model.char_unit_length(ch)
    return offset


# --- invariant suite -------------------------------------------------------------


@dataclass
class CaseIssue:
    case_id: int
    seed: int
    kind: str
    detail: str
    repro: str


@dataclass
class SuiteReport:
    total: int = 0
    runs: int = 0
    violations: list[CaseIssue] = field(default_factory=list)
    resource_limited: list[int] = field(default_factory=list)
    max_repeat_headroom_ok: bool = True
    repeat_sites_observed: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "runs": self.runs,
            "violations": [vars(v) for v in self.violations],
            "resourceLimited": self.resource_limited,
            "passed": self.passed,
        }

    def summary(self) -> str:
        return (
            f"{self.total} cases, {self.runs} runs: "
            f"{len(self.violations)} violation(s), "
            f"{len(self.resource_limited)} resource-limited"
        )


def _repro(case: FuzzCase) -> str:
    from .parser import ast_to_json

    return ast_to_json(case.node, case.flags)


def run_invariant_suite(cases: list[FuzzCase]) -> SuiteReport:
    """Run every case instrumented; termination/no-failure/invariant violations
    become report entries with reproducers, never exceptions."""
    report = SuiteReport(total=len(cases))
    for case in cases:
        try:
            compiled = compile_pattern(case.node, case.flags, instrument=True)
        except Exception as exc:  # totality: validated patterns must compile
            report.violations.append(
                CaseIssue(case.case_id, case.seed, "compile-" + type(exc).__name__,
                          str(exc), _repro(case))
            )
            continue
        for text, start in zip(case.inputs, case.starts):
            chars = compiled.model.tokenize(utf16_units(text))
            start_char = min(start, len(chars))
            recorder = Recorder()
            report.runs += 1
            try:
                compiled.run(chars, start_char, recorder=recorder)
            except OutOfFuel as exc:
                report.violations.append(
                    CaseIssue(case.case_id, case.seed, "OutOfFuel", str(exc), _repro(case))
                )
            except AssertionFailure as exc:
                report.violations.append(
                    CaseIssue(case.case_id, case.seed, "AssertionFailure", str(exc), _repro(case))
                )
            except ResourceLimit:
                report.resource_limited.append(case.case_id)
            except Exception as exc:  # any other escape is an engine bug
                report.violations.append(
                    CaseIssue(case.case_id, case.seed, "unexpected-" + type(exc).__name__,
                              str(exc), _repro(case))
                )
            for v in recorder.violations:
                report.violations.append(
                    CaseIssue(case.case_id, case.seed, v.kind, f"{v.node}: {v.detail}",
                              _repro(case))
                )
            report.repeat_sites_observed += len(recorder.repeat_depths)
            if recorder.repeat_bound_exceeded:
                report.max_repeat_headroom_ok = False
    return report


# --- differential runner ----------------------------------------------------------


class OracleUnavailable(Exception):
    """The oracle process could not be started or died; skip, don't fail."""


class OracleClient:
    """Line-oriented JSON client for an oracle subprocess."""

    def __init__(self, command: list[str]):
        try:
            self.proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise OracleUnavailable(f"cannot launch oracle {command!r}: {exc}") from None

    def query(self, request: dict) -> dict:
        if self.proc.poll() is not None:
            raise OracleUnavailable("oracle process exited")
        try:
            self.proc.stdin.write(json.dumps(request, ensure_ascii=True) + "\n")
            self.proc.stdin.flush()
            line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise OracleUnavailable(f"oracle pipe broke: {exc}") from None
        if not line:
            raise OracleUnavailable("oracle closed its output")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise OracleUnavailable(f"oracle spoke garbage: {exc}") from None

    def close(self):
        if self.proc.stdin:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class Disagreement:
    case_id: int
    seed: int
    pattern: str
    flags: str
    input: str
    last_index: int
    ours: Optional[dict]
    oracle: dict
    repro: str


@dataclass
class DiffReport:
    total: int = 0
    compared: int = 0
    disagreements: list[Disagreement] = field(default_factory=list)
    resource_limited: int = 0
    tolerated_folding: int = 0

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def summary(self) -> str:
        return (
            f"{self.total} cases, {self.compared} comparisons: "
            f"{len(self.disagreements)} disagreement(s), "
            f"{self.resource_limited} resource-limited, "
            f"{self.tolerated_folding} tolerated-folding"
        )

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "compared": self.compared,
            "disagreements": [
                {k: v for k, v in vars(d).items()} for d in self.disagreements
            ],
            "resourceLimited": self.resource_limited,
            "toleratedFolding": self.tolerated_folding,
            "passed": self.passed,
        }


def _record_as_comparable(record) -> dict:
    if record is None:
        return {"matched": False}
    return {
        "matched": True,
        "index": record.index,
        "endIndex": record.end_index,
        "captures": [
            None if c is None else {"start": c.start, "end": c.end} for c in record.captures
        ],
        "named": {
            k: (None if v is None else {"start": v.start, "end": v.end})
            for k, v in record.named.items()
        },
    }


def _oracle_as_comparable(response: dict) -> dict:
    if not response.get("matched"):
        return {"matched": False}
    return {
        "matched": True,
        "index": response.get("index"),
        "endIndex": response.get("endIndex"),
        "captures": response.get("captures", []),
        "named": response.get("named", {}),
    }


def _touches_documented_folding(case: FuzzCase, text: str) -> bool:
    cps = {ord(ch) for ch in text}
    for node, _ in _all_chars(case.node):
        cps.add(node)
    return bool(cps & DOCUMENTED_FOLDING_CODEPOINTS)


def _all_chars(node: RegexNode):
    from .ast import enumerate_subterms

    for sub, ctx in enumerate_subterms(node):
        if isinstance(sub, Char):
            yield sub.codepoint, ctx
        elif isinstance(sub, CharacterClass):
            for atom in sub.atoms:
                if isinstance(atom, CharRange):
                    yield atom.lo, ctx
                    yield atom.hi, ctx


def differential_run(cases: list[FuzzCase], oracle_command: list[str]) -> DiffReport:
    """Compare every case against the oracle; full positional capture equality."""
    report = DiffReport(total=len(cases))
    with OracleClient(oracle_command) as oracle:
        for case in cases:
            compiled = compile_pattern(case.node, case.flags)
            pattern = to_pattern_string(case.node, case.flags)
            flag_string = case.flags.to_string()
            for text, start in zip(case.inputs, case.starts):
                last_index = _char_to_unit_index(compiled.model, text, start)
                request = {
                    "pattern": pattern,
                    "flags": flag_string,
                    "input": text,
                    "lastIndex": last_index,
                }
                try:
                    ours = _record_as_comparable(exec_pattern(compiled, text, last_index))
                except ResourceLimit:
                    report.resource_limited += 1
                    continue
                except EngineError as exc:
                    ours = {"engineError": f"{type(exc).__name__}: {exc}"}
                response = oracle.query(request)
                if response.get("status") == "error":
                    theirs = {"error": response.get("message")}
                else:
                    theirs = _oracle_as_comparable(response)
                report.compared += 1
                if ours != theirs:
                    if _touches_documented_folding(case, text) and case.flags.ignore_case:
                        report.tolerated_folding += 1
                        continue
                    report.disagreements.append(
                        Disagreement(
                            case.case_id, case.seed, pattern, flag_string, text,
                            last_index, ours, theirs, _repro(case),
                        )
                    )
    return report


# --- corpus runner -----------------------------------------------------------------


def decode_escapes(text: str) -> str:
    r"""Decode \xHH, \uHHHH, and \\ escapes (shared by corpus files and the CLI).

    Anything else after a backslash is kept verbatim, so regex-ish strings can
    be pasted without double escaping. Truncated hex escapes raise ValueError.
    """
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "\\" or i + 1 >= len(text):
            out.append(ch)
            i += 1
            continue
        nxt = text[i + 1]
        if nxt == "x":
            if i + 4 > len(text):
                raise ValueError(f"truncated \\x escape at offset {i}")
            out.append(chr(int(text[i + 2 : i + 4], 16)))
            i += 4
        elif nxt == "u":
            if i + 6 > len(text):
                raise ValueError(f"truncated \\u escape at offset {i}")
            out.append(chr(int(text[i + 2 : i + 6], 16)))
            i += 6
        elif nxt == "\\":
            out.append("\\")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


@dataclass
class CorpusResult:
    line_number: int
    pattern: str
    ok: bool
    detail: str


@dataclass
class CorpusReport:
    results: list[CorpusResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.results)

    def summary(self) -> str:
        good = sum(1 for r in self.results if r.ok)
        return f"{good}/{len(self.results)} corpus lines passed"


def bundled_corpus_lines() -> list[str]:
    data = resources.files("ecma_regex").joinpath("data/conformance_corpus.txt").read_text("utf-8")
    return data.splitlines()


def run_corpus(lines) -> CorpusReport:
    """Run corpus lines of the form `pattern :: input :: startIndex :: expectation`.

    Expectations are `NOMATCH` or `MATCH <index> <endIndex> g1=<s>:<e> g2=- ...`
    with unlisted groups expected undefined. Malformed lines are reported and
    the run continues.
    """
    report = CorpusReport()
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            result = _run_corpus_line(line)
        except Exception as exc:  # malformed line or engine error: keep going
            result = CorpusResult(line_number, line, False, f"error: {exc}")
        else:
            result = CorpusResult(line_number, result[0], result[1], result[2])
        report.results.append(result)
    return report


def _run_corpus_line(line: str):
    fields = line.split(" :: ")
    if len(fields) != 4:
        raise ValueError(f"expected 4 ' :: ' fields, got {len(fields)}")
    pattern_text, input_text, start_text, expectation = fields
    from .parser import parse_pattern

    flags = Flags.parse("")
    node = parse_pattern(pattern_text, flags)
    errors = validate(node, flags)
    if errors:
        raise ValueError(errors[0].render())
    compiled = compile_pattern(node, flags)
    record = exec_pattern(compiled, decode_escapes(input_text), int(start_text))
    expected = expectation.strip()
    if expected == "NOMATCH":
        ok = record is None
        detail = "no match" if ok else f"unexpected match at {record.index}"
        return pattern_text, ok, detail
    parts = expected.split()
    if parts[0] != "MATCH":
        raise ValueError(f"bad expectation {expected!r}")
    want_index, want_end = int(parts[1]), int(parts[2])
    want_groups: dict[int, Optional[tuple[int, int]]] = {}
    for chunk in parts[3:]:
        name, _, span = chunk.partition("=")
        if not name.startswith("g"):
            raise ValueError(f"bad group field {chunk!r}")
        idx = int(name[1:])
        if span == "-":
            want_groups[idx] = None
        else:
            s, _, e = span.partition(":")
            want_groups[idx] = (int(s), int(e))
    if record is None:
        return pattern_text, False, "expected a match, got none"
    problems = []
    if (record.index, record.end_index) != (want_index, want_end):
        problems.append(
            f"span [{record.index},{record.end_index}) != [{want_index},{want_end})"
        )
    for gi in range(1, len(record.captures) + 1):
        got = record.captures[gi - 1]
        got_span = (got.start, got.end) if got else None
        want_span = want_groups.get(gi)
        if got_span != want_span:
            problems.append(f"g{gi}={got_span} != {want_span}")
    ok = not problems
    return pattern_text, ok, "; ".join(problems) if problems else "ok"
