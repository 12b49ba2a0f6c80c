"""AST-to-matcher compilation in continuation-passing style.

A compiled sub-pattern is a Matcher: a procedure taking a match state and a
continuation, returning either a new match state or MISMATCH. Concatenation is
encoded by building the right-hand matcher into the continuation; the host
call stack is the backtracking stack. Quantifiers go through repeat_matcher,
whose recursion carries an explicit fuel budget of min + remainingChars + 1;
exhausting it raises OutOfFuel, which (like AssertionFailure) can never happen
for a pattern that passed validation — the harness checks exactly that.

Internal aborts are exceptions rather than result values: they short-circuit
through every matcher just as a monadic bind would, and callers that need them
as data (the harness, the CLI) catch them at the run boundary. A separate
step budget turns pathologically exponential backtracking into ResourceLimit,
distinct from OutOfFuel, since termination proofs say nothing about runtime.
"""

from __future__ import annotations

import sys
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .ast import (
    ANCHOR_INPUT_END,
    ANCHOR_INPUT_START,
    ANCHOR_WORD_BOUNDARY,
    Anchor,
    Backreference,
    Char,
    CharRange,
    CharacterClass,
    ClassEscape,
    Concat,
    ConcatLeft,
    ConcatRight,
    Disjunction,
    DisjunctionLeft,
    DisjunctionRight,
    Dot,
    Empty,
    Flags,
    Group,
    GroupInner,
    LOOK_AHEAD,
    LOOK_BEHIND,
    LOOK_NEG_AHEAD,
    Lookaround,
    LookaroundInner,
    NamedBackreference,
    NonCapturingGroup,
    NonCapturingInner,
    Quantified,
    QuantifiedInner,
    RegexNode,
    UnicodeProperty,
    context_path,
    count_groups_before,
    count_groups_within,
    group_names,
    group_specifiers_that_match,
)
from .charmodel import CharSet, CharacterModel, LINE_TERMINATORS, model_for


class EngineError(Exception):
    """Base for internal engine aborts (never user input errors)."""


class AssertionFailure(EngineError):
    """A state or bookkeeping invariant broke; signals an engine bug."""


class OutOfFuel(EngineError):
    """repeat_matcher exhausted its fuel; signals an engine bug."""


class ResourceLimit(EngineError):
    """The configured backtracking step budget ran out."""


class _Mismatch:
    __slots__ = ()

    def __repr__(self):
        return "MISMATCH"

    def __bool__(self):
        return False


MISMATCH = _Mismatch()

FORWARD = 1
BACKWARD = -1


@dataclass(frozen=True, slots=True)
class CaptureRange:
    start: int
    end: int


@dataclass(frozen=True, slots=True)
class MatchState:
    input: tuple[int, ...]
    end_index: int
    captures: tuple[Optional[CaptureRange], ...]


MatchResult = Union[MatchState, _Mismatch]
MatcherContinuation = Callable[[MatchState], MatchResult]
Matcher = Callable[[MatchState, MatcherContinuation], MatchResult]

DEFAULT_STEP_LIMIT = 1_000_000
_MIN_RECURSION_LIMIT = 20_000


def state_is_valid(x: MatchState) -> bool:
    if not 0 <= x.end_index <= len(x.input):
        return False
    for cap in x.captures:
        if cap is not None and not 0 <= cap.start <= cap.end <= len(x.input):
            return False
    return True


# --- per-run bookkeeping -------------------------------------------------------


@dataclass
class Violation:
    kind: str
    node: str
    detail: str


@dataclass
class Recorder:
    """Collects instrumentation facts for one or more runs.

    Checks performed on every continuation call of an instrumented matcher:
    the callee state is valid, shares the caller's input, and has progressed
    in the matcher's direction. Non-mismatch matcher results must equal some
    value the continuation returned. Violations are data, not exceptions, so
    a fuzz campaign can keep going.
    """

    record_events: bool = False
    violations: list[Violation] = field(default_factory=list)
    events: list[tuple[str, str, object]] = field(default_factory=list)
    repeat_depths: dict[str, int] = field(default_factory=dict)
    repeat_bound_exceeded: list[Violation] = field(default_factory=list)

    def event(self, node: str, kind: str, info: object):
        if self.record_events:
            self.events.append((node, kind, info))

    def violation(self, kind: str, node: str, detail: str):
        self.violations.append(Violation(kind, node, detail))

    def check_continuation(self, node: str, direction: int, x: MatchState, y: MatchState):
        if not (y.input is x.input or y.input == x.input):
            self.violation("input-changed", node, "continuation saw a different input")
        if not state_is_valid(y):
            self.violation("state-invalid", node, f"invalid state endIndex={y.end_index}")
        progressed = y.end_index >= x.end_index if direction == FORWARD else y.end_index <= x.end_index
        if not progressed:
            self.violation(
                "progress",
                node,
                f"endIndex went {x.end_index} -> {y.end_index} against direction {direction}",
            )
        self.event(node, "continue", (x.end_index, y.end_index))

    def note_repeat(self, node: str, depth: int, bound: int):
        prev = self.repeat_depths.get(node, 0)
        if depth > prev:
            self.repeat_depths[node] = depth
        if depth > bound:
            v = Violation("fuel-bound", node, f"repeat depth {depth} exceeded bound {bound}")
            self.repeat_bound_exceeded.append(v)
            self.violations.append(v)


@dataclass
class _RunContext:
    steps_left: int
    recorder: Optional[Recorder]


_ACTIVE: ContextVar[Optional[_RunContext]] = ContextVar("ecma_regex_run", default=None)


# --- compilation ----------------------------------------------------------------


@dataclass(frozen=True)
class _CompileEnv:
    flags: Flags
    model: CharacterModel
    root: RegexNode
    group_count: int
    instrument: bool
    fuel_offset: int


@dataclass(frozen=True)
class CompiledPattern:
    root: RegexNode
    flags: Flags
    model: CharacterModel
    group_count: int
    group_names: dict[str, int]
    matcher: Matcher

    def run(
        self,
        chars: tuple[int, ...],
        index: int,
        recorder: Optional[Recorder] = None,
        step_limit: int = DEFAULT_STEP_LIMIT,
    ) -> MatchResult:
        """Attempt an anchored match of the whole pattern at a character index."""
        if not 0 <= index <= len(chars):
            raise AssertionFailure(f"start index {index} outside [0, {len(chars)}]")
        x = MatchState(tuple(chars), index, (None,) * self.group_count)
        if sys.getrecursionlimit() < _MIN_RECURSION_LIMIT:
            sys.setrecursionlimit(_MIN_RECURSION_LIMIT)
        token = _ACTIVE.set(_RunContext(step_limit, recorder))
        try:
            return self.matcher(x, lambda y: y)
        except RecursionError:
            raise ResourceLimit("host recursion limit reached") from None
        finally:
            _ACTIVE.reset(token)


def compile_pattern(
    root: RegexNode,
    flags: Flags,
    *,
    instrument: bool = False,
    fuel_offset: int = 0,
) -> CompiledPattern:
    """Compile a validated AST; the result is immutable and reusable.

    fuel_offset shifts every repeat_matcher fuel budget and exists so tests
    can demonstrate the budget is tight; leave it at 0 otherwise.
    """
    model = model_for(flags)
    env = _CompileEnv(
        flags=flags,
        model=model,
        root=root,
        group_count=count_groups_within(root),
        instrument=instrument,
        fuel_offset=fuel_offset,
    )
    matcher = compile_subpattern(root, (), env, FORWARD)
    return CompiledPattern(
        root=root,
        flags=flags,
        model=model,
        group_count=env.group_count,
        group_names=group_names(root),
        matcher=matcher,
    )


def compile_subpattern(node: RegexNode, ctx, env: _CompileEnv, direction: int) -> Matcher:
    """Structurally recursive dispatch; ctx is the zipper context of *node*."""
    if isinstance(node, Empty):
        m = _empty_matcher()
    elif isinstance(node, Char):
        m = character_set_matcher(CharSet.from_chars([node.codepoint]), False, env, direction)
    elif isinstance(node, Dot):
        m = character_set_matcher(env.model.dot_set(env.flags), False, env, direction)
    elif isinstance(node, ClassEscape):
        m = character_set_matcher(
            env.model.class_escape_set(node.kind, env.flags), False, env, direction
        )
    elif isinstance(node, UnicodeProperty):
        m = character_set_matcher(_property_set(node, env), False, env, direction)
    elif isinstance(node, CharacterClass):
        m = character_set_matcher(_class_set(node, env), node.negated, env, direction)
    elif isinstance(node, Disjunction):
        m1 = compile_subpattern(node.left, (DisjunctionLeft(node.right),) + ctx, env, direction)
        m2 = compile_subpattern(node.right, (DisjunctionRight(node.left),) + ctx, env, direction)

        def m(x, c):
            r = m1(x, c)
            if r is not MISMATCH:
                return r
            return m2(x, c)

    elif isinstance(node, Concat):
        m1 = compile_subpattern(node.left, (ConcatLeft(node.right),) + ctx, env, direction)
        m2 = compile_subpattern(node.right, (ConcatRight(node.left),) + ctx, env, direction)
        if direction == FORWARD:

            def m(x, c):
                return m1(x, lambda y: m2(y, c))

        else:

            def m(x, c):
                return m2(x, lambda y: m1(y, c))

    elif isinstance(node, Quantified):
        inner = compile_subpattern(
            node.body, (QuantifiedInner(node.quantifier),) + ctx, env, direction
        )
        q = node.quantifier
        paren_index = count_groups_before(ctx)
        paren_count = count_groups_within(node.body)
        site = context_path(ctx) if env.instrument else None
        fuel_offset = env.fuel_offset

        def m(x, c):
            fuel = initial_fuel(q.min, x, direction) + fuel_offset
            return repeat_matcher(
                inner, q.min, q.max, q.greedy, x, c, paren_index, paren_count, fuel,
                _site=site, _bound=fuel,
            )

    elif isinstance(node, Group):
        inner = compile_subpattern(node.body, (GroupInner(node.name),) + ctx, env, direction)
        n = count_groups_before(ctx) + 1

        def m(x, c):
            def d(y):
                if direction == FORWARD:
                    if y.end_index < x.end_index:
                        raise AssertionFailure("capture ended before it started")
                    r = CaptureRange(x.end_index, y.end_index)
                else:
                    if x.end_index < y.end_index:
                        raise AssertionFailure("capture ended before it started")
                    r = CaptureRange(y.end_index, x.end_index)
                cap = list(y.captures)
                cap[n - 1] = r
                return c(MatchState(y.input, y.end_index, tuple(cap)))

            return inner(x, d)

    elif isinstance(node, NonCapturingGroup):
        inner = compile_subpattern(node.body, (NonCapturingInner(),) + ctx, env, direction)

        def m(x, c):
            return inner(x, c)

    elif isinstance(node, Lookaround):
        inner_direction = FORWARD if node.kind in (LOOK_AHEAD, LOOK_NEG_AHEAD) else BACKWARD
        inner = compile_subpattern(
            node.body, (LookaroundInner(node.kind),) + ctx, env, inner_direction
        )
        positive = node.kind in (LOOK_AHEAD, LOOK_BEHIND)
        m = lookaround_matcher(positive, inner)
    elif isinstance(node, Anchor):
        m = anchor_matcher(node.kind, env)
    elif isinstance(node, Backreference):
        m = backreference_matcher(node.index, env, direction)
    elif isinstance(node, NamedBackreference):
        specifiers = group_specifiers_that_match(env.root, node.name)
        if len(specifiers) != 1:
            raise AssertionFailure(
                f"\\k<{node.name}> matched {len(specifiers)} group specifiers"
            )
        m = backreference_matcher(specifiers[0][0], env, direction)
    else:
        raise AssertionFailure(f"no compilation rule for {type(node).__name__}")

    return _finish(m, ctx, env, direction)


def _finish(m: Matcher, ctx, env: _CompileEnv, direction: int) -> Matcher:
    """Attach the per-call step budget and, when asked, invariant instrumentation."""
    if not env.instrument:

        def stepped(x, c):
            rc = _ACTIVE.get()
            rc.steps_left -= 1
            if rc.steps_left < 0:
                raise ResourceLimit("backtracking step budget exhausted")
            return m(x, c)

        return stepped

    path = context_path(ctx)

    def traced(x, c):
        rc = _ACTIVE.get()
        rc.steps_left -= 1
        if rc.steps_left < 0:
            raise ResourceLimit("backtracking step budget exhausted")
        rec = rc.recorder
        if rec is None:
            return m(x, c)
        rec.event(path, "call", x.end_index)
        returned: list[MatchResult] = []

        def instrumented_continuation(y):
            rec.check_continuation(path, direction, x, y)
            r = c(y)
            returned.append(r)
            return r

        r = m(x, instrumented_continuation)
        if r is MISMATCH:
            rec.event(path, "result", "mismatch")
        else:
            rec.event(path, "result", "match")
            if not any(r == prior for prior in returned if prior is not MISMATCH):
                rec.violation(
                    "result-not-from-continuation",
                    path,
                    "matcher returned a state its continuation never produced",
                )
        return r

    return traced


def _empty_matcher() -> Matcher:
    def m(x, c):
        return c(x)

    return m


def _class_set(node: CharacterClass, env: _CompileEnv) -> CharSet:
    out = CharSet.empty()
    for atom in node.atoms:
        if isinstance(atom, CharRange):
            out = out.union(CharSet([(atom.lo, atom.hi)]))
        elif isinstance(atom, ClassEscape):
            out = out.union(env.model.class_escape_set(atom.kind, env.flags))
        else:
            out = out.union(_property_set(atom, env))
    return out


def _property_set(node: UnicodeProperty, env: _CompileEnv) -> CharSet:
    s = env.model.unicode_property_set(node.name, node.value)
    if node.negated:
        return s.complement(env.model.max_char)
    return s


def initial_fuel(min_reps: int, x: MatchState, direction: int) -> int:
    """Sufficient repeat_matcher budget: min + remaining characters + 1."""
    remaining = len(x.input) - x.end_index if direction == FORWARD else x.end_index
    return min_reps + remaining + 1


def repeat_matcher(
    m: Matcher,
    min_reps: int,
    max_reps: Optional[int],
    greedy: bool,
    x: MatchState,
    c: MatcherContinuation,
    paren_index: int,
    paren_count: int,
    fuel: int,
    *,
    _site: Optional[str] = None,
    _bound: int = 0,
) -> MatchResult:
    """One quantifier step; max_reps None means unbounded.

    Captures lexically inside the body (slots paren_index+1 ..
    paren_index+paren_count) are cleared on the state handed to each body
    attempt. Optional iterations that consume nothing are rejected, which is
    what bounds the recursion depth by the fuel formula.
    """
    if fuel <= 0:
        raise OutOfFuel(f"repeat matcher fuel exhausted at endIndex {x.end_index}")
    if _site is not None:
        rc = _ACTIVE.get()
        if rc is not None and rc.recorder is not None:
            rc.recorder.note_repeat(_site, _bound - fuel + 1, _bound)
    if max_reps == 0:
        return c(x)

    def d(y):
        if min_reps == 0 and y.end_index == x.end_index:
            return MISMATCH
        next_min = 0 if min_reps == 0 else min_reps - 1
        next_max = None if max_reps is None else max_reps - 1
        return repeat_matcher(
            m, next_min, next_max, greedy, y, c, paren_index, paren_count, fuel - 1,
            _site=_site, _bound=_bound,
        )

    cap = list(x.captures)
    for k in range(paren_index, paren_index + paren_count):
        cap[k] = None
    xr = MatchState(x.input, x.end_index, tuple(cap))
    if min_reps != 0:
        return m(xr, d)
    if not greedy:
        z = c(x)
        if z is not MISMATCH:
            return z
        return m(xr, d)
    z = m(xr, d)
    if z is not MISMATCH:
        return z
    return c(x)


def character_set_matcher(
    cs: CharSet, invert: bool, env: _CompileEnv, direction: int
) -> Matcher:
    """Matcher consuming one character, tested against a set (canonicalized)."""
    flags = env.flags
    model = env.model
    ignore_case = flags.ignore_case
    lookup = model.canonical_image(flags, cs) if ignore_case else cs

    def m(x, c):
        e = x.end_index
        if direction == FORWARD:
            if e >= len(x.input):
                return MISMATCH
            ch = x.input[e]
            f = e + 1
        else:
            if e <= 0:
                return MISMATCH
            ch = x.input[e - 1]
            f = e - 1
        cc = model.canonicalize(flags, ch) if ignore_case else ch
        if lookup.contains(cc) == invert:
            return MISMATCH
        return c(MatchState(x.input, f, x.captures))

    return m


def backreference_matcher(group_index: int, env: _CompileEnv, direction: int) -> Matcher:
    """Matcher for \\n: matches the group's last capture, or nothing if undefined."""
    flags = env.flags
    model = env.model
    ignore_case = flags.ignore_case

    def m(x, c):
        if not 1 <= group_index <= len(x.captures):
            raise AssertionFailure(f"backreference \\{group_index} has no capture slot")
        r = x.captures[group_index - 1]
        if r is None:
            return c(x)
        if not 0 <= r.start <= r.end <= len(x.input):
            raise AssertionFailure(f"malformed capture range {r}")
        length = r.end - r.start
        e = x.end_index
        f = e + length if direction == FORWARD else e - length
        if f < 0 or f > len(x.input):
            return MISMATCH
        g = min(e, f)
        if ignore_case:
            for i in range(length):
                a = model.canonicalize(flags, x.input[r.start + i])
                b = model.canonicalize(flags, x.input[g + i])
                if a != b:
                    return MISMATCH
        elif x.input[r.start : r.end] != x.input[g : g + length]:
            return MISMATCH
        return c(MatchState(x.input, f, x.captures))

    return m


def lookaround_matcher(positive: bool, inner: Matcher) -> Matcher:
    """Zero-width assertion around *inner*; atomic (first inner match wins).

    A positive lookaround keeps the inner captures but restores the position;
    a negative one discards everything from the attempt.
    """

    def m(x, c):
        r = inner(x, lambda y: y)
        if positive:
            if r is MISMATCH:
                return MISMATCH
            return c(MatchState(x.input, x.end_index, r.captures))
        if r is not MISMATCH:
            return MISMATCH
        return c(x)

    return m


def anchor_matcher(kind: str, env: _CompileEnv) -> Matcher:
    flags = env.flags
    if kind == ANCHOR_INPUT_START:

        def m(x, c):
            e = x.end_index
            if e == 0 or (flags.multiline and x.input[e - 1] in LINE_TERMINATORS):
                return c(x)
            return MISMATCH

        return m
    if kind == ANCHOR_INPUT_END:

        def m(x, c):
            e = x.end_index
            if e == len(x.input) or (flags.multiline and x.input[e] in LINE_TERMINATORS):
                return c(x)
            return MISMATCH

        return m

    word_set = env.model.word_chars(flags)

    def is_word(x: MatchState, e: int) -> bool:
        if e < 0 or e >= len(x.input):
            return False
        return word_set.contains(x.input[e])

    boundary = kind == ANCHOR_WORD_BOUNDARY

    def m(x, c):
        e = x.end_index
        a = is_word(x, e - 1)
        b = is_word(x, e)
        if (a != b) == boundary:
            return c(x)
        return MISMATCH

    return m
