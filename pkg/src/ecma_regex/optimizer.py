"""Strictly-nullable analysis, the star-elimination rewrite, and a brute-force
equivalence checker.

A regex is strictly nullable when its matcher can succeed only without
consuming input. Anchors and lookarounds qualify (they inspect the string and
may even capture through a lookaround, but never advance); backreferences
never do, even when the referenced group could only have captured emptiness.
A greedy star over a strictly nullable body can only ever run zero iterations
(the one iteration that could succeed is an empty optional iteration, which is
rejected), so it can be replaced by the empty regex.

The checker compares anchored attempts, not scans, at every start index over
every string up to a length bound, including the full capture tuples; it is
deliberately dumb so it can serve as the independent oracle for the rewrite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .ast import (
    Anchor,
    Concat,
    Disjunction,
    Empty,
    Flags,
    Group,
    Lookaround,
    NonCapturingGroup,
    Quantified,
    RegexNode,
    count_groups_within,
)
from .compiler import MISMATCH, MatchState, compile_pattern
from .early_errors import validate

logger = logging.getLogger(__name__)


def strictly_nullable(node: RegexNode) -> bool:
    if isinstance(node, (Empty, Anchor, Lookaround)):
        return True
    if isinstance(node, (Disjunction, Concat)):
        return strictly_nullable(node.left) and strictly_nullable(node.right)
    if isinstance(node, Quantified):
        return strictly_nullable(node.body)
    if isinstance(node, (Group, NonCapturingGroup)):
        return strictly_nullable(node.body)
    return False


def _is_greedy_star(node: RegexNode) -> bool:
    return (
        isinstance(node, Quantified)
        and node.quantifier.min == 0
        and node.quantifier.max is None
        and node.quantifier.greedy
    )


def rewrite_strictly_nullable_stars(root: RegexNode) -> RegexNode:
    """Bottom-up replacement of greedy stars over strictly nullable bodies by ε.

    Only the greedy star form is rewritten. A body containing capture groups
    is left alone (with a warning): deleting groups would renumber every later
    group and change observable results.
    """
    rebuilt = _rewrite_children(root)
    if _is_greedy_star(rebuilt):
        body = rebuilt.body
        if strictly_nullable(body):
            if count_groups_within(body) > 0:
                logger.warning(
                    "refusing to rewrite a strictly nullable star whose body "
                    "contains capture groups (indices would shift)"
                )
            else:
                return Empty()
    return rebuilt


def _rewrite_children(node: RegexNode) -> RegexNode:
    if isinstance(node, Disjunction):
        return Disjunction(
            rewrite_strictly_nullable_stars(node.left),
            rewrite_strictly_nullable_stars(node.right),
        )
    if isinstance(node, Concat):
        return Concat(
            rewrite_strictly_nullable_stars(node.left),
            rewrite_strictly_nullable_stars(node.right),
        )
    if isinstance(node, Quantified):
        return Quantified(rewrite_strictly_nullable_stars(node.body), node.quantifier)
    if isinstance(node, Group):
        return Group(rewrite_strictly_nullable_stars(node.body), node.name)
    if isinstance(node, NonCapturingGroup):
        return NonCapturingGroup(rewrite_strictly_nullable_stars(node.body))
    if isinstance(node, Lookaround):
        return Lookaround(node.kind, rewrite_strictly_nullable_stars(node.body))
    return node


# --- brute-force equivalence ---------------------------------------------------


@dataclass(frozen=True)
class AttemptOutcome:
    """Result of one anchored attempt: where it ended plus every capture."""

    end_index: int
    captures: tuple[Optional[tuple[int, int]], ...]

    def to_json_dict(self) -> dict:
        return {
            "matched": True,
            "endIndex": self.end_index,
            "captures": [list(c) if c else None for c in self.captures],
        }


@dataclass(frozen=True)
class Counterexample:
    input: str
    start: int
    result_a: Optional[AttemptOutcome]
    result_b: Optional[AttemptOutcome]

    def to_json_dict(self) -> dict:
        return {
            "input": self.input,
            "start": self.start,
            "resultA": self.result_a.to_json_dict() if self.result_a else {"matched": False},
            "resultB": self.result_b.to_json_dict() if self.result_b else {"matched": False},
        }


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    counterexample: Optional[Counterexample] = None

    def to_json_dict(self) -> dict:
        if self.equivalent:
            return {"equivalent": True}
        return {"equivalent": False, "counterexample": self.counterexample.to_json_dict()}


def _outcome(result) -> Optional[AttemptOutcome]:
    if result is MISMATCH:
        return None
    assert isinstance(result, MatchState)
    return AttemptOutcome(
        result.end_index,
        tuple((c.start, c.end) if c is not None else None for c in result.captures),
    )


def compare_attempts(compiled_a, compiled_b, chars: tuple[int, ...], start: int):
    """None when both sides agree; otherwise the two differing outcomes."""
    a = _outcome(compiled_a.run(chars, start))
    b = _outcome(compiled_b.run(chars, start))
    if a == b:
        return None
    return a, b


def check_equivalence(
    a: RegexNode,
    b: RegexNode,
    flags: Flags,
    alphabet,
    max_len: int,
) -> EquivalenceReport:
    """Exhaustive comparison over all strings up to max_len and all starts.

    Enumeration is lexicographic by (length, string, start), so the reported
    counterexample is deterministic. Both patterns must pass validation.
    """
    for name, node in (("first", a), ("second", b)):
        errors = validate(node, flags)
        if errors:
            raise ValueError(f"{name} pattern has early errors: {errors[0].render()}")
    compiled_a = compile_pattern(a, flags)
    compiled_b = compile_pattern(b, flags)
    letters = [ord(ch) if isinstance(ch, str) else int(ch) for ch in alphabet]
    for length in range(max_len + 1):
        for chars in product(letters, repeat=length):
            for start in range(length + 1):
                diff = compare_attempts(compiled_a, compiled_b, chars, start)
                if diff is not None:
                    return EquivalenceReport(
                        equivalent=False,
                        counterexample=Counterexample(
                            input="".join(chr(c) for c in chars),
                            start=start,
                            result_a=diff[0],
                            result_b=diff[1],
                        ),
                    )
    return EquivalenceReport(equivalent=True)
