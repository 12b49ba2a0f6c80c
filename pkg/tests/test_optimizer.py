import logging

import pytest

from ecma_regex.ast import Empty, Flags
from ecma_regex.compiler import Recorder, compile_pattern
from ecma_regex.early_errors import validate
from ecma_regex.optimizer import (
    check_equivalence,
    compare_attempts,
    rewrite_strictly_nullable_stars,
    strictly_nullable,
)
from ecma_regex.parser import parse_pattern, to_pattern_string

NU = Flags.parse("")


def parse(pattern, flags=NU):
    return parse_pattern(pattern, flags)


@pytest.mark.parametrize(
    "pattern,expected",
    [
        ("(?=(a))", True),
        ("(?:^|$)", True),
        ("a?", False),
        ("\\1()", False),
        ("", True),
        ("\\b\\B^$", True),
        ("(?<!abc)", True),
        ("(?:^|(?=x)){3,}?", True),
        ("($)*", True),
        (".", False),
        ("[a]", False),
        ("\\d", False),
        ("(x)", False),
        ("()", True),
    ],
)
def test_strictly_nullable(pattern, expected):
    assert strictly_nullable(parse(pattern)) is expected


def test_rewrite_eliminates_sn_greedy_star():
    node = parse("(?:(?=a))*b")
    rewritten = rewrite_strictly_nullable_stars(node)
    assert to_pattern_string(rewritten, NU) == "b"
    assert rewritten.left == Empty()


def test_rewrite_leaves_everything_else_alone():
    for pattern in ["a*", "(?:$)*?", "(?:\\b){2,}", "(?=x)?"]:
        node = parse(pattern)
        assert rewrite_strictly_nullable_stars(node) == node


def test_rewrite_refuses_capturing_bodies(caplog):
    node = parse("(?:(?=(a)))*b")
    with caplog.at_level(logging.WARNING, logger="ecma_regex.optimizer"):
        rewritten = rewrite_strictly_nullable_stars(node)
    assert rewritten == node
    assert any("refusing" in r.message for r in caplog.records)


def test_rewrite_is_idempotent_and_preserves_validity():
    node = parse("(?:\\b)*(?:(?=a))*x|(?:$)*")
    once = rewrite_strictly_nullable_stars(node)
    assert rewrite_strictly_nullable_stars(once) == once
    assert not validate(once, NU)


def test_rewrite_applies_bottom_up_through_nesting():
    node = parse("(?:(?:\\b)*)*x")
    rewritten = rewrite_strictly_nullable_stars(node)
    assert to_pattern_string(rewritten, NU) == "x"


# --- equivalence checking ---------------------------------------------------------


def test_equivalent_patterns():
    report = check_equivalence(parse("a|b"), parse("[ab]"), NU, "ab", 3)
    assert report.equivalent


def test_disjunction_not_commutative():
    report = check_equivalence(parse("a|ab"), parse("ab|a"), NU, "ab", 2)
    assert not report.equivalent
    cx = report.counterexample
    assert (cx.input, cx.start) == ("ab", 0)
    assert cx.result_a.end_index == 1
    assert cx.result_b.end_index == 2


def test_branch_deduplication_is_unsound():
    a = parse("(?:(a)|(a))\\2()$")
    b = parse("(?:(a))\\2()$")
    report = check_equivalence(a, b, NU, "a", 2)
    assert not report.equivalent
    # the classic witness string also distinguishes them: presence differs
    ca, cb = compile_pattern(a, NU), compile_pattern(b, NU)
    diff = compare_attempts(ca, cb, tuple(map(ord, "aa")), 0)
    assert diff is not None
    assert (diff[0] is not None) and (diff[1] is None)


def test_greedy_question_mark_rewrite_is_unsound():
    report = check_equivalence(parse("()?"), parse("(?:()|)"), NU, "ab", 1)
    assert not report.equivalent
    assert report.counterexample.input == ""
    a, b = report.counterexample.result_a, report.counterexample.result_b
    assert a.captures == (None,)
    assert b.captures == ((0, 0),)


def test_lazy_question_mark_rewrite_is_unsound():
    report = check_equivalence(
        parse("(?=(a))??ab\\1c"), parse("(?:|(?=(a)))ab\\1c"), NU, "abc", 4
    )
    assert not report.equivalent
    cx = report.counterexample
    assert cx.input == "abac"
    assert cx.result_a is None
    assert cx.result_b.end_index == 4


def test_check_equivalence_requires_validated_patterns():
    with pytest.raises(ValueError):
        check_equivalence(parse("a{2,1}"), parse("a"), NU, "a", 1)


def test_counterexamples_are_reported_in_enumeration_order():
    # both differ on "" already; the empty string must win over longer inputs
    report = check_equivalence(parse("()"), parse("()?"), NU, "a", 2)
    assert report.counterexample.input == ""


def test_sn_matcher_never_progresses():
    # instrumented runs of a strictly nullable regex show zero net movement
    patterns = ["(?=(a))", "(?:^|$)", "(?:\\b){2,}", "(?<!x)(?:(?=a)|$)"]
    for pattern in patterns:
        node = parse(pattern)
        assert strictly_nullable(node)
        compiled = compile_pattern(node, NU, instrument=True)
        for text in ["", "a", "ab"]:
            chars = tuple(map(ord, text))
            for start in range(len(chars) + 1):
                recorder = Recorder(record_events=True)
                compiled.run(chars, start, recorder=recorder)
                for path, kind, info in recorder.events:
                    if kind == "continue" and path == "root":
                        assert info[0] == info[1] == start
