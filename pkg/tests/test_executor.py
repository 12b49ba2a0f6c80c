import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import build, cap_spans, run_exec, span

from ecma_regex.charmodel import utf16_units
from ecma_regex.compiler import MISMATCH
from ecma_regex.executor import exec_pattern, match_all
from ecma_regex.executor import test_pattern as pattern_matches


def test_scanning_finds_later_start():
    assert span(run_exec("b", "ab")) == (1, 2)


def test_sticky_does_not_scan():
    assert run_exec("b", "ab", flags="y") is None
    assert span(run_exec("b", "ab", flags="y", last_index=1)) == (1, 2)


def test_exec_record_fields():
    rec = run_exec("a*(b*)(a*)", "abbaaac")
    assert span(rec) == (0, 6)
    assert rec.matched == "abbaaa"
    assert cap_spans(rec) == [(1, 3), (3, 6)]
    assert rec.captures[0].text == "bb"
    assert rec.captures[1].text == "aaa"
    assert rec.input_length == 7


def test_named_groups_in_record():
    rec = run_exec("(?<A>a*)(?<B>b*)\\k<A>", "aabaa")
    assert rec.named["A"].text == "aa"
    assert rec.named["B"].text == "b"
    rec = run_exec("(?:(?<A>a)|(?<B>b))", "b")
    assert rec.named["A"] is None
    assert rec.named["B"].text == "b"


def test_last_index_beyond_length():
    assert run_exec("a", "aaa", last_index=4) is None
    assert span(run_exec("", "aaa", last_index=3)) == (3, 3)


def test_exec_positions_are_code_units_in_unicode_mode():
    turtle = "\U0001F422"
    rec = run_exec("(.)", turtle + "x", flags="u")
    assert span(rec) == (0, 2)
    assert cap_spans(rec) == [(0, 2)]
    assert rec.matched == turtle
    rec = run_exec("x", turtle + "x", flags="u")
    assert span(rec) == (2, 3)


def test_mid_pair_last_index_floors_to_the_character():
    turtle = "\U0001F422"
    rec = run_exec(".", turtle, flags="u", last_index=1)
    assert span(rec) == (0, 2)


def test_lone_surrogate_matching():
    lead = "\ud83d"
    rec = run_exec(".", lead, flags="u")
    assert span(rec) == (0, 1)
    assert run_exec("\\uD83D", lead + "x", flags="u") is not None


def test_test_pattern():
    assert pattern_matches(build("a"), "ba") is True
    assert pattern_matches(build("a"), "b") is False
    assert pattern_matches(build("(?=(a))??ab\\1c"), "abac") is False


def test_match_all_basic():
    assert [span(r) for r in match_all(build("a"), "aba")] == [(0, 1), (2, 3)]


def test_match_all_advances_past_empty_matches():
    assert [span(r) for r in match_all(build("a*"), "b")] == [(0, 0), (1, 1)]
    assert [span(r) for r in match_all(build("a*"), "ab")] == [(0, 1), (1, 1), (2, 2)]


def test_match_all_on_empty_input():
    assert [span(r) for r in match_all(build("x?"), "")] == [(0, 0)]
    assert match_all(build("x"), "") == []


def test_match_all_advances_by_code_point_in_unicode_mode():
    turtle = "\U0001F422"
    spans = [span(r) for r in match_all(build("", flags="u"), turtle + "a")]
    assert spans == [(0, 0), (2, 2), (3, 3)]
    spans_units = [span(r) for r in match_all(build(""), turtle + "a")]
    assert spans_units == [(0, 0), (1, 1), (2, 2), (3, 3)]


def test_negative_last_index_rejected():
    with pytest.raises(ValueError):
        run_exec("a", "a", last_index=-1)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32))
def test_exec_agrees_with_try_all_positions_oracle(seed):
    rng = random.Random(seed)
    from ecma_regex.harness import FuzzConfig, generate_regex

    node, flags = generate_regex(FuzzConfig(seed=0), rng)
    compiled = build_from(node, flags)
    text = "".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
    last_index = rng.randint(0, len(text))
    record = exec_pattern(compiled, text, last_index)
    # brute force: first character position >= last_index where the anchored
    # attempt succeeds
    chars = compiled.model.tokenize(utf16_units(text))
    expected = None
    for i in range(last_index, len(chars) + 1):
        r = compiled.run(chars, i)
        if r is not MISMATCH:
            expected = (i, r.end_index)
            break
    if compiled.flags.sticky:
        r = compiled.run(chars, last_index) if last_index <= len(chars) else MISMATCH
        expected = (last_index, r.end_index) if r is not MISMATCH else None
    got = span(record)
    assert got == expected


def build_from(node, flags):
    from ecma_regex.compiler import compile_pattern
    from ecma_regex.early_errors import validate

    assert not validate(node, flags)
    return compile_pattern(node, flags)
