import shutil
from pathlib import Path

import pytest

from ecma_regex.ast import Flags, enumerate_subterms
from ecma_regex.compiler import Recorder, compile_pattern
from ecma_regex.early_errors import validate
from ecma_regex.executor import exec_pattern
from ecma_regex.harness import (
    FuzzConfig,
    OracleUnavailable,
    decode_escapes,
    differential_run,
    generate_cases,
    bundled_corpus_lines,
    run_corpus,
    run_invariant_suite,
)

ORACLE_CMD = ["node", str(Path(__file__).resolve().parents[1] / "frontend" / "dist" / "main.js")]


def oracle_available() -> bool:
    if shutil.which("node") is None:
        return False
    return Path(ORACLE_CMD[1]).exists()


def test_generation_is_deterministic():
    a = generate_cases(FuzzConfig(seed=42, case_count=20))
    b = generate_cases(FuzzConfig(seed=42, case_count=20))
    assert [(c.node, c.flags, c.inputs, c.starts) for c in a] == [
        (c.node, c.flags, c.inputs, c.starts) for c in b
    ]
    c = generate_cases(FuzzConfig(seed=43, case_count=20))
    assert a[0].node != c[0].node or a[1].node != c[1].node


def test_generated_cases_all_validate():
    for case in generate_cases(FuzzConfig(seed=5, case_count=200)):
        assert validate(case.node, case.flags) == []


def test_constructor_coverage():
    cases = generate_cases(FuzzConfig(seed=11, case_count=10_000, inputs_per_case=0))
    counts = {}
    for case in cases:
        for node, _ in enumerate_subterms(case.node):
            counts[type(node).__name__] = counts.get(type(node).__name__, 0) + 1
    expected = {
        "Empty", "Char", "Dot", "CharacterClass", "ClassEscape", "UnicodeProperty",
        "Disjunction", "Concat", "Quantified", "Group", "NonCapturingGroup",
        "Lookaround", "Anchor", "Backreference", "NamedBackreference",
    }
    assert expected <= counts.keys()
    assert all(counts[name] >= 50 for name in expected), counts


def test_invariant_suite_small_run_is_clean():
    report = run_invariant_suite(generate_cases(FuzzConfig(seed=3, case_count=300)))
    assert report.passed, report.violations[:3]
    assert report.runs == 900
    assert report.max_repeat_headroom_ok


def test_instrumentation_does_not_change_results():
    for case in generate_cases(FuzzConfig(seed=9, case_count=150)):
        plain = compile_pattern(case.node, case.flags)
        traced = compile_pattern(case.node, case.flags, instrument=True)
        for text in case.inputs:
            a = exec_pattern(plain, text, 0)
            b = exec_pattern(traced, text, 0, recorder=Recorder())
            assert (a is None) == (b is None)
            if a is not None:
                assert a == b


def test_instrumentation_neutral_on_corpus_patterns():
    from ecma_regex.parser import parse_pattern

    flags = Flags.parse("")
    for line in bundled_corpus_lines():
        if not line.strip() or line.startswith("#"):
            continue
        pattern_text, input_text, start_text, _ = line.split(" :: ")
        node = parse_pattern(pattern_text, flags)
        plain = compile_pattern(node, flags)
        traced = compile_pattern(node, flags, instrument=True)
        text = decode_escapes(input_text)
        a = exec_pattern(plain, text, int(start_text))
        b = exec_pattern(traced, text, int(start_text), recorder=Recorder(record_events=True))
        assert a == b


def test_corpus_runner_passes_bundled_corpus():
    report = run_corpus(bundled_corpus_lines())
    assert report.results, "corpus must not be empty"
    assert report.passed, [r for r in report.results if not r.ok][:3]


def test_corpus_runner_reports_failures_and_continues():
    lines = [
        "a :: a :: 0 :: MATCH 0 1",
        "a :: b :: 0 :: MATCH 0 1",  # wrong expectation
        "this line is : malformed",
        "b :: ab :: 0 :: MATCH 1 2",
    ]
    report = run_corpus(lines)
    assert [r.ok for r in report.results] == [True, False, False, True]


def test_corpus_checks_capture_spans():
    report = run_corpus(["a(b*)c :: abbcd :: 0 :: MATCH 0 4 g1=1:3"])
    assert report.passed
    report = run_corpus(["a(b*)c :: abbcd :: 0 :: MATCH 0 4 g1=1:2"])
    assert not report.passed


def test_decode_escapes():
    assert decode_escapes("ab\\x41\\u0042") == "abAB"
    assert decode_escapes("\\uD83D\\uDC22") == chr(0xD83D) + chr(0xDC22)
    assert decode_escapes("") == ""
    assert decode_escapes("a\\\\b") == "a\\b"
    with pytest.raises(ValueError):
        decode_escapes("\\x4")


@pytest.mark.skipif(not oracle_available(), reason="node oracle not built")
def test_differential_small_campaign_agrees():
    report = differential_run(generate_cases(FuzzConfig(seed=21, case_count=300)), ORACLE_CMD)
    assert report.compared > 0
    assert report.passed, report.disagreements[:3]


@pytest.mark.skipif(not oracle_available(), reason="node oracle not built")
def test_differential_reference_examples_agree():
    patterns = [
        ("a(b*)c", "abbcd"),
        ("(a|ab)", "ab"),
        ("a*(b*)(a*)", "abbaaac"),
        ("(?:(a)|(b))*", "ab"),
        ("()+", ""),
        ("()?", ""),
        ("(?=(a))??ab\\1c", "abac"),
        ("(?:|(?=(a)))ab\\1c", "abac"),
        ("\\1(a)", "a"),
        ("(?:(?:ab)|.)b", "ab"),
        ("(?<A>a*)(?<B>b*)\\k<A>", "aabaa"),
        ("(a|b)\\1", "ab"),
    ]
    from ecma_regex.harness import FuzzCase
    from ecma_regex.parser import parse_pattern

    flags = Flags.parse("")
    cases = []
    for i, (pattern, text) in enumerate(patterns):
        node = parse_pattern(pattern, flags)
        cases.append(FuzzCase(i, 0, node, flags, (text,), (0,)))
    report = differential_run(cases, ORACLE_CMD)
    assert report.compared == len(patterns)
    assert report.passed, report.disagreements


def test_oracle_unavailable_is_distinct():
    with pytest.raises(OracleUnavailable):
        differential_run(
            generate_cases(FuzzConfig(seed=1, case_count=1)),
            ["/no/such/binary/anywhere"],
        )
