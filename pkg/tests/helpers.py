"""Shared test plumbing: parse + validate + compile in one step."""

from ecma_regex.ast import Flags
from ecma_regex.compiler import compile_pattern
from ecma_regex.early_errors import validate
from ecma_regex.executor import exec_pattern
from ecma_regex.parser import parse_pattern


def build(pattern: str, flags: str = "", **compile_kwargs):
    f = Flags.parse(flags)
    node = parse_pattern(pattern, f)
    errors = validate(node, f)
    assert not errors, [e.render() for e in errors]
    return compile_pattern(node, f, **compile_kwargs)


def run_exec(pattern: str, text: str, flags: str = "", last_index: int = 0):
    return exec_pattern(build(pattern, flags), text, last_index)


def span(record):
    return None if record is None else (record.index, record.end_index)


def cap_spans(record):
    return [(c.start, c.end) if c else None for c in record.captures]
