"""Execution phase: start-position scanning and user-facing match records.

These functions are pure: the caller owns lastIndex threading, which keeps the
core referentially transparent. All positions in an ExecRecord are UTF-16
code-unit offsets (what a host JavaScript engine reports), even when the
pattern ran in code-point mode; the mapping is handled here so the matcher
layer never sees unit offsets.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional

from .compiler import MISMATCH, CompiledPattern, MatchState, Recorder
from .charmodel import units_to_str, utf16_units


@dataclass(frozen=True)
class CaptureSpan:
    start: int
    end: int
    text: str

    def to_json_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "text": self.text}


@dataclass(frozen=True)
class ExecRecord:
    index: int
    end_index: int
    matched: str
    captures: tuple[Optional[CaptureSpan], ...]
    named: dict[str, Optional[CaptureSpan]]
    input_length: int

    def to_json_dict(self) -> dict:
        return {
            "matched": True,
            "index": self.index,
            "endIndex": self.end_index,
            "match": self.matched,
            "captures": [c.to_json_dict() if c else None for c in self.captures],
            "named": {k: (v.to_json_dict() if v else None) for k, v in self.named.items()},
            "inputLength": self.input_length,
        }


def exec_pattern(
    compiled: CompiledPattern,
    input_text: str,
    last_index: int = 0,
    recorder: Optional[Recorder] = None,
) -> Optional[ExecRecord]:
    """One exec attempt: anchored at last_index when sticky, scanning otherwise.

    last_index is a code-unit offset; one falling inside a surrogate pair in
    code-point mode starts the attempt at that pair's character.
    """
    if last_index < 0:
        raise ValueError("last_index must be nonnegative")
    units = utf16_units(input_text)
    chars = compiled.model.tokenize(units)
    starts = _char_start_units(compiled, chars)
    if last_index > len(units):
        return None
    first = bisect_right(starts, last_index) - 1
    if compiled.flags.sticky:
        candidates = range(first, first + 1)
    else:
        candidates = range(first, len(chars) + 1)
    for i in candidates:
        r = compiled.run(chars, i, recorder=recorder)
        if r is not MISMATCH:
            return _build_record(compiled, units, starts, i, r)
    return None


def test_pattern(compiled: CompiledPattern, input_text: str) -> bool:
    return exec_pattern(compiled, input_text, 0) is not None


def match_all(compiled: CompiledPattern, input_text: str) -> list[ExecRecord]:
    """Every match in order, advancing past empty matches to guarantee progress."""
    units = utf16_units(input_text)
    records = []
    last_index = 0
    while True:
        record = exec_pattern(compiled, input_text, last_index)
        if record is None:
            return records
        records.append(record)
        last_index = record.end_index
        if record.end_index == record.index:
            last_index = _advance(compiled, units, last_index)


def _advance(compiled: CompiledPattern, units: tuple[int, ...], i: int) -> int:
    if (
        compiled.model.unicode_mode
        and i + 1 < len(units)
        and 0xD800 <= units[i] <= 0xDBFF
        and 0xDC00 <= units[i + 1] <= 0xDFFF
    ):
        return i + 2
    return i + 1


def _char_start_units(compiled: CompiledPattern, chars: tuple[int, ...]) -> list[int]:
    """starts[k] = code-unit offset of character k; one extra entry for the end."""
    starts = [0]
    for ch in chars:
        starts.append(starts[-1] + compiled.model.char_unit_length(ch))
    return starts


def _build_record(
    compiled: CompiledPattern,
    units: tuple[int, ...],
    starts: list[int],
    start_char: int,
    state: MatchState,
) -> ExecRecord:
    def span(char_start: int, char_end: int) -> CaptureSpan:
        a, b = starts[char_start], starts[char_end]
        return CaptureSpan(a, b, units_to_str(units[a:b]))

    captures = tuple(
        span(c.start, c.end) if c is not None else None for c in state.captures
    )
    named = {name: captures[idx - 1] for name, idx in compiled.group_names.items()}
    top = span(start_char, state.end_index)
    return ExecRecord(
        index=top.start,
        end_index=top.end,
        matched=top.text,
        captures=captures,
        named=named,
        input_length=len(units),
    )
