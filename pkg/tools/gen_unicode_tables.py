#!/usr/bin/env python3
"""Regenerate src/ecma_regex/data/unicode_tables.txt from the host UCD.

FOLD lines are the simple case-folding map: common (single-char) foldings are
taken from str.casefold; characters whose full folding is multi-char get their
simple folding from the hardcoded list below (the Greek titlecase letters with
prosgegrammeni, plus the three simple foldings added to Unicode in July 2023).

PROP lines carry General_Category=L membership ranges over the full range.
"""

from __future__ import annotations

import sys
import unicodedata
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "ecma_regex" / "data" / "unicode_tables.txt"

MAX_CP = 0x10FFFF

# Simple foldings for characters whose full folding is multi-char.
SIMPLE_ONLY = {}
for cp in list(range(0x1F88, 0x1F90)) + list(range(0x1F98, 0x1FA0)) + list(range(0x1FA8, 0x1FB0)):
    SIMPLE_ONLY[cp] = cp - 8
SIMPLE_ONLY[0x1FBC] = 0x1FB3
SIMPLE_ONLY[0x1FCC] = 0x1FC3
SIMPLE_ONLY[0x1FFC] = 0x1FF3
# July 2023 additions (Unicode 15.1 CaseFolding.txt S lines).
SIMPLE_ONLY[0x1E9E] = 0x00DF
SIMPLE_ONLY[0x1FD3] = 0x0390
SIMPLE_ONLY[0x1FE3] = 0x03B0


def fold_entries():
    for cp in range(MAX_CP + 1):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        folded = chr(cp).casefold()
        if len(folded) == 1:
            target = ord(folded)
            if target != cp:
                yield cp, target
        elif cp in SIMPLE_ONLY:
            yield cp, SIMPLE_ONLY[cp]


def letter_ranges():
    start = None
    prev = None
    for cp in range(MAX_CP + 1):
        if 0xD800 <= cp <= 0xDFFF:
            is_letter = False
        else:
            is_letter = unicodedata.category(chr(cp)).startswith("L")
        if is_letter:
            if start is None:
                start = cp
            prev = cp
        elif start is not None:
            yield start, prev
            start = None
    if start is not None:
        yield start, prev


def main():
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="ascii") as f:
        f.write(f"# generated by tools/gen_unicode_tables.py (host UCD {unicodedata.unidata_version}\n")
        f.write("#  + hardcoded simple-folding entries through the July 2023 additions)\n")
        n_fold = 0
        for cp, target in fold_entries():
            f.write(f"FOLD {cp:04X} {target:04X}\n")
            n_fold += 1
        n_prop = 0
        for lo, hi in letter_ranges():
            f.write(f"PROP General_Category=L {lo:04X}..{hi:04X}\n")
            n_prop += 1
    print(f"wrote {OUT}: {n_fold} FOLD entries, {n_prop} PROP ranges", file=sys.stderr)


if __name__ == "__main__":
    main()
