"""Character layer: tokenization, canonicalization, and character sets.

The engine is parameterized over an abstract character model with two
instantiations. Without the `u` flag the input is a sequence of UTF-16 code
units; with it, surrogate pairs fuse into single code points (a lone surrogate
is its own character). Everything downstream (matchers, sets, folding) only
sees integers from the active model.

Case data lives in data/unicode_tables.txt (regenerate with
tools/gen_unicode_tables.py); the file format is line-oriented:
`FOLD <hex> <hex>` simple case foldings and
`PROP <name>=<value> <hexlo>..<hexhi>` property membership ranges.
"""

from __future__ import annotations

from bisect import bisect_right
from functools import lru_cache
from importlib import resources

from .ast import Flags

LINE_TERMINATORS = (0x0A, 0x0D, 0x2028, 0x2029)

# WhiteSpace plus LineTerminator: tab, LF, VT, FF, CR, space, NBSP, the Zs
# category, LS, PS, and the BOM.
WHITESPACE = (
    (0x09, 0x0D),
    (0x20, 0x20),
    (0xA0, 0xA0),
    (0x1680, 0x1680),
    (0x2000, 0x200A),
    (0x2028, 0x2029),
    (0x202F, 0x202F),
    (0x205F, 0x205F),
    (0x3000, 0x3000),
    (0xFEFF, 0xFEFF),
)

WORD_BASIC = ((0x30, 0x39), (0x41, 0x5A), (0x5F, 0x5F), (0x61, 0x7A))

BMP_MAX = 0xFFFF
UNICODE_MAX = 0x10FFFF


class UnsupportedProperty(Exception):
    """A \\p property outside the built-in table; a compile-time error, never a crash."""


class CharSet:
    """Immutable set of characters stored as sorted disjoint inclusive ranges."""

    __slots__ = ("_ranges", "_los")

    def __init__(self, ranges):
        normalized = _normalize(ranges)
        object.__setattr__(self, "_ranges", normalized)
        object.__setattr__(self, "_los", [lo for lo, _ in normalized])

    def __setattr__(self, name, value):
        raise AttributeError("CharSet is immutable")

    @classmethod
    def from_ranges(cls, ranges) -> "CharSet":
        return cls(list(ranges))

    @classmethod
    def from_chars(cls, chars) -> "CharSet":
        return cls([(c, c) for c in chars])

    @classmethod
    def empty(cls) -> "CharSet":
        return cls([])

    @property
    def ranges(self) -> tuple:
        return self._ranges

    def is_empty(self) -> bool:
        return not self._ranges

    def contains(self, cp: int) -> bool:
        i = bisect_right(self._los, cp) - 1
        return i >= 0 and cp <= self._ranges[i][1]

    def union(self, other: "CharSet") -> "CharSet":
        return CharSet(list(self._ranges) + list(other._ranges))

    def complement(self, max_char: int) -> "CharSet":
        out = []
        next_cp = 0
        for lo, hi in self._ranges:
            if lo > next_cp:
                out.append((next_cp, lo - 1))
            next_cp = hi + 1
        if next_cp <= max_char:
            out.append((next_cp, max_char))
        return CharSet(out)

    def difference(self, other: "CharSet") -> "CharSet":
        out = []
        cut = list(other._ranges)
        for lo, hi in self._ranges:
            pos = lo
            for clo, chi in cut:
                if chi < pos or clo > hi:
                    continue
                if clo > pos:
                    out.append((pos, clo - 1))
                pos = max(pos, chi + 1)
                if pos > hi:
                    break
            if pos <= hi:
                out.append((pos, hi))
        return CharSet(out)

    def __eq__(self, other):
        return isinstance(other, CharSet) and self._ranges == other._ranges

    def __hash__(self):
        return hash(self._ranges)

    def __repr__(self):
        parts = ", ".join(
            f"{lo:04X}" if lo == hi else f"{lo:04X}-{hi:04X}" for lo, hi in self._ranges[:8]
        )
        more = "..." if len(self._ranges) > 8 else ""
        return f"CharSet[{parts}{more}]"


def _normalize(ranges) -> tuple:
    pairs = sorted((lo, hi) for lo, hi in ranges if lo <= hi)
    out: list[tuple[int, int]] = []
    for lo, hi in pairs:
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


# --- UTF-16 plumbing ---------------------------------------------------------


def utf16_units(s: str) -> tuple[int, ...]:
    """The UTF-16 code-unit sequence of a Python string (astral chars split)."""
    units: list[int] = []
    for ch in s:
        cp = ord(ch)
        if cp > BMP_MAX:
            cp -= 0x10000
            units.append(0xD800 + (cp >> 10))
            units.append(0xDC00 + (cp & 0x3FF))
        else:
            units.append(cp)
    return tuple(units)


def units_to_str(units) -> str:
    """Back to a Python string; paired surrogates recombine, lone ones survive."""
    out = []
    i = 0
    n = len(units)
    while i < n:
        u = units[i]
        if 0xD800 <= u <= 0xDBFF and i + 1 < n and 0xDC00 <= units[i + 1] <= 0xDFFF:
            out.append(chr(0x10000 + ((u - 0xD800) << 10) + (units[i + 1] - 0xDC00)))
            i += 2
        else:
            out.append(chr(u))
            i += 1
    return "".join(out)


def chars_to_str(chars) -> str:
    return "".join(chr(c) for c in chars)


# --- case and property tables ------------------------------------------------


@lru_cache(maxsize=1)
def _tables() -> tuple[dict, dict]:
    folds: dict[int, int] = {}
    props: dict[str, list[tuple[int, int]]] = {}
    data = resources.files("ecma_regex").joinpath("data/unicode_tables.txt").read_text("ascii")
    for line in data.splitlines():
        if not line or line.startswith("#"):
            continue
        tag, rest = line.split(" ", 1)
        if tag == "FOLD":
            a, b = rest.split()
            folds[int(a, 16)] = int(b, 16)
        elif tag == "PROP":
            key, span = rest.rsplit(" ", 1)
            lo, hi = span.split("..")
            props.setdefault(key, []).append((int(lo, 16), int(hi, 16)))
    return folds, props


@lru_cache(maxsize=1)
def _simple_folds() -> dict[int, int]:
    return _tables()[0]


@lru_cache(maxsize=None)
def _property_charset(key: str) -> CharSet:
    ranges = _tables()[1].get(key)
    if ranges is None:
        raise KeyError(key)
    return CharSet(ranges)


@lru_cache(maxsize=1)
def _uppercase_canon_map() -> dict[int, int]:
    """Non-identity entries of the toUppercase-based canonicalization over the BMP."""
    out: dict[int, int] = {}
    for cp in range(BMP_MAX + 1):
        cu = _canonicalize_code_unit(cp)
        if cu != cp:
            out[cp] = cu
    return out


def _canonicalize_code_unit(cp: int) -> int:
    upper = chr(cp).upper()
    units = utf16_units(upper)
    if len(units) != 1:
        return cp
    cu = units[0]
    if cp >= 128 and cu < 128:
        return cp
    return cu


# A \p{...} name is normalized to a table key; only General_Category=L is
# built in, which is enough to exercise the mechanism end to end.
_PROPERTY_ALIASES = {
    ("general_category", "l"): "General_Category=L",
    ("general_category", "letter"): "General_Category=L",
    ("gc", "l"): "General_Category=L",
    ("gc", "letter"): "General_Category=L",
    (None, "l"): "General_Category=L",
    (None, "letter"): "General_Category=L",
}


class CharacterModel:
    """One of the two character layers: UTF-16 code units or code points."""

    __slots__ = ("unicode_mode", "max_char")

    def __init__(self, unicode_mode: bool):
        object.__setattr__(self, "unicode_mode", unicode_mode)
        object.__setattr__(self, "max_char", UNICODE_MAX if unicode_mode else BMP_MAX)

    def __setattr__(self, name, value):
        raise AttributeError("CharacterModel is immutable")

    def __repr__(self):
        return f"CharacterModel({'code points' if self.unicode_mode else 'code units'})"

    def tokenize(self, units) -> tuple[int, ...]:
        if not self.unicode_mode:
            return tuple(units)
        out = []
        i = 0
        n = len(units)
        while i < n:
            u = units[i]
            if 0xD800 <= u <= 0xDBFF and i + 1 < n and 0xDC00 <= units[i + 1] <= 0xDFFF:
                out.append(0x10000 + ((u - 0xD800) << 10) + (units[i + 1] - 0xDC00))
                i += 2
            else:
                out.append(u)
                i += 1
        return tuple(out)

    def render(self, chars) -> tuple[int, ...]:
        """Inverse of tokenize: back to UTF-16 units."""
        if not self.unicode_mode:
            return tuple(chars)
        return utf16_units(chars_to_str(chars))

    def char_unit_length(self, ch: int) -> int:
        return 2 if ch > BMP_MAX else 1

    def numeric_value(self, ch: int) -> int:
        """Characters are stored as their numeric values; identity, kept for the contract."""
        if not 0 <= ch <= self.max_char:
            raise ValueError(f"U+{ch:04X} outside this model's range")
        return ch

    def canonicalize(self, flags: Flags, ch: int) -> int:
        if not flags.ignore_case:
            return ch
        if self.unicode_mode:
            return _simple_folds().get(ch, ch)
        return _canonicalize_code_unit(ch)

    def canonical_map(self, flags: Flags) -> dict[int, int]:
        """Non-identity canonicalizations, for mapping whole sets."""
        if not flags.ignore_case:
            return {}
        if self.unicode_mode:
            return _simple_folds()
        return _uppercase_canon_map()

    def canonical_image(self, flags: Flags, cs: CharSet) -> CharSet:
        """The image of *cs* under canonicalize (identity when case-sensitive)."""
        if not flags.ignore_case:
            return cs
        cmap = self.canonical_map(flags)
        moved = [cp for cp in cmap if cs.contains(cp)]
        if not moved:
            return cs
        stay = cs.difference(CharSet.from_chars(moved))
        return stay.union(CharSet.from_chars(cmap[cp] for cp in moved))

    def word_chars(self, flags: Flags) -> CharSet:
        base = CharSet(WORD_BASIC)
        if self.unicode_mode and flags.ignore_case:
            extra = [cp for cp, t in _simple_folds().items() if base.contains(t)]
            base = base.union(CharSet.from_chars(extra))
        return base

    def dot_set(self, flags: Flags) -> CharSet:
        everything = CharSet([(0, self.max_char)])
        if flags.dot_all:
            return everything
        return CharSet.from_chars(LINE_TERMINATORS).complement(self.max_char)

    def class_escape_set(self, kind: str, flags: Flags) -> CharSet:
        base = kind.lower()
        if base == "d":
            s = CharSet([(0x30, 0x39)])
        elif base == "s":
            s = CharSet(WHITESPACE)
        elif base == "w":
            s = self.word_chars(flags)
        else:
            raise ValueError(f"bad class escape {kind!r}")
        if kind.isupper():
            return s.complement(self.max_char)
        return s

    def unicode_property_set(self, name: str, value) -> CharSet:
        if value is None:
            key = _PROPERTY_ALIASES.get((None, name.lower()))
        else:
            key = _PROPERTY_ALIASES.get((name.lower(), value.lower()))
        if key is None:
            raise UnsupportedProperty(f"\\p{{{name}{'=' + value if value else ''}}}")
        try:
            return _property_charset(key)
        except KeyError:
            raise UnsupportedProperty(key) from None


CODE_UNIT = CharacterModel(unicode_mode=False)
CODE_POINT = CharacterModel(unicode_mode=True)


def model_for(flags: Flags) -> CharacterModel:
    return CODE_POINT if flags.unicode else CODE_UNIT
