"""Pattern-text parsing, the canonical printer, and the JSON AST codec.

The grammar is the strict ECMAScript pattern grammar with exactly three
documented leniencies outside `u` mode: unrecognized escapes fall back to
identity escapes (\\A matches 'A'), a lone `]` is a literal, and positive or
negative lookaheads may carry quantifiers. Everything else that engines accept
for legacy reasons (octal escapes, lone braces, class ranges with escape-class
endpoints...) is rejected in both modes.

Escape decoding happens here: class atoms and Char nodes store resolved code
points, never source text. Without the `u` flag the pattern itself is read as
UTF-16 code units, so an astral literal becomes two surrogate Char nodes,
matching how the input string will be tokenized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .ast import (
    ANCHOR_INPUT_END,
    ANCHOR_INPUT_START,
    ANCHOR_NOT_WORD_BOUNDARY,
    ANCHOR_WORD_BOUNDARY,
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
    LOOK_AHEAD,
    LOOK_BEHIND,
    LOOK_KINDS,
    LOOK_NEG_AHEAD,
    LOOK_NEG_BEHIND,
    Lookaround,
    NamedBackreference,
    NonCapturingGroup,
    Quantified,
    Quantifier,
    RegexNode,
    UnicodeProperty,
)
from .charmodel import CODE_POINT, utf16_units

SYNTAX_CHARS = set(map(ord, "^$\\.*+?()[]{}|"))
CLASS_ESCAPE_KINDS = set("dDwWsS")
_CONTROL_ESCAPES = {"f": 0x0C, "n": 0x0A, "r": 0x0D, "t": 0x09, "v": 0x0B}


class ParseError(Exception):
    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at {position})")
        self.position = position
        self.message = message


def parse_flags(letters: str) -> Flags:
    return Flags.parse(letters)


def parse_pattern(text: str, flags: Flags) -> RegexNode:
    units = utf16_units(text)
    chars = CODE_POINT.tokenize(units) if flags.unicode else tuple(units)
    parser = _Parser(chars, flags)
    node = parser.disjunction()
    if not parser.at_end():
        raise ParseError(parser.pos, "unexpected character")
    return node


class _Parser:
    def __init__(self, chars: tuple[int, ...], flags: Flags):
        self.chars = chars
        self.flags = flags
        self.u = flags.unicode
        self.pos = 0

    # -- stream helpers

    def at_end(self) -> bool:
        return self.pos >= len(self.chars)

    def peek(self, offset=0) -> Optional[int]:
        i = self.pos + offset
        return self.chars[i] if i < len(self.chars) else None

    def next(self) -> int:
        if self.at_end():
            raise ParseError(self.pos, "unexpected end of pattern")
        cp = self.chars[self.pos]
        self.pos += 1
        return cp

    def eat(self, ch: str) -> bool:
        if self.peek() == ord(ch):
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.eat(ch):
            raise ParseError(self.pos, f"expected {ch!r}")

    def looking_at(self, s: str) -> bool:
        return all(self.peek(i) == ord(c) for i, c in enumerate(s))

    def error(self, message: str):
        raise ParseError(self.pos, message)

    # -- grammar

    def disjunction(self) -> RegexNode:
        alternatives = [self.alternative()]
        while self.eat("|"):
            alternatives.append(self.alternative())
        node = alternatives[-1]
        for alt in reversed(alternatives[:-1]):
            node = Disjunction(alt, node)
        return node

    def alternative(self) -> RegexNode:
        terms = []
        while not self.at_end() and self.peek() not in (ord("|"), ord(")")):
            terms.append(self.term())
        if not terms:
            return Empty()
        node = terms[-1]
        for term in reversed(terms[:-1]):
            node = Concat(term, node)
        return node

    def term(self) -> RegexNode:
        cp = self.peek()
        if cp == ord("^"):
            self.pos += 1
            return self.no_quantifier(Anchor(ANCHOR_INPUT_START))
        if cp == ord("$"):
            self.pos += 1
            return self.no_quantifier(Anchor(ANCHOR_INPUT_END))
        if cp == ord("\\") and self.peek(1) == ord("b"):
            self.pos += 2
            return self.no_quantifier(Anchor(ANCHOR_WORD_BOUNDARY))
        if cp == ord("\\") and self.peek(1) == ord("B"):
            self.pos += 2
            return self.no_quantifier(Anchor(ANCHOR_NOT_WORD_BOUNDARY))
        if self.looking_at("(?=") or self.looking_at("(?!"):
            look = self.lookaround()
            q = self.quantifier()
            if q is None:
                return look
            if self.u:
                self.error("quantified assertion is not allowed with the u flag")
            return Quantified(look, q)
        if self.looking_at("(?<") and self.peek(3) in (ord("="), ord("!")):
            look = self.lookaround()
            if self.quantifier() is not None:
                self.error("lookbehind cannot be quantified")
            return look
        atom = self.atom()
        q = self.quantifier()
        return atom if q is None else Quantified(atom, q)

    def no_quantifier(self, node: RegexNode) -> RegexNode:
        if self.quantifier() is not None:
            self.error("this assertion cannot be quantified")
        return node

    def lookaround(self) -> RegexNode:
        self.expect("(")
        self.expect("?")
        if self.eat("="):
            kind = LOOK_AHEAD
        elif self.eat("!"):
            kind = LOOK_NEG_AHEAD
        else:
            self.expect("<")
            kind = LOOK_BEHIND if self.eat("=") else (self.eat("!") and LOOK_NEG_BEHIND)
            if not kind:
                self.error("expected '=' or '!'")
        body = self.disjunction()
        self.expect(")")
        return Lookaround(kind, body)

    def quantifier(self) -> Optional[Quantifier]:
        cp = self.peek()
        if cp == ord("*"):
            self.pos += 1
            lo, hi = 0, None
        elif cp == ord("+"):
            self.pos += 1
            lo, hi = 1, None
        elif cp == ord("?"):
            self.pos += 1
            lo, hi = 0, 1
        elif cp == ord("{"):
            bounds = self.braced_bounds()
            if bounds is None:
                self.error("incomplete quantifier")
            lo, hi = bounds
        else:
            return None
        greedy = not self.eat("?")
        return Quantifier(lo, hi, greedy)

    def braced_bounds(self) -> Optional[tuple[int, Optional[int]]]:
        start = self.pos
        self.expect("{")
        lo = self.decimal_digits()
        if lo is None:
            self.pos = start
            self.error("expected a quantifier bound")
        if self.eat("}"):
            return lo, lo
        self.expect(",")
        if self.eat("}"):
            return lo, None
        hi = self.decimal_digits()
        if hi is None:
            self.error("expected a quantifier bound")
        self.expect("}")
        return lo, hi

    def decimal_digits(self) -> Optional[int]:
        digits = []
        while (cp := self.peek()) is not None and ord("0") <= cp <= ord("9"):
            digits.append(chr(cp))
            self.pos += 1
        return int("".join(digits)) if digits else None

    def atom(self) -> RegexNode:
        cp = self.peek()
        if cp == ord("."):
            self.pos += 1
            return Dot()
        if cp == ord("\\"):
            self.pos += 1
            return self.atom_escape()
        if cp == ord("["):
            return self.character_class()
        if cp == ord("("):
            return self.group()
        if cp == ord("]"):
            if self.u:
                self.error("lone ']' is not allowed with the u flag")
            self.pos += 1
            return Char(cp)
        if cp in SYNTAX_CHARS or cp is None:
            self.error("unexpected character")
        self.pos += 1
        return Char(cp)

    def group(self) -> RegexNode:
        self.expect("(")
        if self.eat("?"):
            if self.eat(":"):
                body = self.disjunction()
                self.expect(")")
                return NonCapturingGroup(body)
            self.expect("<")
            name = self.group_name()
            body = self.disjunction()
            self.expect(")")
            return Group(body, name)
        body = self.disjunction()
        self.expect(")")
        return Group(body, None)

    def group_name(self) -> str:
        chars = []
        first = True
        while True:
            if self.at_end():
                self.error("unterminated group name")
            cp = self.next()
            if cp == ord(">"):
                break
            if not _identifier_char(cp, first):
                self.error("invalid group name character")
            chars.append(chr(cp))
            first = False
        if not chars:
            self.error("empty group name")
        return "".join(chars)

    # -- escapes

    def atom_escape(self) -> RegexNode:
        cp = self.peek()
        if cp is None:
            self.error("trailing backslash")
        ch = chr(cp)
        if "1" <= ch <= "9":
            index = self.decimal_digits()
            return Backreference(index)
        if ch == "k":
            self.pos += 1
            if self.eat("<"):
                return NamedBackreference(self.group_name())
            if self.u:
                self.error("\\k must name a group with the u flag")
            return Char(ord("k"))
        if ch in CLASS_ESCAPE_KINDS:
            self.pos += 1
            return ClassEscape(ch)
        if ch in "pP":
            if self.u:
                self.pos += 1
                return self.unicode_property(negated=ch == "P")
            self.pos += 1
            return Char(cp)
        value = self.character_escape(in_class=False)
        return Char(value)

    def unicode_property(self, negated: bool) -> UnicodeProperty:
        self.expect("{")
        name = self.property_word()
        value = None
        if self.eat("="):
            value = self.property_word()
        self.expect("}")
        return UnicodeProperty(name, value, negated)

    def property_word(self) -> str:
        chars = []
        while (cp := self.peek()) is not None and (
            ord("a") <= cp <= ord("z") or ord("A") <= cp <= ord("Z") or cp == ord("_")
        ):
            chars.append(chr(cp))
            self.pos += 1
        if not chars:
            self.error("expected a property name")
        return "".join(chars)

    def character_escape(self, in_class: bool) -> int:
        """Decode one escape to a code point; the backslash is already consumed."""
        cp = self.next()
        ch = chr(cp)
        if ch in _CONTROL_ESCAPES:
            return _CONTROL_ESCAPES[ch]
        if ch == "c":
            nxt = self.peek()
            if nxt is not None and (ord("a") <= nxt <= ord("z") or ord("A") <= nxt <= ord("Z")):
                self.pos += 1
                return nxt % 32
            self.error("\\c must be followed by a letter")
        if ch == "x":
            value = self.hex_digits(2)
            if value is None:
                if self.u:
                    self.error("invalid \\x escape")
                return ord("x")
            return value
        if ch == "u":
            value = self.unicode_escape()
            if value is None:
                if self.u:
                    self.error("invalid \\u escape")
                return ord("u")
            return value
        if ch == "0":
            nxt = self.peek()
            if nxt is not None and ord("0") <= nxt <= ord("9"):
                self.error("\\0 cannot be followed by a digit")
            return 0
        if in_class and ch == "b":
            return 0x08
        if in_class and ch == "-":
            return ord("-")
        if cp in SYNTAX_CHARS or ch == "/":
            return cp
        if self.u:
            self.error(f"invalid escape \\{ch}")
        if in_class and "1" <= ch <= "9":
            self.error("numeric escapes are not allowed in character classes")
        return cp

    def hex_digits(self, count: int) -> Optional[int]:
        value = 0
        for i in range(count):
            cp = self.peek(i)
            if cp is None or chr(cp) not in "0123456789abcdefABCDEF":
                return None
            value = value * 16 + int(chr(cp), 16)
        self.pos += count
        return value

    def unicode_escape(self) -> Optional[int]:
        if self.u and self.eat("{"):
            digits = []
            while (cp := self.peek()) is not None and chr(cp) in "0123456789abcdefABCDEF":
                digits.append(chr(cp))
                self.pos += 1
            if not digits or not self.eat("}"):
                self.error("invalid \\u{...} escape")
            value = int("".join(digits), 16)
            if value > 0x10FFFF:
                self.error("code point out of range")
            return value
        value = self.hex_digits(4)
        if value is None:
            return None
        if self.u and 0xD800 <= value <= 0xDBFF and self.looking_at("\\u"):
            save = self.pos
            self.pos += 2
            trail = self.hex_digits(4)
            if trail is not None and 0xDC00 <= trail <= 0xDFFF:
                return 0x10000 + ((value - 0xD800) << 10) + (trail - 0xDC00)
            self.pos = save
        return value

    # -- character classes

    def character_class(self) -> CharacterClass:
        self.expect("[")
        negated = self.eat("^")
        atoms = []
        while True:
            if self.at_end():
                self.error("unterminated character class")
            if self.eat("]"):
                break
            first = self.class_atom()
            if (
                self.peek() == ord("-")
                and self.peek(1) is not None
                and self.peek(1) != ord("]")
            ):
                self.pos += 1
                second = self.class_atom()
                if not isinstance(first, CharRange) or not isinstance(second, CharRange):
                    self.error("character class escape cannot be a range endpoint")
                atoms.append(CharRange(first.lo, second.lo))
            else:
                atoms.append(first)
        return CharacterClass(negated, tuple(atoms))

    def class_atom(self):
        cp = self.next()
        if cp != ord("\\"):
            return CharRange(cp, cp)
        nxt = self.peek()
        if nxt is None:
            self.error("trailing backslash in character class")
        ch = chr(nxt)
        if ch in CLASS_ESCAPE_KINDS:
            self.pos += 1
            return ClassEscape(ch)
        if ch in "pP" and self.u:
            self.pos += 1
            return self.unicode_property(negated=ch == "P")
        value = self.character_escape(in_class=True)
        return CharRange(value, value)


def _identifier_char(cp: int, first: bool) -> bool:
    ch = chr(cp)
    if ch in "$_":
        return True
    if not first and cp in (0x200C, 0x200D):
        return True
    probe = ch if first else "a" + ch
    return probe.isidentifier()


# --- canonical printer --------------------------------------------------------

_QUANTIFIABLE = (
    Char,
    Dot,
    CharacterClass,
    ClassEscape,
    UnicodeProperty,
    Group,
    NonCapturingGroup,
    Backreference,
    NamedBackreference,
)


def to_pattern_string(node: RegexNode, flags: Flags) -> str:
    """Render an AST back to pattern text.

    Parsing the output reproduces an equal AST for any tree the parser or the
    fuzz generator can produce. Trees built by hand (e.g. a quantifier over a
    bare concatenation) gain semantically transparent (?:...) wrappers.
    """
    return _print(node, flags)


def _print(node: RegexNode, flags: Flags) -> str:
    if isinstance(node, Empty):
        return ""
    if isinstance(node, Char):
        return _print_char(node.codepoint, flags, in_class=False)
    if isinstance(node, Dot):
        return "."
    if isinstance(node, ClassEscape):
        return "\\" + node.kind
    if isinstance(node, UnicodeProperty):
        return _print_property(node)
    if isinstance(node, CharacterClass):
        parts = []
        for atom in node.atoms:
            if isinstance(atom, CharRange):
                if atom.lo == atom.hi:
                    parts.append(_print_char(atom.lo, flags, in_class=True))
                else:
                    parts.append(
                        _print_char(atom.lo, flags, in_class=True)
                        + "-"
                        + _print_char(atom.hi, flags, in_class=True)
                    )
            elif isinstance(atom, ClassEscape):
                parts.append("\\" + atom.kind)
            else:
                parts.append(_print_property(atom))
        return "[" + ("^" if node.negated else "") + "".join(parts) + "]"
    if isinstance(node, Disjunction):
        left = _print(node.left, flags)
        if isinstance(node.left, Disjunction):
            left = f"(?:{left})"
        return left + "|" + _print(node.right, flags)
    if isinstance(node, Concat):
        return _print_term(node.left, flags) + _print_term(node.right, flags, rhs=True)
    if isinstance(node, Quantified):
        body = _print(node.body, flags)
        ok = isinstance(node.body, _QUANTIFIABLE) or (
            not flags.unicode
            and isinstance(node.body, Lookaround)
            and node.body.kind in (LOOK_AHEAD, LOOK_NEG_AHEAD)
        )
        if not ok:
            body = f"(?:{body})"
        return body + _print_quantifier(node.quantifier)
    if isinstance(node, Group):
        name = f"?<{node.name}>" if node.name is not None else ""
        return f"({name}{_print(node.body, flags)})"
    if isinstance(node, NonCapturingGroup):
        return f"(?:{_print(node.body, flags)})"
    if isinstance(node, Lookaround):
        opener = {
            LOOK_AHEAD: "(?=",
            LOOK_NEG_AHEAD: "(?!",
            LOOK_BEHIND: "(?<=",
            LOOK_NEG_BEHIND: "(?<!",
        }[node.kind]
        return opener + _print(node.body, flags) + ")"
    if isinstance(node, Anchor):
        return {
            ANCHOR_INPUT_START: "^",
            ANCHOR_INPUT_END: "$",
            ANCHOR_WORD_BOUNDARY: "\\b",
            ANCHOR_NOT_WORD_BOUNDARY: "\\B",
        }[node.kind]
    if isinstance(node, Backreference):
        return "\\" + str(node.index)
    if isinstance(node, NamedBackreference):
        return f"\\k<{node.name}>"
    raise TypeError(f"cannot print {node!r}")


def _print_term(node: RegexNode, flags: Flags, rhs: bool = False) -> str:
    # Concat children must print at term level; a Disjunction child (or a
    # nested Concat on the left) needs a transparent wrapper to keep shape.
    if isinstance(node, Disjunction) or (not rhs and isinstance(node, Concat)):
        return f"(?:{_print(node, flags)})"
    return _print(node, flags)


def _print_quantifier(q: Quantifier) -> str:
    if (q.min, q.max) == (0, None):
        text = "*"
    elif (q.min, q.max) == (1, None):
        text = "+"
    elif (q.min, q.max) == (0, 1):
        text = "?"
    elif q.max is None:
        text = f"{{{q.min},}}"
    elif q.min == q.max:
        text = f"{{{q.min}}}"
    else:
        text = f"{{{q.min},{q.max}}}"
    return text if q.greedy else text + "?"


def _print_property(prop: UnicodeProperty) -> str:
    letter = "P" if prop.negated else "p"
    if prop.value is None:
        return f"\\{letter}{{{prop.name}}}"
    return f"\\{letter}{{{prop.name}={prop.value}}}"


def _print_char(cp: int, flags: Flags, in_class: bool) -> str:
    # Digits are hex-escaped so a printed numeric backreference can never
    # absorb a following literal digit on reparse.
    if cp > 0xFFFF and not flags.unicode:
        raise ValueError(
            f"U+{cp:04X} is not representable in a pattern without the u flag"
        )
    if in_class:
        needs_escape = chr(cp) in "]\\^-["
    else:
        needs_escape = cp in SYNTAX_CHARS or (cp == ord("]") and flags.unicode)
    if needs_escape:
        return "\\" + chr(cp)
    if 0x20 <= cp < 0x7F and not (ord("0") <= cp <= ord("9")):
        return chr(cp)
    if cp <= 0xFF:
        return f"\\x{cp:02x}"
    if cp <= 0xFFFF:
        return f"\\u{cp:04x}"
    return f"\\u{{{cp:x}}}"


# --- JSON codec ----------------------------------------------------------------


class DecodeError(Exception):
    pass


def ast_to_json(node: RegexNode, flags: Flags) -> str:
    return json.dumps({"flags": flags.to_string(), "pattern": _encode(node)}, indent=None)


def ast_from_json(text: str) -> tuple[RegexNode, Flags]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "pattern" not in doc:
        raise DecodeError("expected an object with 'flags' and 'pattern'")
    try:
        flags = Flags.parse(doc.get("flags", ""))
    except ValueError as exc:
        raise DecodeError(str(exc)) from None
    return _decode(doc["pattern"]), flags


def _encode(node: RegexNode) -> dict:
    if isinstance(node, Empty):
        return {"kind": "empty"}
    if isinstance(node, Char):
        return {"kind": "char", "codepoint": node.codepoint}
    if isinstance(node, Dot):
        return {"kind": "dot"}
    if isinstance(node, ClassEscape):
        return {"kind": "classEscape", "escape": node.kind}
    if isinstance(node, UnicodeProperty):
        return {
            "kind": "unicodeProperty",
            "name": node.name,
            "value": node.value,
            "negated": node.negated,
        }
    if isinstance(node, CharacterClass):
        atoms = []
        for atom in node.atoms:
            if isinstance(atom, CharRange):
                atoms.append({"kind": "range", "lo": atom.lo, "hi": atom.hi})
            else:
                atoms.append(_encode(atom))
        return {"kind": "class", "negated": node.negated, "atoms": atoms}
    if isinstance(node, Disjunction):
        return {"kind": "disjunction", "left": _encode(node.left), "right": _encode(node.right)}
    if isinstance(node, Concat):
        return {"kind": "concat", "left": _encode(node.left), "right": _encode(node.right)}
    if isinstance(node, Quantified):
        q = node.quantifier
        return {
            "kind": "quantified",
            "body": _encode(node.body),
            "min": q.min,
            "max": q.max,
            "greedy": q.greedy,
        }
    if isinstance(node, Group):
        return {"kind": "group", "body": _encode(node.body), "name": node.name}
    if isinstance(node, NonCapturingGroup):
        return {"kind": "nonCapturingGroup", "body": _encode(node.body)}
    if isinstance(node, Lookaround):
        return {"kind": "lookaround", "look": node.kind, "body": _encode(node.body)}
    if isinstance(node, Anchor):
        return {"kind": "anchor", "anchor": node.kind}
    if isinstance(node, Backreference):
        return {"kind": "backreference", "index": node.index}
    if isinstance(node, NamedBackreference):
        return {"kind": "namedBackreference", "name": node.name}
    raise TypeError(f"cannot encode {node!r}")


def _decode(doc) -> RegexNode:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DecodeError(f"expected a node object, got {doc!r}")
    kind = doc["kind"]
    try:
        if kind == "empty":
            return Empty()
        if kind == "char":
            return Char(_int_field(doc, "codepoint"))
        if kind == "dot":
            return Dot()
        if kind == "classEscape":
            if doc.get("escape") not in CLASS_ESCAPE_KINDS:
                raise DecodeError(f"bad class escape {doc.get('escape')!r}")
            return ClassEscape(doc["escape"])
        if kind == "unicodeProperty":
            return UnicodeProperty(doc["name"], doc.get("value"), bool(doc.get("negated")))
        if kind == "class":
            atoms = []
            for atom in doc.get("atoms", []):
                if isinstance(atom, dict) and atom.get("kind") == "range":
                    atoms.append(CharRange(_int_field(atom, "lo"), _int_field(atom, "hi")))
                else:
                    decoded = _decode(atom)
                    if not isinstance(decoded, (ClassEscape, UnicodeProperty)):
                        raise DecodeError(f"bad class atom {atom!r}")
                    atoms.append(decoded)
            return CharacterClass(bool(doc.get("negated")), tuple(atoms))
        if kind == "disjunction":
            return Disjunction(_decode(doc["left"]), _decode(doc["right"]))
        if kind == "concat":
            return Concat(_decode(doc["left"]), _decode(doc["right"]))
        if kind == "quantified":
            maximum = doc.get("max")
            if maximum is not None and not isinstance(maximum, int):
                raise DecodeError("quantifier max must be an int or null")
            return Quantified(
                _decode(doc["body"]),
                Quantifier(_int_field(doc, "min"), maximum, bool(doc.get("greedy", True))),
            )
        if kind == "group":
            return Group(_decode(doc["body"]), doc.get("name"))
        if kind == "nonCapturingGroup":
            return NonCapturingGroup(_decode(doc["body"]))
        if kind == "lookaround":
            if doc.get("look") not in LOOK_KINDS:
                raise DecodeError(f"bad lookaround kind {doc.get('look')!r}")
            return Lookaround(doc["look"], _decode(doc["body"]))
        if kind == "anchor":
            return Anchor(doc["anchor"])
        if kind == "backreference":
            return Backreference(_int_field(doc, "index"))
        if kind == "namedBackreference":
            return NamedBackreference(doc["name"])
    except DecodeError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DecodeError(f"malformed {kind!r} node: {exc}") from None
    raise DecodeError(f"unknown node kind {kind!r}")


def _int_field(doc: dict, key: str) -> int:
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise DecodeError(f"field {key!r} must be an integer")
    return value
