"""Regex AST, flags, and the zipper contexts used for non-local queries.

Group numbering is never stored in the tree: a capturing group's 1-based index
is always derived from its context (count of capturing left parens that precede
it in a pre-order walk of the root). Keeping the context as the single source
of truth means rewrites can never leave stale indices behind.

All values here are immutable; they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union


@dataclass(frozen=True, slots=True)
class Flags:
    global_: bool = False
    ignore_case: bool = False
    multiline: bool = False
    dot_all: bool = False
    unicode: bool = False
    sticky: bool = False
    has_indices: bool = False

    _LETTERS = (
        ("d", "has_indices"),
        ("g", "global_"),
        ("i", "ignore_case"),
        ("m", "multiline"),
        ("s", "dot_all"),
        ("u", "unicode"),
        ("y", "sticky"),
    )

    @classmethod
    def parse(cls, letters: str) -> "Flags":
        table = dict(cls._LETTERS)
        seen = {}
        for ch in letters:
            if ch not in table:
                raise ValueError(f"unknown flag {ch!r}")
            if ch in seen:
                raise ValueError(f"duplicate flag {ch!r}")
            seen[ch] = True
        return cls(**{field: (letter in seen) for letter, field in cls._LETTERS})

    def to_string(self) -> str:
        return "".join(letter for letter, field in self._LETTERS if getattr(self, field))


@dataclass(frozen=True, slots=True)
class Quantifier:
    """Repetition bounds; max is None for unbounded."""

    min: int
    max: Optional[int]
    greedy: bool = True

    def __post_init__(self):
        if self.min < 0 or (self.max is not None and self.max < 0):
            raise ValueError("quantifier bounds must be nonnegative")


# --- class atoms ------------------------------------------------------------
# A character class holds a list of atoms: resolved code-point ranges (single
# characters are degenerate ranges) and embedded escape classes, which stay
# symbolic because their member sets depend on the flags (e.g. \w under `ui`).


@dataclass(frozen=True, slots=True)
class CharRange:
    lo: int
    hi: int


# --- AST nodes --------------------------------------------------------------


class RegexNode:
    """Base class; one subclass per grammar production."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Empty(RegexNode):
    pass


@dataclass(frozen=True, slots=True)
class Char(RegexNode):
    codepoint: int


@dataclass(frozen=True, slots=True)
class Dot(RegexNode):
    pass


@dataclass(frozen=True, slots=True)
class ClassEscape(RegexNode):
    kind: str  # one of d D w W s S


@dataclass(frozen=True, slots=True)
class UnicodeProperty(RegexNode):
    name: str
    value: Optional[str]
    negated: bool


ClassAtom = Union[CharRange, ClassEscape, UnicodeProperty]


@dataclass(frozen=True, slots=True)
class CharacterClass(RegexNode):
    negated: bool
    atoms: tuple[ClassAtom, ...]


@dataclass(frozen=True, slots=True)
class Disjunction(RegexNode):
    left: RegexNode
    right: RegexNode


@dataclass(frozen=True, slots=True)
class Concat(RegexNode):
    left: RegexNode
    right: RegexNode


@dataclass(frozen=True, slots=True)
class Quantified(RegexNode):
    body: RegexNode
    quantifier: Quantifier


@dataclass(frozen=True, slots=True)
class Group(RegexNode):
    body: RegexNode
    name: Optional[str] = None


@dataclass(frozen=True, slots=True)
class NonCapturingGroup(RegexNode):
    body: RegexNode


LOOK_AHEAD = "ahead"
LOOK_BEHIND = "behind"
LOOK_NEG_AHEAD = "negAhead"
LOOK_NEG_BEHIND = "negBehind"
LOOK_KINDS = (LOOK_AHEAD, LOOK_BEHIND, LOOK_NEG_AHEAD, LOOK_NEG_BEHIND)


@dataclass(frozen=True, slots=True)
class Lookaround(RegexNode):
    kind: str
    body: RegexNode

    def __post_init__(self):
        if self.kind not in LOOK_KINDS:
            raise ValueError(f"bad lookaround kind {self.kind!r}")


ANCHOR_INPUT_START = "inputStart"
ANCHOR_INPUT_END = "inputEnd"
ANCHOR_WORD_BOUNDARY = "wordBoundary"
ANCHOR_NOT_WORD_BOUNDARY = "notWordBoundary"
ANCHOR_KINDS = (
    ANCHOR_INPUT_START,
    ANCHOR_INPUT_END,
    ANCHOR_WORD_BOUNDARY,
    ANCHOR_NOT_WORD_BOUNDARY,
)


@dataclass(frozen=True, slots=True)
class Anchor(RegexNode):
    kind: str

    def __post_init__(self):
        if self.kind not in ANCHOR_KINDS:
            raise ValueError(f"bad anchor kind {self.kind!r}")


@dataclass(frozen=True, slots=True)
class Backreference(RegexNode):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("backreference index must be positive")


@dataclass(frozen=True, slots=True)
class NamedBackreference(RegexNode):
    name: str


# --- zipper contexts --------------------------------------------------------
# A context is the path from a focused sub-node up to the root, stored
# innermost-first as a tuple of frames. Each frame is the parent node with the
# focused child removed, so plugging the focus back through all frames
# reconstructs the unique root.


@dataclass(frozen=True, slots=True)
class DisjunctionLeft:
    right: RegexNode


@dataclass(frozen=True, slots=True)
class DisjunctionRight:
    left: RegexNode


@dataclass(frozen=True, slots=True)
class ConcatLeft:
    right: RegexNode


@dataclass(frozen=True, slots=True)
class ConcatRight:
    left: RegexNode


@dataclass(frozen=True, slots=True)
class QuantifiedInner:
    quantifier: Quantifier


@dataclass(frozen=True, slots=True)
class GroupInner:
    name: Optional[str]


@dataclass(frozen=True, slots=True)
class NonCapturingInner:
    pass


@dataclass(frozen=True, slots=True)
class LookaroundInner:
    kind: str


ContextFrame = Union[
    DisjunctionLeft,
    DisjunctionRight,
    ConcatLeft,
    ConcatRight,
    QuantifiedInner,
    GroupInner,
    NonCapturingInner,
    LookaroundInner,
]

RegexContext = tuple  # tuple[ContextFrame, ...], innermost first


def child_frames(node: RegexNode) -> list[tuple[RegexNode, ContextFrame]]:
    """Immediate children of *node* paired with the frame that removes them."""
    if isinstance(node, Disjunction):
        return [(node.left, DisjunctionLeft(node.right)), (node.right, DisjunctionRight(node.left))]
    if isinstance(node, Concat):
        return [(node.left, ConcatLeft(node.right)), (node.right, ConcatRight(node.left))]
    if isinstance(node, Quantified):
        return [(node.body, QuantifiedInner(node.quantifier))]
    if isinstance(node, Group):
        return [(node.body, GroupInner(node.name))]
    if isinstance(node, NonCapturingGroup):
        return [(node.body, NonCapturingInner())]
    if isinstance(node, Lookaround):
        return [(node.body, LookaroundInner(node.kind))]
    return []


def plug(node: RegexNode, frame: ContextFrame) -> RegexNode:
    """Rebuild the parent node by putting *node* back into *frame*."""
    if isinstance(frame, DisjunctionLeft):
        return Disjunction(node, frame.right)
    if isinstance(frame, DisjunctionRight):
        return Disjunction(frame.left, node)
    if isinstance(frame, ConcatLeft):
        return Concat(node, frame.right)
    if isinstance(frame, ConcatRight):
        return Concat(frame.left, node)
    if isinstance(frame, QuantifiedInner):
        return Quantified(node, frame.quantifier)
    if isinstance(frame, GroupInner):
        return Group(node, frame.name)
    if isinstance(frame, NonCapturingInner):
        return NonCapturingGroup(node)
    if isinstance(frame, LookaroundInner):
        return Lookaround(frame.kind, node)
    raise TypeError(f"not a context frame: {frame!r}")


def reconstruct_root(node: RegexNode, ctx: RegexContext) -> RegexNode:
    for frame in ctx:
        node = plug(node, frame)
    return node


def enumerate_subterms(root: RegexNode) -> Iterator[tuple[RegexNode, RegexContext]]:
    """Pre-order traversal yielding every sub-node with its context."""
    stack: list[tuple[RegexNode, RegexContext]] = [(root, ())]
    while stack:
        node, ctx = stack.pop()
        yield node, ctx
        children = child_frames(node)
        for child, frame in reversed(children):
            stack.append((child, (frame,) + ctx))


def count_groups_within(node: RegexNode) -> int:
    """Number of capturing groups in the subtree rooted at *node*."""
    total = 1 if isinstance(node, Group) else 0
    for child, _ in child_frames(node):
        total += count_groups_within(child)
    return total


def count_groups_before(ctx: RegexContext) -> int:
    """Capturing left parens strictly before the focus in pre-order.

    For a focused capturing group g this is g's 1-based index minus one. A
    group's own paren precedes its body, hence each enclosing GroupInner frame
    contributes one.
    """
    total = 0
    for frame in ctx:
        if isinstance(frame, (DisjunctionRight, ConcatRight)):
            total += count_groups_within(frame.left)
        elif isinstance(frame, GroupInner):
            total += 1
    return total


def group_specifiers_that_match(root: RegexNode, name: str) -> list[tuple[int, RegexContext]]:
    """All capturing groups named *name*, with 1-based indices, in pre-order."""
    found = []
    for node, ctx in enumerate_subterms(root):
        if isinstance(node, Group) and node.name == name:
            found.append((count_groups_before(ctx) + 1, ctx))
    return found


def group_names(root: RegexNode) -> dict[str, int]:
    """Map from group name to 1-based index (first definition wins)."""
    names: dict[str, int] = {}
    for node, ctx in enumerate_subterms(root):
        if isinstance(node, Group) and node.name is not None and node.name not in names:
            names[node.name] = count_groups_before(ctx) + 1
    return names


_FRAME_SEGMENTS = {
    DisjunctionLeft: "disjunction.left",
    DisjunctionRight: "disjunction.right",
    ConcatLeft: "concat.left",
    ConcatRight: "concat.right",
    QuantifiedInner: "quantified.body",
    GroupInner: "group.body",
    NonCapturingInner: "noncapturing.body",
    LookaroundInner: "lookaround.body",
}


def context_path(ctx: RegexContext) -> str:
    """Stable textual path from root to the focus, e.g. root/concat.left."""
    if not ctx:
        return "root"
    segments = [_FRAME_SEGMENTS[type(frame)] for frame in reversed(ctx)]
    return "root/" + "/".join(segments)
