"""Static validation: reject patterns before compilation.

Patterns that pass here are exactly the ones the engine guarantees never to
abort on (no assertion failures, no fuel exhaustion). Class-range validity is
checked here rather than in the parser so ASTs ingested from JSON get the same
protection as parsed ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    Backreference,
    CharRange,
    CharacterClass,
    Flags,
    Group,
    NamedBackreference,
    Quantified,
    RegexContext,
    RegexNode,
    context_path,
    count_groups_within,
    enumerate_subterms,
)

QUANTIFIER_MIN_GT_MAX = "QuantifierMinGtMax"
DUPLICATE_GROUP_NAME = "DuplicateGroupName"
DANGLING_NAMED_BACKREF = "DanglingNamedBackref"
NUMERIC_BACKREF_OUT_OF_RANGE = "NumericBackrefOutOfRange"
INVALID_CLASS_RANGE = "InvalidClassRange"


@dataclass(frozen=True)
class EarlyError:
    kind: str
    detail: str
    location: RegexContext

    def render(self) -> str:
        return f"EARLY_ERROR {self.kind} at {context_path(self.location)}"


def validate(root: RegexNode, flags: Flags) -> list[EarlyError]:
    """All early errors in pre-order of the offending node; empty means ok."""
    del flags  # no current rule is flag-sensitive
    total_groups = count_groups_within(root)
    defined_names: set[str] = set()
    for node, _ in enumerate_subterms(root):
        if isinstance(node, Group) and node.name is not None:
            defined_names.add(node.name)

    errors: list[EarlyError] = []
    seen_names: set[str] = set()
    for node, ctx in enumerate_subterms(root):
        if isinstance(node, Quantified):
            q = node.quantifier
            if q.max is not None and q.min > q.max:
                errors.append(
                    EarlyError(
                        QUANTIFIER_MIN_GT_MAX,
                        f"quantifier {{{q.min},{q.max}}} has min > max",
                        ctx,
                    )
                )
        elif isinstance(node, CharacterClass):
            for atom in node.atoms:
                if isinstance(atom, CharRange) and atom.lo > atom.hi:
                    errors.append(
                        EarlyError(
                            INVALID_CLASS_RANGE,
                            f"class range U+{atom.lo:04X}-U+{atom.hi:04X} is reversed",
                            ctx,
                        )
                    )
        elif isinstance(node, Group) and node.name is not None:
            if node.name in seen_names:
                errors.append(
                    EarlyError(
                        DUPLICATE_GROUP_NAME,
                        f"group name {node.name!r} is defined more than once",
                        ctx,
                    )
                )
            seen_names.add(node.name)
        elif isinstance(node, NamedBackreference):
            if node.name not in defined_names:
                errors.append(
                    EarlyError(
                        DANGLING_NAMED_BACKREF,
                        f"\\k<{node.name}> refers to an undefined group",
                        ctx,
                    )
                )
        elif isinstance(node, Backreference):
            if node.index > total_groups:
                errors.append(
                    EarlyError(
                        NUMERIC_BACKREF_OUT_OF_RANGE,
                        f"\\{node.index} exceeds the {total_groups} capture group(s)",
                        ctx,
                    )
                )
    return errors
