"""Executable ECMAScript regular-expression semantics with a verification harness."""

from .ast import Flags, Quantifier
from .parser import ParseError, ast_from_json, ast_to_json, parse_flags, parse_pattern
from .early_errors import validate
from .compiler import compile_pattern
from .executor import exec_pattern, match_all, test_pattern
from .optimizer import check_equivalence, rewrite_strictly_nullable_stars, strictly_nullable

__version__ = "0.1.0"

__all__ = [
    "Flags",
    "Quantifier",
    "ParseError",
    "parse_pattern",
    "parse_flags",
    "ast_to_json",
    "ast_from_json",
    "validate",
    "compile_pattern",
    "exec_pattern",
    "test_pattern",
    "match_all",
    "strictly_nullable",
    "rewrite_strictly_nullable_stars",
    "check_equivalence",
    "__version__",
]
