import random

from hypothesis import given, settings
from hypothesis import strategies as st

from ecma_regex.ast import (
    Char,
    Concat,
    ConcatLeft,
    Disjunction,
    DisjunctionRight,
    Empty,
    Group,
    context_path,
    count_groups_before,
    count_groups_within,
    enumerate_subterms,
    group_names,
    group_specifiers_that_match,
    reconstruct_root,
)
from ecma_regex.ast import Flags
from ecma_regex.harness import FuzzConfig, generate_regex
from ecma_regex.parser import parse_pattern


def parse(pattern, flags=""):
    return parse_pattern(pattern, Flags.parse(flags))


def test_count_groups_within_examples():
    assert count_groups_within(Empty()) == 0
    assert count_groups_within(parse("(?:(a)|(a))b")) == 2
    assert count_groups_within(parse("a*(b*)(a*)")) == 2


def test_count_groups_before_on_nested_disjunction():
    root = parse("(?:(a)|(a))b")
    groups = [(node, ctx) for node, ctx in enumerate_subterms(root) if isinstance(node, Group)]
    assert len(groups) == 2
    assert count_groups_before(groups[0][1]) == 0
    assert count_groups_before(groups[1][1]) == 1
    assert count_groups_before(()) == 0


def test_group_specifiers_that_match():
    root = parse("(?<A>a*)(?<B>b*)\\k<A>")
    found = group_specifiers_that_match(root, "A")
    assert [idx for idx, _ in found] == [1]
    assert group_specifiers_that_match(parse("a"), "A") == []
    twice = parse("(?<G>a)(?<G>b)")
    assert len(group_specifiers_that_match(twice, "G")) == 2


def test_group_names_map():
    assert group_names(parse("(?<A>a*)(?<B>b*)\\k<A>")) == {"A": 1, "B": 2}


def test_reconstruct_root_examples():
    n = Char(97)
    assert reconstruct_root(n, ()) is n
    # plugging the second group of (a)|(a) under concat-with-b reproduces the root
    focus = Group(Char(97))
    ctx = (DisjunctionRight(Group(Char(97))), ConcatLeft(Char(98)))
    root = reconstruct_root(focus, ctx)
    assert root == Concat(Disjunction(Group(Char(97)), Group(Char(97))), Char(98))


def test_distinct_contexts_for_identical_subregexes():
    root = parse("(?:(a)|(a))b")
    contexts = [ctx for node, ctx in enumerate_subterms(root) if node == Group(Char(97))]
    assert len(contexts) == 2
    assert contexts[0] != contexts[1]


def test_context_path_is_stable():
    root = parse("(a)b")
    (group_ctx,) = [ctx for node, ctx in enumerate_subterms(root) if isinstance(node, Group)]
    assert context_path(group_ctx) == "root/concat.left"
    assert context_path(()) == "root"


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_zipper_round_trip_on_random_asts(seed):
    node, _ = generate_regex(FuzzConfig(seed=0), random.Random(seed))
    for child, ctx in enumerate_subterms(node):
        assert reconstruct_root(child, ctx) == node


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_group_numbering_is_preorder_and_complete(seed):
    node, _ = generate_regex(FuzzConfig(seed=0), random.Random(seed))
    indices = [
        count_groups_before(ctx) + 1
        for sub, ctx in enumerate_subterms(node)
        if isinstance(sub, Group)
    ]
    assert indices == list(range(1, count_groups_within(node) + 1))


def test_numbering_skips_noncapturing_and_lookarounds():
    root = parse("(?:x)(?=(a))(?<N>b)\\1")
    names = group_names(root)
    assert names == {"N": 2}
    indices = [
        (count_groups_before(ctx) + 1, node.name)
        for node, ctx in enumerate_subterms(root)
        if isinstance(node, Group)
    ]
    assert indices == [(1, None), (2, "N")]


def test_nodes_are_hashable_and_comparable():
    a = parse("(?:(a)|(a))b")
    b = parse("(?:(a)|(a))b")
    assert a == b
    assert hash(a) == hash(b)
    assert a != parse("(?:(a)|(b))b")


def test_flags_letters_round_trip():
    for letters in ["", "gimsuyd", "iu", "d"]:
        assert Flags.parse(letters).to_string() == "".join(sorted(letters, key="dgimsuy".index))
