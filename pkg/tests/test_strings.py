import pytest

from core.errors import BoundViolation, DepthExceeded, FormatError, InvalidOrder, InvalidTree, NotANode, OrderMismatch
from core.strings import (BoundedString, FiniteTree, Order, children, format_entries, is_prefix, join_strings,
                          lookup_string, parse_entries, subtree_at)


class TestOrder:
    def test_rejects_bad_tables(self):
        for table in [(), (3, 2), (1, 4), (2, 0)]:
            with pytest.raises(InvalidOrder):
                Order(table)

    def test_h_and_depth(self, h3):
        assert h3.depth == 3
        assert h3.h(2) == 3
        with pytest.raises(DepthExceeded):
            h3.h(3)
        with pytest.raises(DepthExceeded):
            h3.check_depth(4)
        h3.check_depth(3)

    def test_interleaved_and_text(self):
        order = Order((2, 3, 4))
        assert order.interleaved().table == (2, 2, 3, 3, 4, 4)
        assert str(order) == "order 2 3 4"

    def test_strings_of_length(self):
        order = Order((2, 3))
        assert list(order.strings_of_length(2))[:3] == [(0, 0), (0, 1), (0, 2)]
        assert len(list(order.strings_of_length(2))) == 6


class TestBoundedString:
    def test_bounds_checked(self, h3):
        with pytest.raises(BoundViolation):
            BoundedString(h3, (0, 3))
        with pytest.raises(DepthExceeded):
            BoundedString(h3, (0, 0, 0, 0))

    def test_prefixes(self, h3):
        s = BoundedString(h3, (1, 0))
        assert str(s) == "str 1,0"
        assert str(BoundedString.empty(h3)) == "str -"
        assert [p.entries for p in s.prefixes()] == [(), (1,), (1, 0)]
        assert is_prefix(s.prefix(1), s)
        assert not s.is_prefix_of(s.prefix(1))
        assert s.prefix(1).is_comparable(s)
        assert not s.is_comparable(BoundedString(h3, (0,)))

    def test_equality_includes_order(self, h3):
        other = Order((3, 3, 3, 3))
        assert BoundedString(h3, (1,)) == BoundedString(h3, (1,))
        assert BoundedString(h3, (1,)) != BoundedString(other, (1,))
        with pytest.raises(OrderMismatch):
            is_prefix(BoundedString(h3, ()), BoundedString(other, (1,)))

    def test_children(self, h3):
        kids = children(BoundedString(h3, (2,)))
        assert sorted(kid.entries for kid in kids) == [(2, 0), (2, 1), (2, 2)]


class TestJoin:
    def test_context_first(self, h3):
        joined = join_strings(BoundedString(h3, (1, 2)), BoundedString(h3, (0,)))
        assert joined.entries == (1, 0, 2)
        assert joined.bound == h3.interleaved()

    def test_equal_lengths(self, h3):
        joined = join_strings(BoundedString(h3, (1, 2)), BoundedString(h3, (0, 0)))
        assert joined.entries == (1, 0, 2, 0)

    def test_longer_string_is_cut(self, h3):
        joined = join_strings(BoundedString(h3, ()), BoundedString(h3, (2, 2)))
        assert joined.entries == ()


class TestFiniteTree:
    def test_full_tree(self):
        tree = FiniteTree.full(Order((2, 2)), 2)
        assert len(tree) == 7
        assert [leaf.entries for leaf in tree.leaves()] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert tree.height() == 2
        root = BoundedString.empty(tree.bound)
        assert [child.entries for child in tree.children_of(root)] == [(0,), (1,)]

    def test_missing_parent(self, h3):
        with pytest.raises(InvalidTree):
            FiniteTree.from_entries(h3, [(), (0, 1)])

    def test_incomparable_with_stem(self, h3):
        with pytest.raises(InvalidTree):
            FiniteTree.from_entries(h3, [(), (0,), (1,)], stem=(0,))

    def test_stem_must_be_a_node(self, h3):
        with pytest.raises(InvalidTree):
            FiniteTree.from_entries(h3, [()], stem=(0,))

    def test_subtree_at(self):
        order = Order((2, 2))
        tree = FiniteTree.full(order, 2)
        sub = subtree_at(tree, BoundedString(order, (0,)))
        assert sorted(node.entries for node in sub.nodes) == [(), (0,), (0, 0), (0, 1)]
        assert sub.stem.entries == (0,)
        with pytest.raises(NotANode):
            subtree_at(FiniteTree.full(order, 1), BoundedString(order, (0, 0)))


class TestTextForms:
    def test_entries(self):
        assert format_entries(()) == "-"
        assert format_entries((1, 0, 2)) == "1,0,2"
        assert parse_entries("-") == ()
        assert parse_entries(" 1,0 ") == (1, 0)

    def test_lookup_string(self, h3):
        assert lookup_string(h3, "2,1").entries == (2, 1)
        with pytest.raises(FormatError):
            lookup_string(h3, "a,b")
        with pytest.raises(BoundViolation):
            lookup_string(h3, "5")
