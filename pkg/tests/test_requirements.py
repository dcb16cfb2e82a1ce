from concurrent.futures import ThreadPoolExecutor

import pytest

from conftest import everywhere_one, never_one
from core.bigness import decide_big
from core.dnc import OracleFunctionalTable
from core.errors import OrderMismatch, PreconditionFailed, RelationRejected
from core.graphs import Graph, make_pair
from core.requirements import (Biclique, BushyTreeCatalogue, ExplicitGraph, RequirementRegistry, RequirementRelation,
                               RequirementSet, TailSquare, constant_relation, find_witness, member,
                               propagation_requirement, register_relation, w_requirement)
from core.lemma_harness import random_entries
from core.strings import BoundedString, Order

PATH = Graph.from_edges([(0, 1), (1, 2)])


class TestPairSources:
    def test_tail_square(self):
        tail = TailSquare(1, 3)
        assert tail.pairs() == [frozenset({2}), frozenset({2, 3}), frozenset({3})]
        assert tail.has_pair(make_pair(2, 3))
        assert not tail.has_pair(make_pair(1, 2))
        with pytest.raises(PreconditionFailed):
            TailSquare(3, 3)

    def test_biclique_and_graph(self):
        assert Biclique({0}, {1}).has_pair(make_pair(0, 1))
        assert not Biclique({0}, {1}).has_pair(make_pair(0, 0))
        assert ExplicitGraph(PATH).pairs() == [frozenset({0, 1}), frozenset({1, 2})]


class TestConstantRelations:
    def test_true_and_false(self, h8):
        tau = BoundedString(h8, (3,))
        assert find_witness(constant_relation(True, h8), ExplicitGraph(PATH), tau, 2) == frozenset()
        assert find_witness(constant_relation(False, h8), ExplicitGraph(PATH), tau, 2) is None
        assert constant_relation(False, h8).descriptor == "FALSE"

    def test_order_checked(self, h8):
        with pytest.raises(OrderMismatch):
            member(constant_relation(True, h8), ExplicitGraph(PATH), BoundedString(Order((8,)), ()), 1)


class TestWRequirement:
    def test_everywhere_one_over_a_path(self, h8):
        W = w_requirement(3, everywhere_one(h8))
        assert W.descriptor == "W3"
        src = ExplicitGraph(PATH)
        assert find_witness(W, src, BoundedString(h8, (0, 0)), 2) == frozenset({make_pair(0, 1)})
        assert not member(W, src, BoundedString(h8, (5,)), 2)
        assert not member(W, src, BoundedString(h8, (0, 0)), 0)

    def test_never_one(self, h8):
        W = w_requirement(0, never_one(h8))
        assert not member(W, TailSquare(0, 6), BoundedString(h8, (1, 2, 3)), 2)

    def test_singletons_from_a_tail(self, h8):
        W = w_requirement(0, everywhere_one(h8))
        assert find_witness(W, TailSquare(0, 6), BoundedString(h8, (0, 0)), 1) == frozenset({frozenset({1})})
        assert not member(W, TailSquare(1, 6), BoundedString(h8, (0, 0)), 1)

    def test_requirement_set_bigness(self, h8):
        W = w_requirement(0, everywhere_one(h8))
        view = RequirementSet(W, Biclique({0}, {1}), 2)
        root = BoundedString.empty(h8)
        assert view.contains((4, 4))
        assert not view.contains((4,))
        assert decide_big(view, 8, root, 4)
        assert not decide_big(RequirementSet(W, Biclique({0}, {6}), 2), 1, root, 4)


class TestCatalogue:
    def test_first_trees(self):
        catalogue = BushyTreeCatalogue(BoundedString.empty(Order((2, 2))), 2)
        assert catalogue.leaves_upto(1) == [((),), ((0,), (1,))]

    def test_unary_trees_above_a_stem(self):
        catalogue = BushyTreeCatalogue(BoundedString(Order((4, 4)), (0,)), 1)
        trees = catalogue.leaves_upto(4)
        assert trees[0] == ((0,),)
        assert trees[1:] == [((0, v),) for v in range(4)]

    def test_codes_ignore_earlier_queries(self):
        lower = Order((8,) * 6)
        fresh = BushyTreeCatalogue(BoundedString.empty(lower), 1)
        warmed = BushyTreeCatalogue(BoundedString.empty(lower), 1)
        warmed.leaves_upto(1)
        assert warmed.leaves_upto(6) == fresh.leaves_upto(6)
        assert fresh.leaves_upto(6)[6] == ((5,),)

    def test_concurrent_queries_agree(self):
        lower = Order((4, 4, 4))
        expected = BushyTreeCatalogue(BoundedString.empty(lower), 2).leaves_upto(3)
        shared = BushyTreeCatalogue(BoundedString.empty(lower), 2)
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(shared.leaves_upto, [0, 3, 1, 3, 2, 3]))
        assert results[1] == results[3] == results[5] == expected
        assert results[0] == expected[:1]

    def test_needs_positive_r(self):
        with pytest.raises(PreconditionFailed):
            BushyTreeCatalogue(BoundedString.empty(Order((2, 2))), 0)


class TestPropagation:
    def test_true_base(self):
        lower = Order((4, 4))
        T = propagation_requirement(constant_relation(True, lower.interleaved()), BoundedString(lower, (0,)), 1,
                                    ExplicitGraph(PATH), 2)
        assert T.descriptor == "T[TRUE,0,1]"
        assert T.bound == lower
        assert member(T, ExplicitGraph(PATH), BoundedString.empty(lower), 2)

    def test_false_base(self):
        lower = Order((4, 4))
        T = propagation_requirement(constant_relation(False, lower.interleaved()), BoundedString(lower, (0,)), 1,
                                    ExplicitGraph(PATH), 2)
        assert not member(T, ExplicitGraph(PATH), BoundedString(lower, (1, 1)), 2)

    def test_membership_ignores_earlier_queries(self):
        lower = Order((8,) * 6)
        second_is_five = RequirementRelation("LEAF5", lower.interleaved(),
                                             lambda entries, F: len(entries) >= 2 and entries[1] == 5, support=None)
        src = ExplicitGraph(Graph.from_edges([(0, 1)]))
        tau = BoundedString(lower, (0,) * 6)

        def fresh():
            return propagation_requirement(second_is_five, BoundedString.empty(lower), 1, src, 1)

        assert member(fresh(), src, tau, 1)
        warmed = fresh()
        assert not member(warmed, src, BoundedString(lower, (0,)), 1)
        assert member(warmed, src, tau, 1)

    def test_membership_is_extension_closed(self, rng):
        lower = Order((8,) * 4)
        joined = lower.interleaved()
        table = OracleFunctionalTable(joined, {(BoundedString(joined, (3,)), x): 1 for x in range(joined.depth)})
        T = propagation_requirement(w_requirement(0, table), BoundedString.empty(lower), 1, ExplicitGraph(PATH), 2)
        src = ExplicitGraph(PATH)
        assert member(T, src, BoundedString(lower, (3,)), 2)
        assert not member(T, src, BoundedString(lower, (2, 3)), 2)
        for _ in range(60):
            body = random_entries(rng, lower, rng.randint(0, 3))
            if rng.random() < 0.5 and body:
                body = (3,) + body[1:]
            extension = random_entries(rng, lower, rng.randint(len(body), 4), body)
            if member(T, src, BoundedString(lower, body), 2):
                assert member(T, src, BoundedString(lower, extension), 2)

    def test_base_must_be_over_joined_order(self):
        lower = Order((4, 4))
        with pytest.raises(OrderMismatch):
            propagation_requirement(constant_relation(True, lower), BoundedString(lower, ()), 1,
                                    ExplicitGraph(PATH), 2)


class TestRegistration:
    def test_accepts_monotone_relation(self, h8):
        relation = register_relation("small", h8, lambda entries, F: all(v < 100 for pair in F for v in pair))
        assert relation.descriptor == "small"
        assert relation.support is None

    def test_rejects_non_extension_closed(self, h8):
        with pytest.raises(RelationRejected):
            register_relation("root-only", h8, lambda entries, F: len(entries) == 0)

    def test_rejects_non_singleton_monotone(self, h8):
        with pytest.raises(RelationRejected):
            register_relation("two-pairs", h8, lambda entries, F: len(F) >= 2)


class TestRegistry:
    def test_add_and_get(self, h8):
        registry = RequirementRegistry()
        registry.add("T", constant_relation(True, h8))
        registry.add("F", constant_relation(False, h8))
        assert registry.names() == ["T", "F"]
        assert len(registry) == 2
        assert registry.get("F").descriptor == "FALSE"
        with pytest.raises(PreconditionFailed):
            registry.add("T", constant_relation(True, h8))
        with pytest.raises(PreconditionFailed):
            registry.get("missing")


class TestMonotonicity:
    @staticmethod
    def random_table(rng, order):
        ones = [x for x in range(order.depth) if rng.random() < 0.5]
        return OracleFunctionalTable(order, {(BoundedString.empty(order), x): 1 for x in ones})

    def test_tail_membership_shrinks_as_x_grows(self, rng, h8):
        for _ in range(200):
            W = w_requirement(0, self.random_table(rng, h8))
            tau = BoundedString(h8, random_entries(rng, h8, rng.randint(0, 4)))
            x_low = rng.randint(0, 5)
            x_high = rng.randint(x_low, 8)
            if member(W, TailSquare(x_high, 9), tau, 2):
                assert member(W, TailSquare(x_low, 9), tau, 2)

    def test_membership_grows_with_f_bound(self, rng, h8):
        three_vertices = RequirementRelation("THREE", h8, lambda entries, F: len({v for p in F for v in p}) >= 3,
                                             support=None)
        square = ExplicitGraph(Graph.from_edges([(0, 1), (1, 2), (2, 3), (3, 0)]))
        tau = BoundedString.empty(h8)
        assert not member(three_vertices, square, tau, 1)
        assert member(three_vertices, square, tau, 2)
        for _ in range(200):
            W = w_requirement(0, self.random_table(rng, h8))
            tau = BoundedString(h8, random_entries(rng, h8, rng.randint(0, 4)))
            src = TailSquare(rng.randint(0, 3), 6) if rng.random() < 0.5 else square
            verdicts = [member(W, src, tau, f) for f in range(4)]
            assert verdicts == sorted(verdicts)
