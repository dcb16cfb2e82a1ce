import pytest

from core.bigness import BushyWitness, StringSet, is_k_big
from core.dnc import MachineTable, OracleFunctionalTable
from core.errors import FormatError
from core.graphs import Graph, make_pair
from core.ground_construction import Enumerator
from core.iteration_forcing import BoundExhausted, Clause1, Clause2, Condition, initial_condition
from core.strings import BoundedString, FiniteTree, Order
from core.text_formats import (FormatReader, format_condition, format_enumerator, format_functional, format_graph,
                               format_machine_table, format_outcome, format_pairs, format_string_set, format_tree,
                               split_records)


class TestRecords:
    def test_comments_and_blanks_skipped(self):
        records = split_records("# header\n\nstr 1,0\n  e 0 1  \n")
        assert [(r.line_no, r.keyword, r.body) for r in records] == [(3, "str", "1,0"), (4, "e", "0 1")]


class TestSerializers:
    def test_string_set(self, h3):
        B = StringSet.of(h3, [(1,), (0, 2)], points=[()])
        assert format_string_set(B) == "set upward=true\nstr 0,2\nstr 1\npt -"

    def test_tree(self):
        tree = FiniteTree.full(Order((2,)), 1)
        assert format_tree(tree) == "tree stem=-\nstr -\nstr 0\nstr 1"

    def test_graph_and_pairs(self):
        G = Graph.from_edges([(2, 1), (0, 1)], vertices=[5])
        assert format_graph(G) == "graph\nv 0 1 2 5\ne 0 1\ne 1 2"
        assert format_pairs(frozenset({make_pair(1, 3), make_pair(0, 0)})) == "p 0\np 1 3"

    def test_tables(self, h3):
        assert format_machine_table(MachineTable({1: 0, 0: 2})) == "diag 0 -> 2\ndiag 1 -> 0"
        F = OracleFunctionalTable(h3, {(BoundedString(h3, (1,)), 0): 1, (BoundedString.empty(h3), 1): 0})
        assert format_functional(F) == "fn 1 | 0 -> 1\nfn - | 1 -> 0"
        en = Enumerator(((0, frozenset({2, 0})),), progression=(1, 3))
        assert format_enumerator(en) == "en 0: 0,2\nen every 1 3"

    def test_outcomes(self, h3):
        assert format_outcome(Clause1(BoundedString(h3, (2, 0)))) == "clause1 tau=2,0"
        out = Clause2(x=3, added=StringSet.empty(h3), horizon=4, universe=9, path_equality=False)
        assert format_outcome(out) == "clause2 x=3 horizon=4 U=9 path=no\nset upward=true"
        assert format_outcome(BoundExhausted("stuck")) == "exhausted stuck"


class TestReader:
    def test_order_line(self):
        reader = FormatReader()
        assert reader.parse_order("# h\norder 2 3 3\n") == Order((2, 3, 3))
        with pytest.raises(FormatError):
            reader.parse_order("str 1")
        with pytest.raises(FormatError, match="line 1"):
            reader.parse_order("order 3 2")

    def test_string_and_set(self, h3):
        reader = FormatReader(h3)
        assert reader.parse_string("str 2,1") == BoundedString(h3, (2, 1))
        B = reader.parse_string_set("set upward=true\nstr 1\npt -\n")
        assert B == StringSet.of(h3, [(1,)], points=[()])
        finite = reader.parse_string_set("order 2 2\nset upward=false\nstr 0,1\n")
        assert not finite.upward_closed
        assert finite.bound == Order((2, 2))

    def test_string_set_errors(self, h3):
        reader = FormatReader(h3)
        with pytest.raises(FormatError, match="line 2"):
            reader.parse_string_set("set upward=true\nstr 4\n")
        with pytest.raises(FormatError):
            reader.parse_string_set("set upward=maybe\n")
        with pytest.raises(FormatError):
            reader.parse_string_set("set upward=false\npt 1\n")
        with pytest.raises(FormatError):
            FormatReader().parse_string_set("set upward=true\nstr 1\n")

    def test_tree(self, h3):
        tree = FiniteTree.from_entries(h3, [(), (1,), (1, 0), (1, 2)], stem=(1,))
        text = "\n".join([str(h3), format_tree(tree)])
        assert FormatReader().parse_tree(text) == tree
        assert FormatReader(h3).parse_tree(format_tree(tree)) == tree

    def test_tree_witness_validates_after_parsing(self, h3):
        B = StringSet.of(h3, [(0, 1), (0, 2), (2,)])
        verdict = is_k_big(B, 2, BoundedString.empty(h3), 3)
        assert verdict.is_big
        parsed = FormatReader(h3).parse_tree(format_tree(verdict.witness.tree))
        assert parsed == verdict.witness.tree
        assert BushyWitness(parsed, 2, B).validate()

    def test_tree_errors(self, h3):
        reader = FormatReader(h3)
        with pytest.raises(FormatError):
            reader.parse_tree("str -\n")
        with pytest.raises(FormatError):
            reader.parse_tree("tree\nstr -\n")
        with pytest.raises(FormatError):
            reader.parse_tree("tree stem=-\nstr -\ne 0 1\n")
        with pytest.raises(FormatError):
            reader.parse_tree("tree stem=-\nstr -\nstr 0,1\n")
        with pytest.raises(FormatError):
            FormatReader().parse_tree("tree stem=-\nstr -\n")

    def test_graph(self):
        reader = FormatReader()
        G = reader.parse_graph("graph\nv 4\ne 0 1\ne 1 2\n")
        assert G == Graph.from_edges([(0, 1), (1, 2)], vertices=[4])
        assert reader.parse_graph(format_graph(G)) == G
        with pytest.raises(FormatError):
            reader.parse_graph("graph\ne 0 0\n")
        with pytest.raises(FormatError, match="line 2"):
            reader.parse_graph("graph\ne 0 1 2\n")

    def test_pairs_and_vertices(self):
        reader = FormatReader()
        assert reader.parse_pairs("p 0\np 1 3\n") == {make_pair(0, 0), make_pair(1, 3)}
        assert reader.parse_vertex_set("0,2,5") == {0, 2, 5}
        assert reader.parse_vertex_set("v 1 2\nv 7\n") == {1, 2, 7}

    def test_machine_table(self):
        t = FormatReader().parse_machine_table("diag 0 -> 1\ndiag 1 -> div\ndiag 2 -> 0\n")
        assert t.diag == {0: 1, 2: 0}
        with pytest.raises(FormatError):
            FormatReader().parse_machine_table("diag 0 -> 1\ndiag 0 -> 2\n")
        with pytest.raises(FormatError):
            FormatReader().parse_machine_table("diag 0 1\n")

    def test_functional(self, h3):
        F = FormatReader(h3).parse_functional("fn 1 | 0 -> 1\nfn - | 1 -> 0\n")
        assert F.entries == {(BoundedString(h3, (1,)), 0): 1, (BoundedString.empty(h3), 1): 0}
        with pytest.raises(FormatError):
            FormatReader(h3).parse_functional("fn 1 0 -> 1\n")

    def test_enumerator(self):
        en = FormatReader().parse_enumerator("en 3: 0,2,4\nen every 1 2\n")
        assert en.events == ((3, frozenset({0, 2, 4})),)
        assert en.progression == (1, 2)
        with pytest.raises(FormatError):
            FormatReader().parse_enumerator("en every 0 0\n")

    def test_condition(self, h3):
        c = initial_condition(MachineTable({0: 1}), h3)
        reader = FormatReader(h3)
        assert reader.parse_condition(format_condition(c)) == c
        with pytest.raises(FormatError):
            reader.parse_condition("cond k=2\nset upward=true\n")

    def test_settle_certificate(self, h3):
        c = Condition(BoundedString(h3, (2,)), StringSet.of(h3, [(1,)]), 2)
        out = Clause2(x=1, added=StringSet.of(h3, [(2, 2)]), horizon=3, universe=5, path_equality=True)
        text = "\n".join(["# settle W0", str(h3), format_condition(c), format_outcome(out), "# verified yes"])
        parsed_c, parsed_out = FormatReader().parse_settle_certificate(text)
        assert parsed_c == c
        assert parsed_out == out

    def test_certificate_needs_an_outcome(self, h3):
        with pytest.raises(FormatError):
            FormatReader(h3).parse_settle_certificate("cond stem=- k=1\nset upward=true\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            FormatReader().read_file(str(tmp_path / "absent.txt"))
