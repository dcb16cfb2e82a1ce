import json

import pytest

from core.errors import FormatError, OrderMismatch, PreconditionFailed
from core.graphs import Graph
from core.ground_construction import DensityStrategy, DiagStrategy
from core.manifest import Manifest, load_setup
from core.strings import Order

ALWAYS = "".join(f"fn - | {x} -> 1\n" for x in range(4))


def write_lab(tmp_path, **overrides):
    files = {
        "table.txt": "diag 0 -> 0\ndiag 1 -> div\n",
        "path.txt": "graph\ne 0 1\ne 1 2\n",
        "always.txt": ALWAYS,
        "never.txt": "# no entries\n",
        "en.txt": "en 0: 0,2\n",
    }
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    data = {
        "order": [8, 8, 8, 8],
        "machine_table": "table.txt",
        "graphs": {"path": "path.txt"},
        "requirements": {"always": "W m=1 table=always.txt", "never": "req W m=0 table=never.txt", "yes": "TRUE"},
        "strategies": [
            {"kind": "diag", "name": "R0", "rank": 0, "enumerator": "en.txt"},
            {"kind": "density", "name": "S0", "rank": 1, "requirement": "always", "k": 2},
        ],
        "roster": ["never", "always"],
        "generic_graph": "path",
        "bounds": "x=2,a=2,y=4,f=2,depth=4,U=10",
        "seed": 7,
    }
    data.update(overrides)
    path = tmp_path / "lab.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestManifest:
    def test_load_setup(self, tmp_path):
        setup = load_setup(write_lab(tmp_path))
        assert setup.order == Order((8, 8, 8, 8))
        assert setup.table.diag == {0: 0}
        assert setup.registry.names() == ["always", "never", "yes"]
        assert [K.descriptor for K in setup.roster_relations()] == ["W0", "W1"]
        assert setup.generic_graph() == Graph.from_edges([(0, 1), (1, 2)])
        assert setup.search_bounds.universe == 10
        assert setup.manifest.stages == 200

    def test_fresh_strategies(self, tmp_path):
        setup = load_setup(write_lab(tmp_path))
        first = setup.build_strategies()
        second = setup.build_strategies()
        assert isinstance(first[0], DiagStrategy)
        assert isinstance(first[1], DensityStrategy)
        assert first[1].sigma.entries == ()
        assert first[0] is not second[0]

    def test_order_from_file(self, tmp_path):
        (tmp_path / "order.txt").write_text("order 8 8 8 8\n")
        setup = load_setup(write_lab(tmp_path, order="order.txt"))
        assert setup.order.depth == 4

    def test_no_generic_graph(self, tmp_path):
        setup = load_setup(write_lab(tmp_path, generic_graph=None))
        assert setup.generic_graph() == Graph.from_edges([])
        with pytest.raises(PreconditionFailed):
            setup.graph("missing")

    def test_propagation_registration(self, tmp_path):
        (tmp_path / "joined.txt").write_text("order 8 8 8 8\nfn - | 0 -> 1\n")
        path = write_lab(tmp_path, order=[8, 8], strategies=[], roster=[],
                         requirements={"base": "W m=0 table=joined.txt", "T0": "T base=base xi=0 r=1 source=path"})
        setup = load_setup(path)
        assert setup.registry.get("T0").descriptor == "T[W0,0,1]"
        assert setup.registry.get("T0").bound == Order((8, 8))

    def test_propagation_needs_joined_order(self, tmp_path):
        path = write_lab(tmp_path, order=[8, 8], strategies=[], roster=[],
                         requirements={"base": "TRUE", "T0": "T base=base xi=0 r=1 source=path"})
        with pytest.raises(OrderMismatch):
            load_setup(path)

    @pytest.mark.parametrize("overrides", [
        {"requirements": {"odd": "Q m=1"}},
        {"requirements": {"w": "W m=1"}},
        {"requirements": {"t": "T base=always"}},
        {"strategies": [{"kind": "density", "name": "S0", "rank": 0}]},
        {"strategies": [{"kind": "diag", "name": "R0", "rank": -1, "enumerator": "en.txt"}]},
        {"seed": "seven"},
        {"graphs": {"path": "nowhere.txt"}},
    ])
    def test_rejected_manifests(self, tmp_path, overrides):
        with pytest.raises(FormatError):
            load_setup(write_lab(tmp_path, **overrides))

    def test_missing_seed(self, tmp_path):
        path = tmp_path / "lab.json"
        path.write_text(json.dumps({"order": [8, 8]}))
        with pytest.raises(FormatError, match="seed"):
            Manifest.load(str(path))

    def test_missing_or_broken_file(self, tmp_path):
        with pytest.raises(FormatError):
            Manifest.load(str(tmp_path / "absent.json"))
        broken = tmp_path / "broken.json"
        broken.write_text("{order: ")
        with pytest.raises(FormatError):
            Manifest.load(str(broken))
