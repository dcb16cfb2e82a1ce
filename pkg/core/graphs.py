"""
Finite graphs: bipartiteness, odd-walk pairs, k-homogeneity and RWKL homogeneity
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from core.errors import InvalidGraph, OrderMismatch, SearchRefused
from core.strings import FiniteTree

logger = logging.getLogger(__name__)

PairSet = FrozenSet[FrozenSet[int]]
VertexSet = FrozenSet[int]

DEFAULT_SUBSET_BOUND = 6


def make_pair(x: int, y: int) -> FrozenSet[int]:
    return frozenset((x, y))


def pair_key(pair: FrozenSet[int]) -> Tuple[int, ...]:
    """Canonical tuple form: (x,) for degenerate pairs, (x, y) with x < y otherwise"""
    return tuple(sorted(pair))


def sorted_pairs(pairs: Iterable[FrozenSet[int]]) -> List[Tuple[int, ...]]:
    return sorted((pair_key(pair) for pair in pairs), key=lambda key: (key[0], len(key), key))


@dataclass(frozen=True)
class Graph:
    """Loop-free finite graph on natural-number vertices"""
    vertices: FrozenSet[int]
    edges: FrozenSet[FrozenSet[int]]

    def __post_init__(self):
        object.__setattr__(self, 'vertices', frozenset(int(v) for v in self.vertices))
        object.__setattr__(self, 'edges', frozenset(frozenset(edge) for edge in self.edges))
        for edge in self.edges:
            if len(edge) != 2:
                raise InvalidGraph(f"self-loop or malformed edge {sorted(edge)}")
            if not edge <= self.vertices:
                raise InvalidGraph(f"edge {sorted(edge)} uses an undeclared vertex")

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], vertices: Iterable[int] = ()) -> 'Graph':
        edge_set = frozenset(frozenset(edge) for edge in edges)
        vertex_set = frozenset(vertices) | frozenset(v for edge in edge_set for v in edge)
        return cls(vertex_set, edge_set)

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> 'Graph':
        return cls(frozenset(graph.nodes), frozenset(frozenset(edge) for edge in graph.edges))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(tuple(edge) for edge in self.edges)
        return graph

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(tuple(sorted(edge)) for edge in self.edges)

    def neighbours(self, v: int) -> List[int]:
        return sorted(u for edge in self.edges if v in edge for u in edge if u != v)


def is_locally_2_colorable(G: Graph) -> bool:
    """A finite graph is locally 2-colorable iff it has no odd cycle"""
    return nx.is_bipartite(G.to_networkx())


def _parity_graph(edges: Iterable[Tuple[int, int]], vertices: Iterable[int]) -> nx.Graph:
    """Each vertex v doubled into (v, 0) and (v, 1); edges flip parity"""
    doubled = nx.Graph()
    for v in vertices:
        doubled.add_node((v, 0))
        doubled.add_node((v, 1))
    for u, v in edges:
        doubled.add_edge((u, 0), (v, 1))
        doubled.add_edge((u, 1), (v, 0))
    return doubled


def _odd_pairs_of(doubled: nx.Graph, universe: Iterable[int]) -> PairSet:
    component: Dict[Tuple[int, int], int] = {}
    for index, nodes in enumerate(nx.connected_components(doubled)):
        for node in nodes:
            component[node] = index
    members = sorted(v for v in set(universe) if (v, 0) in component)
    pairs = set()
    for i, x in enumerate(members):
        for y in members[i:]:
            if component[(x, 0)] == component[(y, 1)]:
                pairs.add(make_pair(x, y))
    return frozenset(pairs)


def odd_pairs(G: Graph, universe: Optional[Iterable[int]] = None) -> PairSet:
    """Pairs {x, y} of universe joined by an odd-length walk, {x} on odd closed walks"""
    universe = G.vertices if universe is None else frozenset(universe)
    doubled = _parity_graph((tuple(edge) for edge in G.edges), G.vertices)
    return _odd_pairs_of(doubled, universe)


@lru_cache(maxsize=4096)
def _biclique_pairs(A0: VertexSet, A1: VertexSet) -> PairSet:
    vertices = A0 | A1
    doubled = _parity_graph(((a, b) for a in A0 for b in A1), vertices)
    return _odd_pairs_of(doubled, vertices)


def odd_pairs_biclique(A0: Iterable[int], A1: Iterable[int]) -> PairSet:
    """Odd pairs of the graph with edge set A0 x A1; x in both sides is a loop"""
    return _biclique_pairs(frozenset(A0), frozenset(A1))


def _colorable_with_h(graph: nx.Graph, subset: Sequence[int], H: FrozenSet[int], k: int) -> bool:
    """Backtracking k-coloring of graph[subset] with H-vertices forced to color 0"""
    order = sorted(subset, key=lambda v: (v not in H, v))
    inside = set(subset)
    colors: Dict[int, int] = {}

    def assign(index: int) -> bool:
        if index == len(order):
            return True
        v = order[index]
        options = [0] if v in H else range(k)
        for color in options:
            if all(colors.get(u) != color for u in graph.neighbors(v) if u in inside):
                colors[v] = color
                if assign(index + 1):
                    return True
                del colors[v]
        return False

    return assign(0)


def is_k_homogeneous(G: Graph, H: Iterable[int], k: int,
                     subset_bound: int = DEFAULT_SUBSET_BOUND) -> bool:
    H = frozenset(H) & G.vertices
    if not H:
        return True
    if k == 2 and is_locally_2_colorable(G):
        return not odd_pairs(G, H)
    if subset_bound > DEFAULT_SUBSET_BOUND:
        raise SearchRefused(f"exhaustive homogeneity check limited to subsets of size {DEFAULT_SUBSET_BOUND}")
    graph = G.to_networkx()
    size = min(subset_bound, len(G.vertices))
    logger.debug("exhaustive homogeneity check over subsets of size %d", size)
    # colorings of a set restrict to its subsets, so the largest subsets decide
    for subset in combinations(sorted(G.vertices), size):
        if not _colorable_with_h(graph, subset, H, k):
            return False
    return True


def rwkl_homogeneous(T: FiniteTree, H: Iterable[int], depth: int) -> bool:
    """Some color c has a branch of length depth constant c on H"""
    if any(value != 2 for value in T.bound.table):
        raise OrderMismatch(f"RWKL homogeneity needs a binary tree, got {T.bound}")
    positions = sorted(frozenset(H))
    for color in range(2):
        for node in T.nodes:
            if len(node) != depth:
                continue
            if all(node.entries[i] == color for i in positions if i < len(node)):
                return True
    return False
