"""
Stagewise construction of a bipartite graph against diagonalization opponents
and density requirements.

Each stage lets the highest-priority waiting strategy that can act do so.
Strategies never touch a component restrained by any strategy, so a satisfied
strategy is never injured. Every edge created at stage s touches a vertex that
is at least s, which keeps the edge relation among {0..s} fixed from stage s on.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from core.bigness import decide_big
from core.config import GroundBounds
from core.errors import BudgetExhausted, EngineBug, FrozenViolation, PreconditionFailed
from core.graphs import Graph, make_pair, odd_pairs
from core.requirements import Biclique, ExplicitGraph, RequirementRelation, RequirementSet
from core.strings import BoundedString, format_entries

logger = logging.getLogger(__name__)

WAITING = "waiting"
SATISFIED = "satisfied"
VACUOUS = "vacuous"


@dataclass(frozen=True)
class Enumerator:
    """Stagewise output of an opponent: listed events plus an optional progression"""
    events: Tuple[Tuple[int, FrozenSet[int]], ...] = ()
    progression: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        events = tuple(sorted((int(stage), frozenset(values)) for stage, values in self.events))
        object.__setattr__(self, 'events', events)
        if self.progression is not None:
            offset, step = self.progression
            if offset < 0 or step < 1:
                raise PreconditionFailed(f"progression needs offset >= 0 and step >= 1, got {self.progression}")

    def at(self, stage: int) -> FrozenSet[int]:
        """Everything output by the end of stage (monotone in stage)"""
        output: Set[int] = set()
        for event_stage, values in self.events:
            if event_stage > stage:
                break
            output |= values
        if self.progression is not None:
            offset, step = self.progression
            output.update(offset + step * i for i in range(stage + 1))
        return frozenset(output)

    def is_empty(self) -> bool:
        return not self.events and self.progression is None


@dataclass(frozen=True)
class EdgeDecision:
    stage: int
    u: int
    v: int
    strategy: str


@dataclass
class Strategy:
    """A prioritized requirement of the construction"""
    name: str
    rank: int
    status: str = field(default=WAITING, init=False)
    acted_at: Optional[int] = field(default=None, init=False)
    restrained: FrozenSet[int] = field(default=frozenset(), init=False)
    detail: str = field(default="", init=False)


@dataclass
class DiagStrategy(Strategy):
    """R_e: put an odd pair inside the output of opponent e"""
    e: int = 0
    enumerator: Enumerator = field(default_factory=Enumerator)


@dataclass
class DensityStrategy(Strategy):
    """S_{K,sigma,k}: make K over the final graph k-big above sigma"""
    K: Optional[RequirementRelation] = None
    sigma: Optional[BoundedString] = None
    k: int = 1
    committed: Optional[str] = field(default=None, init=False)
    A0: FrozenSet[int] = field(default=frozenset(), init=False)
    A1: FrozenSet[int] = field(default=frozenset(), init=False)

    def __post_init__(self):
        if self.K is None or self.sigma is None:
            raise PreconditionFailed(f"density strategy {self.name} needs a relation and a stem")
        if self.k < 1:
            raise PreconditionFailed(f"density strategy {self.name} needs k >= 1")
        width = self.sigma.bound.h(len(self.sigma))
        if width < 4 * self.k:
            raise PreconditionFailed(
                f"density strategy {self.name}: h({len(self.sigma)})={width} is below 4k={4 * self.k}")


@dataclass
class GroundReport:
    """Everything a ground run decided, in stage order"""
    stages: int
    strategies: List[Strategy]
    log: List[EdgeDecision]
    bipartite_by_stage: List[bool]
    vertex_budget: int
    fresh_used: int
    density_checks: Dict[str, bool] = field(default_factory=dict)
    diag_checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def frozen_ok(self) -> bool:
        return check_frozen_discipline(self.log)


class ConstructionState:
    """Mutable graph plus restraints; only the stage loop touches it"""

    def __init__(self, stages: int, window: int):
        self.graph = nx.Graph()
        self.stage = 0
        self.fresh = window
        self.budget = 4 * stages
        self.restraints: Dict[str, FrozenSet[int]] = {}
        self.log: List[EdgeDecision] = []
        self._components: Dict[int, FrozenSet[int]] = {}

    def component(self, v: int) -> FrozenSet[int]:
        cached = self._components.get(v)
        if cached is None:
            cached = frozenset(nx.node_connected_component(self.graph, v)) if v in self.graph else frozenset([v])
            self._components[v] = cached
        return cached

    def restrained(self) -> FrozenSet[int]:
        vertices: Set[int] = set()
        for members in self.restraints.values():
            vertices |= members
        return frozenset(vertices)

    def is_free(self, v: int) -> bool:
        return not (self.component(v) & self.restrained())

    def fresh_vertex(self) -> int:
        highest = max(self.graph.nodes, default=-1)
        v = max(self.fresh, self.stage, highest + 1)
        if v >= self.budget:
            raise BudgetExhausted(f"fresh vertex {v} exceeds the budget of {self.budget} at stage {self.stage}")
        self.fresh = v + 1
        return v

    def note_vertices(self, vertices: Iterable[int]):
        """Vertices named by opponents are never handed out as fresh"""
        highest = max(vertices, default=-1)
        if highest >= self.fresh:
            self.fresh = highest + 1

    def add_edge(self, u: int, v: int, strategy: str):
        if self.stage > max(u, v):
            raise FrozenViolation(f"edge {u}-{v} decided at stage {self.stage}")
        self.graph.add_edge(u, v)
        self._components.clear()
        self.log.append(EdgeDecision(self.stage, min(u, v), max(u, v), strategy))

    def restrain(self, strategy: str, vertices: Iterable[int]):
        self.restraints[strategy] = frozenset(vertices)

    def snapshot(self) -> Graph:
        return Graph.from_networkx(self.graph)


def _stays_bipartite(graph: nx.Graph, edges: Sequence[Tuple[int, int]]) -> bool:
    trial = graph.copy()
    trial.add_edges_from(edges)
    return nx.is_bipartite(trial)


def _act_diag(strategy: DiagStrategy, state: ConstructionState) -> bool:
    output = sorted(strategy.enumerator.at(state.stage))
    state.note_vertices(output)
    free = [v for v in output if state.is_free(v)]
    for x, y in combinations(free, 2):
        if y in state.component(x):
            continue
        z1 = state.fresh_vertex()
        z2 = state.fresh_vertex()
        for u, v in ((x, z1), (z1, z2), (z2, y)):
            state.add_edge(u, v, strategy.name)
        strategy.restrained = state.component(x)
        strategy.detail = f"pair {x},{y} via {z1},{z2}"
        state.restrain(strategy.name, strategy.restrained)
        logger.info("stage %d: %s joined %d and %d by a path of length 3", state.stage, strategy.name, x, y)
        return True
    return False


class DensitySearch:
    """Candidate (A0, A1) pairs of one density strategy, with cached bigness tests"""

    def __init__(self, strategy: DensityStrategy, bounds: GroundBounds):
        self.strategy = strategy
        self.bounds = bounds
        sigma = strategy.sigma
        self.depth = min(sigma.bound.depth, len(sigma) + bounds.depth)
        self._big: Dict[Tuple[FrozenSet[int], FrozenSet[int]], bool] = {}

    def biclique_big(self, A0: FrozenSet[int], A1: FrozenSet[int]) -> bool:
        key = (A0, A1)
        if key not in self._big:
            view = RequirementSet(self.strategy.K, Biclique(A0, A1), self.bounds.f_bound)
            self._big[key] = decide_big(view, 2 * self.strategy.k, self.strategy.sigma, self.depth)
        return self._big[key]

    def graph_big(self, graph: nx.Graph) -> bool:
        view = RequirementSet(self.strategy.K, ExplicitGraph(Graph.from_networkx(graph)), self.bounds.f_bound)
        return decide_big(view, self.strategy.k, self.strategy.sigma, self.depth)

    def candidates(self, state: ConstructionState) -> Iterable[Tuple[FrozenSet[int], FrozenSet[int]]]:
        free = [v for v in range(self.bounds.vertex_window) if state.is_free(v)]
        for size0 in range(1, self.bounds.a_size + 1):
            for size1 in range(1, self.bounds.a_size + 1):
                for A0 in combinations(free, size0):
                    comp0 = frozenset().union(*(state.component(v) for v in A0))
                    for A1 in combinations([v for v in free if v not in comp0], size1):
                        comp1 = frozenset().union(*(state.component(v) for v in A1))
                        if comp1 & comp0:
                            continue
                        yield frozenset(A0), frozenset(A1)


def _attachments(graph: nx.Graph, a: int, b: int, A1: Sequence[int]) -> List[Tuple[int, int]]:
    """Attach each y to a unless that closes an odd cycle, else to b"""
    trial = graph.copy()
    chosen = []
    for y in sorted(A1):
        target = a if _stays_bipartite(trial, [(y, a)]) else b
        trial.add_edge(y, target)
        chosen.append((y, target))
    return chosen


def _act_density(strategy: DensityStrategy, search: DensitySearch, state: ConstructionState) -> bool:
    for A0, A1 in search.candidates(state):
        if not _stays_bipartite(state.graph, [(v, -1) for v in A0]):
            continue
        if not search.biclique_big(A0, A1):
            continue
        a = state.fresh_vertex()
        b = state.fresh_vertex()
        base = state.graph.copy()
        base.add_edge(a, b)
        base.add_edges_from((v, a) for v in A0)
        first = _attachments(base, a, b, A1)
        mirrored = [(y, b if target == a else a) for y, target in first]
        for label, attachment in (("G1", first), ("G2", mirrored)):
            candidate = base.copy()
            candidate.add_edges_from(attachment)
            if not nx.is_bipartite(candidate):
                continue
            if not search.graph_big(candidate):
                continue
            state.add_edge(a, b, strategy.name)
            for v in sorted(A0):
                state.add_edge(v, a, strategy.name)
            for y, target in attachment:
                state.add_edge(y, target, strategy.name)
            strategy.committed = label
            strategy.A0, strategy.A1 = A0, A1
            strategy.restrained = state.component(a)
            strategy.detail = f"A0={sorted(A0)} A1={sorted(A1)} a={a} b={b} {label}"
            state.restrain(strategy.name, strategy.restrained)
            logger.info("stage %d: %s committed %s", state.stage, strategy.name, strategy.detail)
            return True
        raise EngineBug(f"{strategy.name}: neither completion of A0={sorted(A0)} A1={sorted(A1)} is "
                        f"{strategy.k}-big above {format_entries(strategy.sigma.entries)}")
    return False


def run_ground(strategies: List[Strategy], stages: int,
               search_bounds: Optional[GroundBounds] = None) -> Tuple[Graph, GroundReport]:
    bounds = search_bounds or GroundBounds()
    ranks = [strategy.rank for strategy in strategies]
    if len(set(ranks)) != len(ranks):
        raise PreconditionFailed(f"priority ranks must be distinct: {ranks}")
    roster = sorted(strategies, key=lambda strategy: strategy.rank)
    state = ConstructionState(stages, bounds.vertex_window)
    searches = {s.name: DensitySearch(s, bounds) for s in roster if isinstance(s, DensityStrategy)}
    bipartite: List[bool] = []

    for stage in range(stages):
        state.stage = stage
        for strategy in roster:
            if strategy.status != WAITING:
                continue
            if isinstance(strategy, DiagStrategy):
                acted = _act_diag(strategy, state)
            else:
                acted = _act_density(strategy, searches[strategy.name], state)
            if acted:
                strategy.status = SATISFIED
                strategy.acted_at = stage
                break
        bipartite.append(nx.is_bipartite(state.graph))

    for strategy in roster:
        if strategy.status == WAITING:
            strategy.status = VACUOUS
            logger.info("%s never acted within %d stages", strategy.name, stages)

    graph = state.snapshot()
    report = GroundReport(stages=stages, strategies=roster, log=list(state.log), bipartite_by_stage=bipartite,
                          vertex_budget=state.budget, fresh_used=state.fresh)
    for strategy in roster:
        if isinstance(strategy, DiagStrategy):
            report.diag_checks[strategy.name] = verify_diag_satisfied(graph, strategy.enumerator, stages - 1)
        elif strategy.status == SATISFIED:
            report.density_checks[strategy.name] = searches[strategy.name].graph_big(state.graph)
    return graph, report


def check_frozen_discipline(log: Iterable[EdgeDecision]) -> bool:
    return all(decision.stage <= max(decision.u, decision.v) for decision in log)


def verify_diag_satisfied(G: Graph, en: Enumerator, final_stage: int) -> bool:
    """
    Some pair of distinct vertices of the opponent's output is joined by an odd walk.

    A vertex on an odd cycle is an odd pair with itself, but such a singleton
    never satisfies R_e: the strategy only acts on distinct x, y.
    """
    output = sorted(en.at(final_stage) & G.vertices) if final_stage >= 0 else []
    pairs = {pair for pair in odd_pairs(G, output) if len(pair) == 2}
    return any(make_pair(x, y) in pairs for x, y in combinations(output, 2))
