"""
Conditions (stem, bad, k) and the settling of requirements

A condition forbids every extension of its stem that lies in the bad set. The
bad set is upward-closed, k-closed and k-small above the stem, so some child of
the stem always survives. Settling a requirement either moves the stem into
the requirement (clause 1) or absorbs the requirement's tail instances into the
bad set (clause 2). Every quantifier is bounded by SearchBounds and tails are
cut at the universe bound U, which every clause 2 certificate records.
"""

import logging
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from core.bigness import StringSet, decide_big, find_uncovered, k_closure, materialize, search_for
from core.config import SearchBounds
from core.dnc import MachineTable, OracleFunctionalTable, b_dnc
from core.errors import DepthExceeded, EngineBug, InvalidCondition, InvalidK, OrderMismatch
from core.graphs import Graph
from core.requirements import (Biclique, ExplicitGraph, RequirementRelation, RequirementSet, TailSquare,
                               member)
from core.strings import BoundedString, Order, format_entries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Condition:
    """Forcing condition with its tracked smallness parameter"""
    stem: BoundedString
    bad: StringSet
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InvalidK(f"tracked k must be positive, got {self.k}")
        if self.bad.bound != self.stem.bound:
            raise OrderMismatch(f"{self.bad.bound} vs {self.stem.bound}")
        if not self.bad.upward_closed:
            raise InvalidCondition("the bad set of a condition must be upward-closed")
        order = self.stem.bound
        if len(self.stem) < order.depth and self.k > order.table[len(self.stem)]:
            raise InvalidCondition(f"k={self.k} exceeds h({len(self.stem)})={order.table[len(self.stem)]}")
        if k_closure(self.bad, self.k, order.depth) != self.bad:
            raise InvalidCondition(f"bad set is not {self.k}-closed")
        if decide_big(self.bad, self.k, self.stem, order.depth):
            raise InvalidCondition(f"bad set is {self.k}-big above {format_entries(self.stem.entries)}")

    @property
    def bound(self) -> Order:
        return self.stem.bound

    def safe_children(self) -> List[int]:
        """Child values of the stem outside the bad set"""
        entries = self.stem.entries
        return [v for v in range(self.bound.h(len(entries))) if not self.bad.contains(entries + (v,))]


def _checked(stem: BoundedString, bad: StringSet, k: int) -> Condition:
    try:
        return Condition(stem, bad, k)
    except InvalidCondition as e:
        raise EngineBug(f"engine produced an invalid condition: {e}")


def initial_condition(t: MachineTable, h: Order) -> Condition:
    return Condition(BoundedString.empty(h), k_closure(b_dnc(t, h), 2, h.depth), 2)


def extends(c2: Condition, c1: Condition) -> bool:
    """c2 <= c1: longer stem and larger bad set"""
    if c1.bound != c2.bound:
        raise OrderMismatch(f"{c1.bound} vs {c2.bound}")
    return c1.stem.is_prefix_of(c2.stem) and c1.bad.issubset(c2.bad)


def is_roomy(c: Condition, k: int) -> bool:
    width = c.bound.h(len(c.stem))
    return width >= 4 * k and not decide_big(c.bad, k, c.stem, c.bound.depth)


def extend_stem(c: Condition) -> Condition:
    """Same condition with the stem extended by its least safe child"""
    if len(c.stem) >= c.bound.depth:
        raise DepthExceeded(f"stem of length {len(c.stem)} cannot grow past depth {c.bound.depth}")
    safe = c.safe_children()
    if not safe:
        raise EngineBug(f"every child of {format_entries(c.stem.entries)} is bad")
    return _checked(c.stem.extend(safe[0]), c.bad, c.k)


class EssentialVerdict:
    """Bounded answer of the essentialness scan"""


@dataclass(frozen=True)
class Essential(EssentialVerdict):
    witnesses: Tuple[Tuple[int, Tuple[int, ...], Tuple[int, ...]], ...]
    bounds: str


@dataclass(frozen=True)
class NotEssential(EssentialVerdict):
    x: int
    bounds: str


def _maximal_subsets(low: int, high: int, size: int) -> Iterable[Tuple[int, ...]]:
    """Subsets of (low, high] of the largest allowed size"""
    span = list(range(low + 1, high + 1))
    return combinations(span, min(size, len(span)))


def is_essential(K: RequirementRelation, c: Condition, bounds: SearchBounds) -> EssentialVerdict:
    """
    For every x <= x_max some A0 > x has, against y = y_max, an A1 > y with
    K over A0 x A1 2k-big above the stem.

    Requirement sets only grow with A0, A1 and shrink with y, so maximal A0 and
    A1 and the single y = y_max decide every bounded quantifier.
    """
    horizon = min(c.bound.depth, len(c.stem) + bounds.depth)
    cache = {}

    def big(A0: Tuple[int, ...], A1: Tuple[int, ...]) -> bool:
        key = (A0, A1)
        if key not in cache:
            view = RequirementSet(K, Biclique(frozenset(A0), frozenset(A1)), bounds.f_bound)
            cache[key] = decide_big(view, 2 * c.k, c.stem, horizon)
        return cache[key]

    witnesses = []
    for x in range(bounds.x_max + 1):
        found = None
        for A0 in _maximal_subsets(x, bounds.universe, bounds.a_size):
            for A1 in _maximal_subsets(bounds.y_max, bounds.universe, bounds.a_size):
                if A0 and A1 and big(A0, A1):
                    found = (x, A0, A1)
                    break
            if found:
                break
        if found is None:
            logger.debug("%s not essential at x=%d (%d biclique tests)", K.descriptor, x, len(cache))
            return NotEssential(x=x, bounds=bounds.render())
        witnesses.append(found)
    return Essential(witnesses=tuple(witnesses), bounds=bounds.render())


class SettleOutcome:
    """How a requirement was settled"""


@dataclass(frozen=True)
class Clause1(SettleOutcome):
    tau: BoundedString


@dataclass(frozen=True)
class Clause2(SettleOutcome):
    """K over (x, U]^2 lies in the bad set inside the stem's cone up to horizon"""
    x: int
    added: StringSet
    horizon: int
    universe: int
    path_equality: Optional[bool] = None


@dataclass(frozen=True)
class BoundExhausted(SettleOutcome):
    report: str


def _normalize(c: Condition) -> Union[Condition, BoundExhausted]:
    """Extend the stem by least safe children until h(|stem|) >= 4k"""
    while True:
        if len(c.stem) >= c.bound.depth:
            return BoundExhausted(f"order cannot absorb 4k={4 * c.k} before depth {c.bound.depth}")
        if c.bound.table[len(c.stem)] >= 4 * c.k:
            return c
        c = extend_stem(c)


def _support_vertices(view: RequirementSet, leaves: Iterable[Tuple[int, ...]]) -> List[int]:
    vertices = set()
    for leaf in leaves:
        F = view.witness(leaf)
        if F is None:
            raise EngineBug(f"witness leaf {format_entries(leaf)} is not in {view.describe()}")
        vertices.update(v for pair in F for v in pair)
    return sorted(vertices)


def _path_equality(first: RequirementSet, second: RequirementSet, stem: Tuple[int, ...], horizon: int) -> bool:
    """Spot check of two requirement sets along the least and the last path above stem"""
    order = first.bound
    for pick_last in (False, True):
        rho = stem
        while True:
            if first.contains(rho) != second.contains(rho):
                return False
            if len(rho) >= horizon:
                break
            width = order.table[len(rho)]
            rho = rho + ((width - 1) if pick_last else 0,)
    return True


def settle(K: RequirementRelation, c: Condition, G: Graph,
           bounds: SearchBounds) -> Tuple[Condition, SettleOutcome]:
    if K.bound != c.bound:
        raise OrderMismatch(f"{K.descriptor} is over {K.bound}, condition over {c.bound}")
    normalized = _normalize(c)
    if isinstance(normalized, BoundExhausted):
        return c, normalized
    c = normalized
    sigma, bad, k = c.stem, c.bad, c.k
    order = c.bound
    horizon = min(order.depth, len(sigma) + bounds.depth)
    U = bounds.universe

    graph_search = search_for(RequirementSet(K, ExplicitGraph(G), bounds.f_bound), k, sigma, horizon)
    if graph_search.mark(sigma.entries):
        for leaf in graph_search.leaves(sigma.entries):
            if not bad.contains(leaf):
                tau = BoundedString(order, leaf)
                logger.info("%s settled by clause 1 at %s", K.descriptor, format_entries(leaf))
                return _checked(tau, bad, k), Clause1(tau)
        raise EngineBug(f"every witness leaf of {K.descriptor} above {format_entries(sigma.entries)} is bad")

    verdict = is_essential(K, c, bounds)
    if isinstance(verdict, Essential):
        return c, BoundExhausted(f"{K.descriptor} is essential within {verdict.bounds} "
                                 f"but {k}-small over the graph above {format_entries(sigma.entries)}")
    x = verdict.x

    tail = RequirementSet(K, TailSquare(x, U), bounds.f_bound)
    tail_search = search_for(tail, 3 * k, sigma, horizon)
    if not tail_search.mark(sigma.entries):
        added = materialize(tail, sigma.entries, horizon, bounds.member_budget)
        if added is None:
            return c, BoundExhausted(f"tail of {K.descriptor} above x={x} exceeds {bounds.member_budget} members")
        new_bad = k_closure(bad.union(added), 4 * k, order.depth)
        logger.info("%s settled by clause 2 at x=%d, %d strings added", K.descriptor, x, len(added))
        return _checked(sigma, new_bad, 4 * k), Clause2(x=x, added=added, horizon=horizon, universe=U)

    # the tail is 3k-big: its witness names finitely many vertices A0 > x
    A0 = frozenset(_support_vertices(tail, tail_search.leaves(sigma.entries)))
    if not A0:
        return c, BoundExhausted(f"tail witness of {K.descriptor} above x={x} uses no vertices")
    biclique = None
    for y in range(max(A0) + 1, U):
        view = RequirementSet(K, Biclique(A0, frozenset(range(y + 1, U + 1))), bounds.f_bound)
        if not decide_big(view, 2 * k, sigma, horizon):
            biclique = view
            break
    else:
        return c, BoundExhausted(f"no y below U={U} makes {K.descriptor} over A0={sorted(A0)} x (y, U] "
                                 f"{2 * k}-small")
    absorbed = materialize(biclique, sigma.entries, horizon, bounds.member_budget)
    if absorbed is None:
        return c, BoundExhausted(f"biclique set over A0={sorted(A0)} exceeds {bounds.member_budget} members")
    B1 = bad.union(absorbed)

    square = search_for(RequirementSet(K, Biclique(A0, A0), bounds.f_bound), 3 * k, sigma, horizon)
    if not square.mark(sigma.entries):
        raise EngineBug(f"{K.descriptor} over A0={sorted(A0)} squared is {3 * k}-small although the tail was big")
    tau = None
    for leaf in square.leaves(sigma.entries):
        candidate = BoundedString(order, leaf)
        if not decide_big(B1, 3 * k, candidate, order.depth):
            tau = candidate
            break
    if tau is None:
        raise EngineBug(f"B1 is {3 * k}-big above every leaf of the A0 squared witness")

    tail_y = RequirementSet(K, TailSquare(y, U), bounds.f_bound)
    added = materialize(tail_y, tau.entries, horizon, bounds.member_budget)
    if added is None:
        return c, BoundExhausted(f"tail of {K.descriptor} above y={y} exceeds {bounds.member_budget} members")
    union = B1.union(added)
    if decide_big(union, 3 * k, tau, order.depth):
        return c, BoundExhausted(f"tail above y={y} is not absorbed by the biclique set above "
                                 f"{format_entries(tau.entries)}")
    equality = _path_equality(biclique, tail_y, tau.entries, horizon)
    new_bad = k_closure(union, 3 * k, order.depth)
    logger.info("%s settled by clause 2 at y=%d via A0=%s, stem moved to %s",
                K.descriptor, y, sorted(A0), format_entries(tau.entries))
    return _checked(tau, new_bad, 3 * k), Clause2(x=y, added=added, horizon=horizon, universe=U,
                                                  path_equality=equality)


def verify_settled(K: RequirementRelation, src_G: Graph, c: Condition, out: SettleOutcome,
                   bounds: SearchBounds) -> bool:
    if isinstance(out, Clause1):
        return member(K, ExplicitGraph(src_G), out.tau, bounds.f_bound) and out.tau.is_prefix_of(c.stem)
    if isinstance(out, Clause2):
        tail = RequirementSet(K, TailSquare(out.x, out.universe), bounds.f_bound)
        return find_uncovered(tail, c.bad, c.stem.entries, out.horizon) is None
    return False


def extend_condition(c: Condition, rng: random.Random, max_steps: int = 2, extra_strings: int = 2) -> Condition:
    """A random extension: a few safe children more and a few more bad strings when they fit"""
    for _ in range(rng.randint(0, max_steps)):
        if len(c.stem) >= c.bound.depth:
            break
        safe = c.safe_children()
        c = _checked(c.stem.extend(rng.choice(safe)), c.bad, c.k)
    if len(c.stem) >= c.bound.depth:
        return c
    order = c.bound
    strings = []
    for _ in range(extra_strings):
        length = rng.randint(len(c.stem) + 1, order.depth)
        body = c.stem.entries + tuple(rng.randrange(order.table[i]) for i in range(len(c.stem), length))
        strings.append(body)
    grown = k_closure(c.bad.union(StringSet(order, frozenset(strings), True)), c.k, order.depth)
    try:
        return Condition(c.stem, grown, c.k)
    except InvalidCondition:
        return c


def scan_settled_functional(table: OracleFunctionalTable, f: BoundedString, out: Clause2) -> List[Tuple[int, int]]:
    """(prefix length, input) pairs where the functional outputs 1 in (x, U] within the certificate's horizon"""
    hits = []
    for length in range(min(len(f), out.horizon) + 1):
        prefix = f.entries[:length]
        for x in table.outputs_one_above(prefix, out.x):
            if x <= out.universe:
                hits.append((length, x))
    return hits


@dataclass
class GenericStep:
    step: int
    stem: BoundedString
    k: int
    requirement: Optional[str] = None
    outcome: Optional[SettleOutcome] = None


@dataclass
class GenericTrace:
    """Conditions and outcomes of one generic run, step by step"""
    initial: Condition
    steps: List[GenericStep] = field(default_factory=list)
    final: Optional[Condition] = None

    def outcomes(self) -> List[Tuple[str, SettleOutcome]]:
        return [(step.requirement, step.outcome) for step in self.steps if step.outcome is not None]


def build_generic(t: MachineTable, reqs: Sequence[RequirementRelation], G: Graph, steps: int,
                  bounds: SearchBounds, h: Optional[Order] = None) -> Tuple[BoundedString, GenericTrace]:
    """Alternate one-child extensions with settling the next requirement"""
    if h is None:
        if not reqs:
            raise OrderMismatch("an order is needed when no requirement names one")
        h = reqs[0].bound
    c = initial_condition(t, h)
    trace = GenericTrace(initial=c)
    for step in range(steps):
        c = extend_stem(c)
        record = GenericStep(step=step, stem=c.stem, k=c.k)
        if step < len(reqs):
            K = reqs[step]
            c, outcome = settle(K, c, G, bounds)
            record.requirement = K.descriptor
            record.outcome = outcome
            record.stem, record.k = c.stem, c.k
            if isinstance(outcome, BoundExhausted):
                logger.warning("step %d: %s not settled: %s", step, K.descriptor, outcome.report)
        trace.steps.append(record)
    trace.final = c
    return c.stem, trace


def scan_trace(trace: GenericTrace, f: BoundedString,
               tables: Mapping[str, OracleFunctionalTable]) -> Dict[int, List[Tuple[int, int]]]:
    """Scan hits of every Clause2 step whose requirement has a known functional"""
    scans = {}
    for step in trace.steps:
        if isinstance(step.outcome, Clause2) and step.requirement in tables:
            scans[step.step] = scan_settled_functional(tables[step.requirement], f, step.outcome)
    return scans
