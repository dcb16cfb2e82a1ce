"""
Requirement relations R(tau, F), pair sources and the sets K^{src} they define

A requirement is the set of strings tau for which some finite F drawn from
Odd(src) satisfies the relation. Relations are extension-closed in tau and
singleton-monotone in F. Each relation carries a support: finitely many
strings outside of which its evaluation only depends on length, which is what
lets the bigness engine search K^{src} without enumerating every child.
"""

import logging
import random
import threading
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from core.dnc import OracleFunctionalTable
from core.errors import OrderMismatch, PreconditionFailed, RelationRejected
from core.graphs import Graph, PairSet, make_pair, odd_pairs, odd_pairs_biclique, sorted_pairs
from core.strings import BoundedString, Entries, Order, format_entries, join_strings

logger = logging.getLogger(__name__)

Evaluator = Callable[[Entries, PairSet], bool]
Finder = Callable[[Entries, 'PairSource', int], Optional[PairSet]]

REGISTRATION_PROBES = 200


@dataclass(frozen=True)
class RequirementRelation:
    """A decidable relation R(tau, F) with its trace name

    The evaluator receives the entries of tau and a finite pair set.
    support=None means the relation may depend on every entry of tau.
    use_horizon, when known, is a length beyond which the relation only looks
    at the prefix of that length.
    """
    descriptor: str
    bound: Order
    evaluator: Evaluator = field(compare=False)
    support: Optional[FrozenSet[Entries]] = frozenset()
    use_horizon: Optional[int] = None
    finder: Optional[Finder] = field(default=None, compare=False)

    def evaluate(self, context: BoundedString, F: PairSet) -> bool:
        if context.bound != self.bound:
            raise OrderMismatch(f"{self.descriptor} is over {self.bound}, context over {context.bound}")
        return self.evaluator(context.entries, F)


@dataclass(frozen=True)
class ExplicitGraph:
    graph: Graph

    @cached_property
    def odd(self) -> PairSet:
        return odd_pairs(self.graph)

    def pairs(self) -> List[FrozenSet[int]]:
        return [frozenset(key) for key in sorted_pairs(self.odd)]

    def has_pair(self, pair: FrozenSet[int]) -> bool:
        return pair in self.odd

    def describe(self) -> str:
        return f"graph({len(self.graph.vertices)} vertices, {len(self.graph.edges)} edges)"


@dataclass(frozen=True)
class Biclique:
    A0: FrozenSet[int]
    A1: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, 'A0', frozenset(self.A0))
        object.__setattr__(self, 'A1', frozenset(self.A1))

    @cached_property
    def odd(self) -> PairSet:
        return odd_pairs_biclique(self.A0, self.A1)

    def pairs(self) -> List[FrozenSet[int]]:
        return [frozenset(key) for key in sorted_pairs(self.odd)]

    def has_pair(self, pair: FrozenSet[int]) -> bool:
        return pair in self.odd

    def describe(self) -> str:
        return f"biclique({sorted(self.A0)} x {sorted(self.A1)})"


@dataclass(frozen=True)
class TailSquare:
    """(x, +inf)^2 truncated to (x, U]^2, singletons included"""
    x: int
    universe_bound: int

    def __post_init__(self):
        if self.universe_bound <= self.x:
            raise PreconditionFailed(f"universe bound {self.universe_bound} must exceed {self.x}")

    def vertices(self) -> range:
        return range(self.x + 1, self.universe_bound + 1)

    def pairs(self) -> List[FrozenSet[int]]:
        span = list(self.vertices())
        return [make_pair(a, b) for i, a in enumerate(span) for b in span[i:]]

    def has_pair(self, pair: FrozenSet[int]) -> bool:
        return all(self.x < v <= self.universe_bound for v in pair)

    def describe(self) -> str:
        return f"tail({self.x}, U={self.universe_bound})"


PairSource = Union[ExplicitGraph, Biclique, TailSquare]


def find_witness(K: RequirementRelation, src: PairSource, tau: BoundedString, F_bound: int) -> Optional[PairSet]:
    """Least F within F_bound satisfying K at tau, None when there is none"""
    if tau.bound != K.bound:
        raise OrderMismatch(f"{K.descriptor} is over {K.bound}, tau over {tau.bound}")
    return _find_witness(K, src, tau.entries, F_bound)


def _find_witness(K: RequirementRelation, src: PairSource, entries: Entries, F_bound: int) -> Optional[PairSet]:
    if K.finder is not None:
        return K.finder(entries, src, F_bound)
    if K.evaluator(entries, frozenset()):
        return frozenset()
    pairs = src.pairs()
    for size in range(1, F_bound + 1):
        for chosen in combinations(pairs, size):
            F = frozenset(chosen)
            if K.evaluator(entries, F):
                return F
    return None


def member(K: RequirementRelation, src: PairSource, tau: BoundedString, F_bound: int) -> bool:
    return find_witness(K, src, tau, F_bound) is not None


def constant_relation(value: bool, bound: Order) -> RequirementRelation:
    """TRUE holds everywhere with F empty, FALSE nowhere"""
    return RequirementRelation(
        descriptor="TRUE" if value else "FALSE",
        bound=bound,
        evaluator=lambda entries, F: value,
        support=frozenset(),
        use_horizon=0,
    )


def w_requirement(m: int, table: OracleFunctionalTable) -> RequirementRelation:
    """W_m: F nonempty and the functional outputs 1 on every vertex of F"""

    def evaluator(entries: Entries, F: PairSet) -> bool:
        if not F:
            return False
        vertices = {v for pair in F for v in pair}
        return all(table.eval_entries(entries, x) == 1 for x in vertices)

    def finder(entries: Entries, src: PairSource, F_bound: int) -> Optional[PairSet]:
        if F_bound < 1:
            return None
        ones = [x for x in range(len(entries)) if table.eval_entries(entries, x) == 1]
        # one pair suffices: the relation is singleton-monotone
        for i, a in enumerate(ones):
            for b in ones[i:]:
                pair = make_pair(a, b)
                if src.has_pair(pair):
                    return frozenset([pair])
        return None

    uses = [max(len(prefix), x + 1) for (prefix, x) in table.entries]
    return RequirementRelation(
        descriptor=f"W{m}",
        bound=table.bound,
        evaluator=evaluator,
        support=table.support(),
        use_horizon=min(max(uses, default=0), table.bound.depth),
        finder=finder,
    )


class BushyTreeCatalogue:
    """
    Finite r-bushy trees above xi in the order (node count, sorted node list).

    The code of a tree is its position in this order. Only the first few codes
    are ever needed; among the first M trees with c nodes no child value
    reaches c + M, so generation only looks at values below that. Listings are
    built for a fixed capacity (depth + 1 codes, or more on request), so a code
    names the same tree whatever was asked before.
    """

    def __init__(self, xi: BoundedString, r: int):
        if r < 1:
            raise PreconditionFailed(f"bushiness r must be positive, got {r}")
        self.xi = xi
        self.r = r
        self.bound = xi.bound
        self._listings: Dict[int, List[Tuple[Entries, ...]]] = {}
        self._lock = threading.Lock()

    def _shapes(self, level: int, count: int, limit: int) -> List[Tuple[Tuple[int, tuple], ...]]:
        """Relative subtrees rooted at depth `level` with exactly `count` nodes"""
        if count == 1:
            return [()]
        if level >= self.bound.depth:
            return []
        width = min(self.bound.table[level], limit)
        shapes = []
        for branching in range(self.r, min(width, count - 1) + 1):
            for values in combinations(range(width), branching):
                for sizes in _compositions(count - 1, branching):
                    options = [self._shapes(level + 1, size, limit) for size in sizes]
                    if any(not option for option in options):
                        continue
                    for subshapes in product(*options):
                        shapes.append(tuple(zip(values, subshapes)))
        return shapes

    def _realize(self, root: Entries, shape) -> List[Entries]:
        nodes = [root]
        for value, subshape in shape:
            nodes.extend(self._realize(root + (value,), subshape))
        return nodes

    def _leaves(self, nodes: Sequence[Entries]) -> Tuple[Entries, ...]:
        parents = {node[:-1] for node in nodes if node}
        return tuple(sorted(node for node in nodes if node not in parents and len(node) >= len(self.xi.entries)))

    def _batch(self, count: int, capacity: int) -> List[Tuple[Entries, ...]]:
        """The first `capacity` trees with `count` nodes"""
        stem = self.xi.entries
        batch = []
        for shape in self._shapes(len(stem), count - len(stem), count + capacity):
            nodes = [stem[:n] for n in range(len(stem))] + self._realize(stem, shape)
            batch.append((sorted(nodes), nodes))
        batch.sort(key=lambda item: item[0])
        return [self._leaves(nodes) for _, nodes in batch[:capacity]]

    def _listing(self, capacity: int) -> List[Tuple[Entries, ...]]:
        stem = self.xi.entries
        max_count = sum(self.bound.table[len(stem):]) * self.bound.depth + len(stem) + 1
        trees: List[Tuple[Entries, ...]] = []
        for count in range(len(stem) + 1, max_count + 1):
            if len(trees) >= capacity:
                break
            batch = self._batch(count, capacity)
            trees.extend(batch)
            logger.debug("tree catalogue above %s: %d trees with %d nodes",
                         format_entries(stem), len(batch), count)
        return trees[:capacity]

    def leaves_upto(self, code: int) -> List[Tuple[Entries, ...]]:
        """Leaf lists of the trees with codes 0..code"""
        needed = code + 1
        capacity = max(self.bound.depth + 1, needed)
        with self._lock:
            listing = self._listings.get(capacity)
            if listing is None:
                listing = self._listing(capacity)
                self._listings[capacity] = listing
        return listing[:needed]


def _compositions(total: int, parts: int) -> Iterable[Tuple[int, ...]]:
    """Ordered ways of writing total as parts positive summands"""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def propagation_requirement(K: RequirementRelation, xi: BoundedString, r: int, src: PairSource,
                            F_bound: int) -> RequirementRelation:
    """T_{K,xi,r}: some r-bushy tree above xi with code at most |tau| has every leaf in K at leaf joined with tau"""
    lower = xi.bound
    if K.bound != lower.interleaved():
        raise OrderMismatch(f"{K.descriptor} must be over {lower.interleaved()} to propagate from {lower}")
    catalogue = BushyTreeCatalogue(xi, r)
    leaf_cache: Dict[Tuple[Entries, Entries], bool] = {}

    def leaf_holds(entries: Entries, leaf: Entries) -> bool:
        key = (entries, leaf)
        cached = leaf_cache.get(key)
        if cached is None:
            joined = join_strings(BoundedString(lower, entries), BoundedString(lower, leaf))
            cached = _find_witness(K, src, joined.entries, F_bound) is not None
            leaf_cache[key] = cached
        return cached

    def evaluator(entries: Entries, F: PairSet) -> bool:
        for leaves in catalogue.leaves_upto(len(entries)):
            if all(leaf_holds(entries, leaf) for leaf in leaves):
                return True
        return False

    support = None if K.support is None else frozenset(body[0::2] for body in K.support)
    return RequirementRelation(
        descriptor=f"T[{K.descriptor},{format_entries(xi.entries)},{r}]",
        bound=lower,
        evaluator=evaluator,
        support=support,
        use_horizon=None,
    )


def _random_entries(rng: random.Random, bound: Order, length: int) -> Entries:
    return tuple(rng.randrange(bound.table[i]) for i in range(length))


def register_relation(descriptor: str, bound: Order, evaluator: Evaluator,
                      support: Optional[FrozenSet[Entries]] = None, probes: int = REGISTRATION_PROBES,
                      seed: int = 0, vertex_range: int = 8) -> RequirementRelation:
    """Accept a user relation after randomized extension and singleton probes"""
    rng = random.Random(seed)
    for probe in range(probes):
        length = rng.randint(0, bound.depth - 1)
        entries = _random_entries(rng, bound, length)
        pairs = [make_pair(rng.randrange(vertex_range), rng.randrange(vertex_range))
                 for _ in range(rng.randint(1, 3))]
        F = frozenset(pairs)
        if not evaluator(entries, F):
            continue
        longer = entries + tuple(rng.randrange(bound.table[i])
                                 for i in range(length, rng.randint(length + 1, bound.depth)))
        if not evaluator(longer, F):
            raise RelationRejected(
                f"{descriptor}: holds at {format_entries(entries)} but not at extension {format_entries(longer)}")
        vertices = sorted({v for pair in F for v in pair})
        singles = frozenset(make_pair(v, v) for v in rng.sample(vertices, rng.randint(1, len(vertices))))
        if not evaluator(entries, singles):
            raise RelationRejected(
                f"{descriptor}: holds at {format_entries(entries)} with {sorted_pairs(F)} "
                f"but not with singletons {sorted_pairs(singles)}")
    logger.info("registered relation %s after %d probes", descriptor, probes)
    return RequirementRelation(descriptor=descriptor, bound=bound, evaluator=evaluator, support=support)


class RequirementSet:
    """K^{src} as a string view for the bigness engine"""

    def __init__(self, K: RequirementRelation, src: PairSource, F_bound: int):
        self.K = K
        self.src = src
        self.F_bound = F_bound
        self.bound = K.bound
        self._members: Dict[Entries, bool] = {}
        self._index: Optional[Dict[Entries, FrozenSet[int]]] = None
        if K.support is not None:
            index: Dict[Entries, set] = {}
            for body in K.support:
                for n in range(len(body)):
                    index.setdefault(body[:n], set()).add(body[n])
            self._index = {key: frozenset(values) for key, values in index.items()}

    def contains(self, entries: Entries) -> bool:
        cached = self._members.get(entries)
        if cached is None:
            cached = _find_witness(self.K, self.src, entries, self.F_bound) is not None
            self._members[entries] = cached
        return cached

    def witness(self, entries: Entries) -> Optional[PairSet]:
        return _find_witness(self.K, self.src, entries, self.F_bound)

    def branch_values(self, entries: Entries) -> FrozenSet[int]:
        if self._index is None:
            return frozenset(range(self.bound.table[len(entries)]))
        return self._index.get(entries, frozenset())

    def search_horizon(self, stem_length: int, depth: int) -> int:
        horizon = min(depth, self.bound.depth)
        if self.K.use_horizon is not None:
            horizon = min(horizon, self.K.use_horizon)
        return max(stem_length, horizon)

    def describe(self) -> str:
        return f"{self.K.descriptor}^{self.src.describe()}"


class RequirementRegistry:
    """Named relations declared by a manifest, in declaration order"""

    def __init__(self):
        self._relations: Dict[str, RequirementRelation] = {}

    def add(self, name: str, relation: RequirementRelation):
        if name in self._relations:
            raise PreconditionFailed(f"requirement {name} declared twice")
        self._relations[name] = relation

    def get(self, name: str) -> RequirementRelation:
        if name not in self._relations:
            raise PreconditionFailed(f"unknown requirement {name}")
        return self._relations[name]

    def names(self) -> List[str]:
        return list(self._relations)

    def __len__(self) -> int:
        return len(self._relations)
