"""
Decision engine for k-bigness and k-smallness of string sets above a stem

A set is k-big above s when some finite tree with stem s, in which every
non-leaf node extending s has at least k children, has all its leaves in the
set. The engine decides this by backward marking:

    mark(p) = p in B  or  (|p| < horizon and at least k children of p are marked)

Sets are consulted through the StringView protocol. Besides membership a view
reports, for every node p, the finitely many child values that can behave
differently; all other children of p are interchangeable, so the engine marks
one representative and counts it for all of them.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Protocol, Sequence, Set, Tuple

from core.errors import AdditivityViolation, EngineBug, InvalidK, OrderMismatch, PreconditionFailed
from core.strings import BoundedString, Entries, FiniteTree, Order, format_entries

logger = logging.getLogger(__name__)


class StringView(Protocol):
    """Anything the engine can search: explicit sets, requirement sets, unions"""
    bound: Order

    def contains(self, entries: Entries) -> bool: ...

    def branch_values(self, entries: Entries) -> FrozenSet[int]: ...

    def search_horizon(self, stem_length: int, depth: int) -> int: ...


def _minimal(bodies: Iterable[Entries]) -> FrozenSet[Entries]:
    """Antichain of minimal elements under the prefix order"""
    ordered = sorted(set(bodies), key=len)
    kept: Set[Entries] = set()
    for body in ordered:
        if not any(body[:n] in kept for n in range(len(body) + 1)):
            kept.add(body)
    return frozenset(kept)


@dataclass(frozen=True)
class StringSet:
    """Finite description of a set of strings over an order

    upward_closed sets are the upward closure of the antichain `members`
    together with finitely many isolated `points` (closures of upward-closed
    sets need them: a prefix node can be forced without its extensions).
    Other sets are exactly `members`.
    """
    bound: Order
    members: FrozenSet[Entries] = frozenset()
    upward_closed: bool = True
    points: FrozenSet[Entries] = frozenset()

    def __post_init__(self):
        members = frozenset(tuple(body) for body in self.members)
        points = frozenset(tuple(body) for body in self.points)
        for body in members | points:
            BoundedString(self.bound, body)
        if self.upward_closed:
            members = _minimal(members)
            points = frozenset(p for p in points
                               if not any(p[:n] in members for n in range(len(p) + 1)))
        else:
            members = members | points
            points = frozenset()
        object.__setattr__(self, 'members', members)
        object.__setattr__(self, 'points', points)

        index: Dict[Entries, Set[int]] = {}
        for body in members | points:
            for n in range(len(body)):
                index.setdefault(body[:n], set()).add(body[n])
        object.__setattr__(self, '_index', {key: frozenset(values) for key, values in index.items()})
        object.__setattr__(self, '_longest', max((len(body) for body in members | points), default=0))

    @classmethod
    def of(cls, bound: Order, bodies: Iterable[Sequence[int]], upward_closed: bool = True,
           points: Iterable[Sequence[int]] = ()) -> 'StringSet':
        return cls(bound, frozenset(tuple(b) for b in bodies), upward_closed,
                   frozenset(tuple(p) for p in points))

    @classmethod
    def empty(cls, bound: Order, upward_closed: bool = True) -> 'StringSet':
        return cls(bound, frozenset(), upward_closed)

    @property
    def longest(self) -> int:
        return self._longest

    def covers(self, entries: Entries) -> bool:
        """Membership through the upward-closed part only"""
        if not self.upward_closed:
            return False
        return any(entries[:n] in self.members for n in range(len(entries) + 1))

    def contains(self, entries: Entries) -> bool:
        if self.upward_closed:
            return entries in self.points or self.covers(entries)
        return entries in self.members

    def __contains__(self, string: BoundedString) -> bool:
        if string.bound != self.bound:
            raise OrderMismatch(f"{string.bound} vs {self.bound}")
        return self.contains(string.entries)

    def branch_values(self, entries: Entries) -> FrozenSet[int]:
        return self._index.get(entries, frozenset())

    def search_horizon(self, stem_length: int, depth: int) -> int:
        # marks below the longest stored string equal membership for upward-closed sets
        if self.upward_closed:
            return max(stem_length, self._longest)
        return max(stem_length, min(depth, self.bound.depth))

    def is_empty(self) -> bool:
        return not self.members and not self.points

    def __len__(self) -> int:
        return len(self.members) + len(self.points)

    def strings(self) -> List[BoundedString]:
        return [BoundedString(self.bound, body) for body in sorted(self.members)]

    def point_strings(self) -> List[BoundedString]:
        return [BoundedString(self.bound, body) for body in sorted(self.points)]

    def union(self, other: 'StringSet') -> 'StringSet':
        if other.bound != self.bound:
            raise OrderMismatch(f"{self.bound} vs {other.bound}")
        if self.upward_closed and other.upward_closed:
            return StringSet(self.bound, self.members | other.members, True, self.points | other.points)
        if not self.upward_closed and not other.upward_closed:
            return StringSet(self.bound, self.members | other.members, False)
        upward, finite = (self, other) if self.upward_closed else (other, self)
        return StringSet(self.bound, upward.members, True, upward.points | finite.members)

    def issubset(self, other: 'StringSet') -> bool:
        if other.bound != self.bound:
            raise OrderMismatch(f"{self.bound} vs {other.bound}")
        if self.upward_closed:
            if any(not other.covers(body) for body in self.members):
                return False
            return all(other.contains(body) for body in self.points)
        return all(other.contains(body) for body in self.members)

    def __str__(self) -> str:
        kind = "upward" if self.upward_closed else "finite"
        return f"StringSet({kind}, {len(self.members)} members, {len(self.points)} points)"


class UnionView:
    """Lazy union of several views over the same order"""

    def __init__(self, parts: Sequence[StringView]):
        if not parts:
            raise ValueError("a union view needs at least one part")
        self.parts = list(parts)
        self.bound = parts[0].bound
        for part in self.parts:
            if part.bound != self.bound:
                raise OrderMismatch(f"{part.bound} vs {self.bound}")

    def contains(self, entries: Entries) -> bool:
        return any(part.contains(entries) for part in self.parts)

    def branch_values(self, entries: Entries) -> FrozenSet[int]:
        values: FrozenSet[int] = frozenset()
        for part in self.parts:
            values = values | part.branch_values(entries)
        return values

    def search_horizon(self, stem_length: int, depth: int) -> int:
        return max(part.search_horizon(stem_length, depth) for part in self.parts)


@dataclass(frozen=True)
class BushyWitness:
    """A finite k-bushy tree above its stem whose leaves lie in target"""
    tree: FiniteTree
    k: int
    target: StringView = field(compare=False)

    def validate(self) -> bool:
        stem = self.tree.stem
        leaves = set(self.tree.leaves())
        for node in self.tree.nodes:
            if node in leaves:
                if not self.target.contains(node.entries):
                    return False
            elif stem.is_prefix_of(node) and len(self.tree.children_of(node)) < self.k:
                return False
        return True


class BigVerdict:
    """Outcome of a bigness decision"""
    is_big = False


@dataclass(frozen=True)
class Big(BigVerdict):
    witness: BushyWitness
    is_big = True


@dataclass(frozen=True)
class Small(BigVerdict):
    searched_depth: int
    is_big = False


class BushySearch:
    """Memoized marking of one view for one k and one horizon"""

    def __init__(self, view: StringView, k: int, horizon: int):
        if k <= 0:
            raise InvalidK(f"k must be positive, got {k}")
        view.bound.check_depth(horizon)
        self.view = view
        self.k = k
        self.horizon = horizon
        self.bound = view.bound
        self._marks: Dict[Entries, bool] = {}

    def _relevant(self, rho: Entries) -> Tuple[List[int], int]:
        width = self.bound.table[len(rho)]
        relevant = sorted(v for v in self.view.branch_values(rho) if v < width)
        return relevant, width

    @staticmethod
    def _representative(relevant: Sequence[int], width: int) -> Optional[int]:
        taken = set(relevant)
        for value in range(width):
            if value not in taken:
                return value
        return None

    def mark(self, rho: Entries) -> bool:
        cached = self._marks.get(rho)
        if cached is not None:
            return cached
        if self.view.contains(rho):
            result = True
        elif len(rho) >= self.horizon:
            result = False
        else:
            relevant, width = self._relevant(rho)
            count = 0
            for value in relevant:
                if self.mark(rho + (value,)):
                    count += 1
                    if count >= self.k:
                        break
            if count < self.k and len(relevant) < width:
                generic = self._representative(relevant, width)
                if self.mark(rho + (generic,)):
                    count += width - len(relevant)
            result = count >= self.k
        self._marks[rho] = result
        return result

    def marked_children(self, rho: Entries, limit: Optional[int] = None) -> List[int]:
        """Least marked child values of rho, at most `limit` of them"""
        relevant, width = self._relevant(rho)
        taken = set(relevant)
        generic_mark = None
        chosen: List[int] = []
        for value in range(width):
            if value in taken:
                marked = self.mark(rho + (value,))
            else:
                if generic_mark is None:
                    generic_mark = self.mark(rho + (value,))
                marked = generic_mark
            if marked:
                chosen.append(value)
                if limit is not None and len(chosen) >= limit:
                    break
        return chosen

    def leaves(self, stem: Entries) -> Iterator[Entries]:
        """Leaves of the lexicographically least witness, in order"""
        if not self.mark(stem):
            return
        stack = [stem]
        while stack:
            rho = stack.pop()
            if self.view.contains(rho):
                yield rho
                continue
            picked = self.marked_children(rho, self.k)
            if len(picked) < self.k:
                raise EngineBug(f"marked node {format_entries(rho)} has only {len(picked)} marked children")
            for value in reversed(picked):
                stack.append(rho + (value,))

    def witness_nodes(self, stem: Entries) -> Set[Entries]:
        nodes: Set[Entries] = {stem[:n] for n in range(len(stem) + 1)}
        for leaf in self.leaves(stem):
            for n in range(len(stem), len(leaf) + 1):
                nodes.add(leaf[:n])
        return nodes

    @property
    def memo_size(self) -> int:
        return len(self._marks)


def _check_operands(view: StringView, k: int, s: BoundedString, depth: int):
    if k <= 0:
        raise InvalidK(f"k must be positive, got {k}")
    if s.bound != view.bound:
        raise OrderMismatch(f"{s.bound} vs {view.bound}")
    view.bound.check_depth(depth)


def search_for(view: StringView, k: int, s: BoundedString, depth: int) -> BushySearch:
    """Engine instance with the horizon the view asks for"""
    _check_operands(view, k, s, depth)
    horizon = min(view.search_horizon(len(s), depth), view.bound.depth)
    logger.debug("bushy search k=%d stem=%s horizon=%d", k, format_entries(s.entries), horizon)
    return BushySearch(view, k, horizon)


def decide_big(view: StringView, k: int, s: BoundedString, depth: int) -> bool:
    """Bigness decision without building the witness tree"""
    return search_for(view, k, s, depth).mark(s.entries)


def is_k_big(B: StringView, k: int, s: BoundedString, depth: int) -> BigVerdict:
    search = search_for(B, k, s, depth)
    if not search.mark(s.entries):
        return Small(searched_depth=search.horizon)
    nodes = search.witness_nodes(s.entries)
    tree = FiniteTree.from_entries(B.bound, nodes, s.entries)
    return Big(BushyWitness(tree, k, B))


def least_small_k(B: StringView, s: BoundedString, depth: int) -> Optional[int]:
    """Least k for which B is k-small above s, None if s itself is in B"""
    if B.contains(s.entries):
        return None
    k = 1
    while decide_big(B, k, s, depth):
        k += 1
    return k


def k_closure(B: StringSet, k: int, depth: int) -> StringSet:
    """All strings above which B is k-big, as a set of the same kind"""
    if k <= 0:
        raise InvalidK(f"k must be positive, got {k}")
    B.bound.check_depth(depth)
    horizon = min(B.search_horizon(0, depth), B.bound.depth)
    search = BushySearch(B, k, horizon)

    # only prefixes of stored strings can be marked without already being in B
    trie_nodes: Set[Entries] = set()
    for body in B.members | B.points:
        for n in range(min(len(body), horizon) + 1):
            trie_nodes.add(body[:n])
    marked = {node for node in trie_nodes if not B.contains(node) and search.mark(node)}
    logger.debug("closure k=%d added %d nodes (memo %d)", k, len(marked), search.memo_size)
    if B.upward_closed:
        return StringSet(B.bound, B.members, True, B.points | marked)
    return StringSet(B.bound, B.members | marked, False)


def union_small(parts: Sequence[Tuple[StringSet, int]], s: BoundedString, depth: int) -> Tuple[StringSet, int]:
    """Union of k_i-small sets, checked (sum k_i)-small above s"""
    if not parts:
        raise PreconditionFailed("union_small needs at least one part")
    bound = parts[0][0].bound
    total = 0
    union = StringSet.empty(bound)
    for part, k in parts:
        if decide_big(part, k, s, depth):
            raise PreconditionFailed(f"part {part} is {k}-big above {format_entries(s.entries)}")
        total += k
        union = union.union(part)
    if decide_big(union, total, s, depth):
        raise AdditivityViolation(
            f"union of {len(parts)} small parts is {total}-big above {format_entries(s.entries)}")
    return union, total


def verify_concatenation(A: StringSet, family: Mapping[BoundedString, StringSet], k: int,
                         s: BoundedString, depth: int) -> bool:
    """Union of the per-leaf sets over A's witness must be k-big above s"""
    search = search_for(A, k, s, depth)
    if not search.mark(s.entries):
        raise PreconditionFailed(f"A is {k}-small above {format_entries(s.entries)}")
    parts: List[StringSet] = []
    for leaf in search.leaves(s.entries):
        leaf_string = BoundedString(A.bound, leaf)
        if leaf_string not in family:
            raise PreconditionFailed(f"no set given for witness leaf {format_entries(leaf)}")
        part = family[leaf_string]
        if not decide_big(part, k, leaf_string, depth):
            raise PreconditionFailed(f"set for leaf {format_entries(leaf)} is {k}-small above it")
        parts.append(part)
    if not parts:
        return False
    return decide_big(UnionView(parts), k, s, depth)


def witness_leaves(view: StringView, k: int, s: BoundedString, depth: int) -> List[BoundedString]:
    """Leaves of the least witness, empty when the view is k-small above s"""
    search = search_for(view, k, s, depth)
    return [BoundedString(view.bound, leaf) for leaf in search.leaves(s.entries)]


class _Overflow(Exception):
    pass


def materialize(view: StringView, stem: Entries, horizon: int, budget: int) -> Optional[StringSet]:
    """Minimal members of the view extending stem, up to horizon; None beyond budget"""

    def collect(rho: Entries) -> List[Entries]:
        if view.contains(rho):
            return [rho]
        if len(rho) >= horizon:
            return []
        width = view.bound.table[len(rho)]
        relevant = sorted(v for v in view.branch_values(rho) if v < width)
        found: List[Entries] = []
        for value in relevant:
            found.extend(collect(rho + (value,)))
        generic = BushySearch._representative(relevant, width)
        if generic is not None:
            below = collect(rho + (generic,))
            if below:
                position = len(rho)
                taken = set(relevant)
                for value in range(width):
                    if value not in taken:
                        found.extend(body[:position] + (value,) + body[position + 1:] for body in below)
        if len(found) > budget:
            raise _Overflow()
        return found

    horizon = min(horizon, view.bound.depth)
    try:
        bodies = collect(stem)
    except _Overflow:
        logger.info("materialization above %s exceeded %d members", format_entries(stem), budget)
        return None
    return StringSet(view.bound, frozenset(bodies), True)


def find_uncovered(sub: StringView, sup: StringSet, stem: Entries, horizon: int) -> Optional[Entries]:
    """A string of sub in the cone of stem, up to horizon, missing from sup"""
    horizon = min(horizon, sub.bound.depth)

    def visit(rho: Entries) -> Optional[Entries]:
        if sup.covers(rho):
            return None
        if sub.contains(rho) and not sup.contains(rho):
            return rho
        if len(rho) >= horizon:
            return None
        width = sub.bound.table[len(rho)]
        relevant = sorted(v for v in sub.branch_values(rho) | sup.branch_values(rho) if v < width)
        for value in relevant:
            missing = visit(rho + (value,))
            if missing is not None:
                return missing
        generic = BushySearch._representative(relevant, width)
        if generic is not None:
            return visit(rho + (generic,))
        return None

    return visit(stem)
