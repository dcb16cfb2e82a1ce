"""
Bounded strings, orders and finite trees over an order h
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import FrozenSet, Iterable, Iterator, List, Sequence, Tuple

from core.errors import BoundViolation, DepthExceeded, FormatError, InvalidOrder, InvalidTree, NotANode, OrderMismatch

logger = logging.getLogger(__name__)

Entries = Tuple[int, ...]


def format_entries(entries: Sequence[int]) -> str:
    """Comma form of a string body, '-' for the empty string"""
    if not entries:
        return "-"
    return ",".join(str(value) for value in entries)


def parse_entries(text: str) -> Entries:
    """Inverse of format_entries"""
    text = text.strip()
    if text in ("-", ""):
        return ()
    return tuple(int(part) for part in text.split(","))


@dataclass(frozen=True)
class Order:
    """Finite nondecreasing table of branching bounds, h(n) = table[n]"""
    table: Tuple[int, ...]

    def __post_init__(self):
        table = tuple(int(value) for value in self.table)
        object.__setattr__(self, 'table', table)
        if not table:
            raise InvalidOrder("an order needs at least one entry")
        if any(value < 2 for value in table):
            raise InvalidOrder(f"every entry must be at least 2: {table}")
        if any(table[i] > table[i + 1] for i in range(len(table) - 1)):
            raise InvalidOrder(f"order table must be nondecreasing: {table}")

    @property
    def depth(self) -> int:
        """Working depth N: strings have length at most N"""
        return len(self.table)

    def h(self, n: int) -> int:
        if n < 0 or n >= len(self.table):
            raise DepthExceeded(f"h({n}) requested but the order only covers depth {len(self.table)}")
        return self.table[n]

    def check_depth(self, depth: int):
        if depth < 0 or depth > len(self.table):
            raise DepthExceeded(f"depth {depth} outside 0..{len(self.table)}")

    def interleaved(self) -> 'Order':
        """Order of joined strings: h(0), h(0), h(1), h(1), ..."""
        return Order(tuple(value for value in self.table for _ in range(2)))

    def strings_of_length(self, n: int) -> Iterator[Entries]:
        """All bodies of length n in lexicographic order"""
        self.check_depth(n)
        return product(*(range(self.table[i]) for i in range(n)))

    def __str__(self) -> str:
        return "order " + " ".join(str(value) for value in self.table)


@dataclass(frozen=True, order=True)
class BoundedString:
    """A string a_0 ... a_{n-1} with a_i < h(i)"""
    bound: Order = field(compare=False)
    entries: Entries = ()

    def __post_init__(self):
        entries = tuple(int(value) for value in self.entries)
        object.__setattr__(self, 'entries', entries)
        if len(entries) > self.bound.depth:
            raise DepthExceeded(f"string of length {len(entries)} exceeds depth {self.bound.depth}")
        for position, value in enumerate(entries):
            if value < 0 or value >= self.bound.table[position]:
                raise BoundViolation(
                    f"entry {value} at position {position} not below h({position})={self.bound.table[position]}")

    def __eq__(self, other):
        if not isinstance(other, BoundedString):
            return NotImplemented
        return self.entries == other.entries and self.bound == other.bound

    def __hash__(self):
        return hash((self.bound.table, self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def empty(cls, bound: Order) -> 'BoundedString':
        return cls(bound, ())

    def extend(self, value: int) -> 'BoundedString':
        return BoundedString(self.bound, self.entries + (value,))

    def prefix(self, length: int) -> 'BoundedString':
        return BoundedString(self.bound, self.entries[:length])

    def prefixes(self) -> List['BoundedString']:
        """Every prefix from the empty string up to self"""
        return [self.prefix(n) for n in range(len(self.entries) + 1)]

    def is_prefix_of(self, other: 'BoundedString') -> bool:
        return is_prefix(self, other)

    def is_comparable(self, other: 'BoundedString') -> bool:
        return is_prefix(self, other) or is_prefix(other, self)

    def __str__(self) -> str:
        return "str " + format_entries(self.entries)


def _same_order(a: BoundedString, b: BoundedString):
    if a.bound != b.bound:
        raise OrderMismatch(f"{a.bound} vs {b.bound}")


def is_prefix(a: BoundedString, b: BoundedString) -> bool:
    """True iff a's entries are an initial segment of b's"""
    _same_order(a, b)
    return b.entries[:len(a.entries)] == a.entries


def children(s: BoundedString) -> FrozenSet[BoundedString]:
    """The h(|s|) one-entry extensions of s"""
    width = s.bound.h(len(s))
    return frozenset(s.extend(value) for value in range(width))


def join_strings(context: BoundedString, string: BoundedString) -> BoundedString:
    """Interleave context and string, context first, as far as both are defined"""
    _same_order(context, string)
    joined: List[int] = []
    for position in range(min(len(context), len(string))):
        joined.append(context.entries[position])
        joined.append(string.entries[position])
    if len(context) > len(string):
        joined.append(context.entries[len(string)])
    return BoundedString(context.bound.interleaved(), tuple(joined))


@dataclass(frozen=True)
class FiniteTree:
    """Prefix-closed finite set of strings, all comparable with the stem"""
    nodes: FrozenSet[BoundedString]
    stem: BoundedString

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        object.__setattr__(self, 'nodes', nodes)
        if self.stem not in nodes:
            raise InvalidTree(f"stem {format_entries(self.stem.entries)} is not a node")
        bodies = {node.entries for node in nodes}
        stem = self.stem.entries
        for node in nodes:
            if node.bound != self.stem.bound:
                raise OrderMismatch("tree nodes use different orders")
            body = node.entries
            if body and body[:-1] not in bodies:
                raise InvalidTree(f"node {format_entries(body)} is missing its parent")
            if body[:len(stem)] != stem and stem[:len(body)] != body:
                raise InvalidTree(f"node {format_entries(body)} is not comparable with the stem")

    @classmethod
    def from_entries(cls, bound: Order, bodies: Iterable[Sequence[int]],
                     stem: Sequence[int] = ()) -> 'FiniteTree':
        return cls(frozenset(BoundedString(bound, tuple(body)) for body in bodies),
                   BoundedString(bound, tuple(stem)))

    @classmethod
    def full(cls, bound: Order, depth: int) -> 'FiniteTree':
        """Every string of length at most depth, stem empty"""
        bound.check_depth(depth)
        bodies = [body for n in range(depth + 1) for body in bound.strings_of_length(n)]
        return cls.from_entries(bound, bodies)

    @property
    def bound(self) -> Order:
        return self.stem.bound

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: BoundedString) -> bool:
        return node in self.nodes

    def children_of(self, node: BoundedString) -> List[BoundedString]:
        return sorted(child for child in self.nodes
                      if len(child) == len(node) + 1 and child.entries[:len(node)] == node.entries)

    def leaves(self) -> List[BoundedString]:
        parents = {node.entries[:-1] for node in self.nodes if node.entries}
        return sorted(node for node in self.nodes if node.entries not in parents)

    def height(self) -> int:
        return max(len(node) for node in self.nodes)

    def sorted_nodes(self) -> List[BoundedString]:
        return sorted(self.nodes)


def subtree_at(tree: FiniteTree, s: BoundedString) -> FiniteTree:
    """T^[s]: the nodes of tree comparable with s, re-stemmed at s"""
    if s not in tree.nodes:
        raise NotANode(f"{format_entries(s.entries)} is not a node of the tree")
    kept = frozenset(node for node in tree.nodes if node.is_comparable(s))
    return FiniteTree(kept, s)


def lookup_string(bound: Order, text: str) -> BoundedString:
    """String from its comma form, checked against the order"""
    try:
        entries = parse_entries(text)
    except ValueError:
        raise FormatError(f"'{text}' is not a comma separated list of naturals")
    return BoundedString(bound, entries)
