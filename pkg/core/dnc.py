"""
Finite diagonal tables, oracle functional tables and DNC strings
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

from core.bigness import StringSet, k_closure
from core.errors import ConsistencyViolation, EngineBug, OrderMismatch
from core.strings import BoundedString, Entries, Order, format_entries

logger = logging.getLogger(__name__)


@dataclass
class MachineTable:
    """Finite partial diagonal e -> value; missing indices diverge"""
    diag: Dict[int, int] = field(default_factory=dict)

    def value(self, e: int) -> Optional[int]:
        return self.diag.get(e)

    def defined(self) -> List[int]:
        return sorted(self.diag)

    def within(self, bound: Order) -> Dict[int, int]:
        """Entries that can constrain strings over bound"""
        usable = {}
        for e in self.defined():
            if e >= bound.depth:
                logger.warning("diagonal entry %d -> %d lies beyond depth %d and is ignored",
                               e, self.diag[e], bound.depth)
                continue
            usable[e] = self.diag[e]
        return usable


def b_dnc(t: MachineTable, h: Order) -> StringSet:
    """Strings that hit the diagonal, as minimal first hits"""
    usable = t.within(h)
    members: Set[Entries] = set()
    for e, value in usable.items():
        if value >= h.table[e]:
            continue
        choices = []
        for position in range(e):
            earlier = usable.get(position)
            choices.append([v for v in range(h.table[position]) if v != earlier])
        for head in product(*choices):
            members.add(tuple(head) + (value,))
    logger.debug("B_DNC has %d minimal elements", len(members))
    return StringSet(h, frozenset(members), True)


def build_dnc_string(t: MachineTable, n: int, h: Order) -> BoundedString:
    """Least length-n string staying outside the 2-closure of B_DNC"""
    h.check_depth(n)
    avoid = k_closure(b_dnc(t, h), 2, h.depth)
    current: Entries = ()
    for position in range(n):
        for value in range(h.table[position]):
            if not avoid.contains(current + (value,)):
                current = current + (value,)
                break
        else:
            raise EngineBug(f"every child of {format_entries(current)} lies in the 2-closure of B_DNC")
    return BoundedString(h, current)


def is_dnc(f: BoundedString, t: MachineTable) -> bool:
    for e, value in enumerate(f.entries):
        if t.value(e) == value:
            return False
    return True


class OracleFunctionalTable:
    """
    Finite model of a functional run on the oracle joined with a string.

    An entry (p, x) -> v means the computation at input x halts with output v
    on every string extending p that is longer than x.
    """

    def __init__(self, bound: Order, entries: Optional[Dict[Tuple[BoundedString, int], int]] = None):
        self.bound = bound
        self.entries: Dict[Tuple[BoundedString, int], int] = {}
        self._by_input: Dict[int, Dict[Entries, int]] = {}
        for (prefix, x), value in (entries or {}).items():
            self._add(prefix, x, value)
        self.check_consistency()

    def _add(self, prefix: BoundedString, x: int, value: int):
        if prefix.bound != self.bound:
            raise OrderMismatch(f"{prefix.bound} vs {self.bound}")
        if x >= self.bound.depth:
            logger.warning("functional entry at input %d can never converge below depth %d", x, self.bound.depth)
        self.entries[(prefix, x)] = value
        self._by_input.setdefault(x, {})[prefix.entries] = value

    def check_consistency(self):
        """Comparable prefixes at the same input must give the same output"""
        for x, table in self._by_input.items():
            for body, value in table.items():
                for n in range(len(body)):
                    earlier = table.get(body[:n])
                    if earlier is not None and earlier != value:
                        raise ConsistencyViolation(
                            f"input {x}: {format_entries(body[:n])} gives {earlier} "
                            f"but {format_entries(body)} gives {value}")

    def inputs(self) -> List[int]:
        return sorted(self._by_input)

    def eval_entries(self, entries: Entries, x: int) -> Optional[int]:
        if x >= len(entries):
            return None
        table = self._by_input.get(x)
        if not table:
            return None
        for n in range(len(entries) + 1):
            value = table.get(entries[:n])
            if value is not None:
                return value
        return None

    def support(self) -> FrozenSet[Entries]:
        """Every prefix carrying an entry"""
        return frozenset(body for table in self._by_input.values() for body in table)

    def outputs_one_above(self, entries: Entries, floor: int) -> Iterator[int]:
        """Inputs x > floor at which the functional outputs 1 along entries"""
        for x in self.inputs():
            if x > floor and self.eval_entries(entries, x) == 1:
                yield x

    def __len__(self) -> int:
        return len(self.entries)


def eval_functional(F: OracleFunctionalTable, tau: BoundedString, x: int) -> Optional[int]:
    """Output at the shortest defined prefix of tau, None when divergent"""
    if tau.bound != F.bound:
        raise OrderMismatch(f"{tau.bound} vs {F.bound}")
    return F.eval_entries(tau.entries, x)
