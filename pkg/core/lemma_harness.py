"""
Randomized property suites for the bigness lemmas, B_DNC smallness and settling persistence

Every trial draws from its own generator seeded by (run seed, suite, trial index),
so a run is reproducible whatever the number of workers.
"""

import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from core.bigness import StringSet, decide_big, is_k_big, k_closure, least_small_k, union_small, verify_concatenation
from core.config import SearchBounds
from core.dnc import MachineTable, OracleFunctionalTable, b_dnc
from core.errors import ForcingLabError, PreconditionFailed
from core.graphs import Graph
from core.iteration_forcing import Clause2, Condition, extend_condition, initial_condition, settle, verify_settled
from core.requirements import w_requirement
from core.strings import BoundedString, Entries, Order

logger = logging.getLogger(__name__)

MAX_WIDTH = 5
MAX_DEPTH = 6
MAX_K = 3
FAILURES_KEPT = 5


def random_order(rng: random.Random, min_width: int = 2, max_width: int = MAX_WIDTH,
                 max_depth: int = MAX_DEPTH) -> Order:
    depth = rng.randint(1, max_depth)
    low = max(2, min_width)
    return Order(tuple(sorted(rng.randint(low, max_width) for _ in range(depth))))


def random_entries(rng: random.Random, order: Order, length: int, stem: Entries = ()) -> Entries:
    return stem + tuple(rng.randrange(order.table[i]) for i in range(len(stem), length))


def random_bushy_leaves(rng: random.Random, order: Order, stem: Entries, k: int, height: int) -> List[Entries]:
    """Leaves of a random k-bushy tree above stem, at most `height` levels tall"""
    if height <= 0 or len(stem) >= order.depth or order.table[len(stem)] < k:
        return [stem]
    width = order.table[len(stem)]
    leaves: List[Entries] = []
    for value in sorted(rng.sample(range(width), rng.randint(k, width))):
        leaves.extend(random_bushy_leaves(rng, order, stem + (value,), k, rng.randint(0, height - 1)))
    return leaves


def random_upward_set(rng: random.Random, order: Order, count: int) -> StringSet:
    bodies = [random_entries(rng, order, rng.randint(1, order.depth)) for _ in range(count)]
    return StringSet.of(order, bodies)


def random_machine_table(rng: random.Random, order: Order) -> MachineTable:
    diag = {}
    for e in range(order.depth):
        if rng.random() < 0.7:
            diag[e] = rng.randrange(MAX_WIDTH + 1)
    return MachineTable(diag)


def check_concatenation(rng: random.Random) -> Optional[str]:
    k = rng.randint(1, MAX_K)
    order = random_order(rng, min_width=k)
    stem = random_entries(rng, order, rng.randint(0, order.depth - 1))
    s = BoundedString(order, stem)
    A = StringSet.of(order, random_bushy_leaves(rng, order, stem, k, rng.randint(0, order.depth - len(stem))))
    family: Dict[BoundedString, StringSet] = {}
    for leaf in A.members:
        above = random_bushy_leaves(rng, order, leaf, k, rng.randint(0, order.depth - len(leaf)))
        family[BoundedString(order, leaf)] = StringSet.of(order, above)
    if not verify_concatenation(A, family, k, s, order.depth):
        return f"{order}: union over the witness of A is {k}-small above {s}"
    return None


def check_additivity(rng: random.Random) -> Optional[str]:
    order = random_order(rng)
    s = BoundedString(order, random_entries(rng, order, rng.randint(0, order.depth - 1)))
    parts = []
    for _ in range(rng.randint(2, 3)):
        B = random_upward_set(rng, order, rng.randint(1, 4))
        k = least_small_k(B, s, order.depth)
        if k is not None:
            parts.append((B, k))
    if parts:
        union_small(parts, s, order.depth)
    return None


def check_closure(rng: random.Random) -> Optional[str]:
    order = random_order(rng)
    k = rng.randint(1, MAX_K)
    B = random_upward_set(rng, order, rng.randint(1, 5))
    s = BoundedString(order, random_entries(rng, order, rng.randint(0, order.depth - 1)))
    closure = k_closure(B, k, order.depth)
    if not B.issubset(closure):
        return f"{order}: closure misses part of B"
    if k_closure(closure, k, order.depth) != closure:
        return f"{order}: {k}-closure is not idempotent"
    if decide_big(B, k, s, order.depth):
        return None
    if s in closure:
        return f"{order}: B is {k}-small above {s} but the closure contains it"
    if decide_big(closure, k, s, order.depth):
        return f"{order}: B is {k}-small above {s} but its closure is {k}-big"
    return None


def check_bdnc(rng: random.Random) -> Optional[str]:
    order = random_order(rng, min_width=1)
    t = random_machine_table(rng, order)
    if is_k_big(b_dnc(t, order), 2, BoundedString.empty(order), order.depth).is_big:
        return f"{order}: B_DNC of {sorted(t.diag.items())} is 2-big above the empty string"
    return None


class PersistenceCheck:
    """Random extensions of one Clause2-settled condition"""

    def __init__(self):
        order = Order((8,) * 8)
        table = OracleFunctionalTable(order, {(BoundedString.empty(order), x): 1 for x in range(8)})
        self.K = w_requirement(0, table)
        self.G = Graph.from_edges([])
        self.bounds = SearchBounds(x_max=0, a_size=1, y_max=6, f_bound=2, depth=6, universe=12)
        self.condition: Optional[Condition] = None
        self.outcome = None

    def baseline(self):
        if self.condition is None:
            c = initial_condition(MachineTable(), self.K.bound)
            self.condition, self.outcome = settle(self.K, c, self.G, self.bounds)
        return self.condition, self.outcome

    def __call__(self, rng: random.Random) -> Optional[str]:
        c, out = self.baseline()
        if not isinstance(out, Clause2):
            return f"baseline did not settle by Clause2: {out}"
        extended = extend_condition(c, rng)
        if not verify_settled(self.K, self.G, extended, out, self.bounds):
            return f"settling lost at stem {extended.stem}"
        return None


@dataclass
class HarnessProgress:
    """Progress information for a suite run"""
    suite: str
    completed: int
    total: int
    violations: int
    is_complete: bool = False


@dataclass
class SuiteReport:
    suite: str
    trials: int
    violations: int = 0
    failures: List[str] = field(default_factory=list)
    seconds: float = 0.0


class LemmaHarness:
    """Runs property suites trial by trial, optionally on a thread pool"""

    default_suites = ["concatenation", "additivity", "closure"]

    def __init__(self, workers: int = 1):
        self.workers = max(1, workers)
        self.stop_requested = False
        persistence = PersistenceCheck()
        self.checks: Dict[str, Callable[[random.Random], Optional[str]]] = {
            "concatenation": check_concatenation,
            "additivity": check_additivity,
            "closure": check_closure,
            "bdnc": check_bdnc,
            "persistence": persistence,
        }

    @property
    def suite_names(self) -> List[str]:
        return list(self.checks)

    def stop(self):
        self.stop_requested = True

    def _trial(self, suite: str, seed: int, index: int) -> Optional[str]:
        if self.stop_requested:
            return None
        rng = random.Random(f"{seed}:{suite}:{index}")
        try:
            return self.checks[suite](rng)
        except ForcingLabError as e:
            return f"{e.name}: {e}"

    def run_suite(self, suite: str, trials: int, seed: int,
                  progress_callback: Optional[Callable[[HarnessProgress], None]] = None) -> SuiteReport:
        if suite not in self.checks:
            raise PreconditionFailed(f"unknown suite {suite}; choose from {', '.join(self.checks)}")
        if suite == "persistence":
            self.checks[suite].baseline()
        report = SuiteReport(suite=suite, trials=trials)
        started = time.perf_counter()

        def record(index: int, failure: Optional[str]):
            if failure is not None:
                report.violations += 1
                if len(report.failures) < FAILURES_KEPT:
                    report.failures.append(f"trial {index}: {failure}")
            if progress_callback:
                progress_callback(HarnessProgress(suite, index + 1, trials, report.violations))

        if self.workers == 1:
            for index in range(trials):
                record(index, self._trial(suite, seed, index))
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = pool.map(lambda i: self._trial(suite, seed, i), range(trials))
                for index, failure in enumerate(results):
                    record(index, failure)

        report.seconds = time.perf_counter() - started
        if progress_callback:
            progress_callback(HarnessProgress(suite, trials, trials, report.violations, is_complete=True))
        logger.info("suite %s: %d trials, %d violations in %.2fs", suite, trials, report.violations,
                    report.seconds)
        return report

    def run(self, suites: Optional[Sequence[str]] = None, trials: int = 1000, seed: int = 0,
            progress_callback: Optional[Callable[[HarnessProgress], None]] = None) -> List[SuiteReport]:
        self.stop_requested = False
        reports = []
        for suite in suites or self.default_suites:
            if self.stop_requested:
                break
            reports.append(self.run_suite(suite, trials, seed, progress_callback))
        return reports
