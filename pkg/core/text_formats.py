"""
Line-oriented text formats for every lab object, parse and serialize

Files are sequences of records, one per line; blank lines and lines starting
with '#' are ignored. Any file may begin with an `order` record; otherwise the
reader's default order applies.
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from core.bigness import StringSet
from core.dnc import MachineTable, OracleFunctionalTable
from core.errors import FormatError, ForcingLabError
from core.ground_construction import Enumerator
from core.graphs import Graph, PairSet, make_pair, sorted_pairs
from core.iteration_forcing import BoundExhausted, Clause1, Clause2, Condition, SettleOutcome
from core.strings import BoundedString, Entries, FiniteTree, Order, format_entries, parse_entries

logger = logging.getLogger(__name__)


@dataclass
class Record:
    """One meaningful line of a lab file"""
    line_no: int
    keyword: str
    body: str


def split_records(text: str) -> List[Record]:
    records = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, body = line.partition(" ")
        records.append(Record(line_no, keyword, body.strip()))
    return records


def _fail(record: Record, message: str) -> FormatError:
    return FormatError(f"line {record.line_no}: {message}")


def _entries(record: Record, text: str) -> Entries:
    try:
        return parse_entries(text)
    except ValueError:
        raise _fail(record, f"'{text}' is not a comma separated list of naturals")


def _int(record: Record, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise _fail(record, f"'{text}' is not an integer")


def _options(record: Record, body: str) -> Dict[str, str]:
    options = {}
    for token in body.split():
        if "=" not in token:
            raise _fail(record, f"expected key=value, got '{token}'")
        key, value = token.split("=", 1)
        options[key] = value
    return options


def format_order(order: Order) -> str:
    return str(order)


def format_string_set(B: StringSet) -> str:
    lines = [f"set upward={'true' if B.upward_closed else 'false'}"]
    lines.extend(f"str {format_entries(body)}" for body in sorted(B.members))
    lines.extend(f"pt {format_entries(body)}" for body in sorted(B.points))
    return "\n".join(lines)


def format_tree(T: FiniteTree) -> str:
    lines = [f"tree stem={format_entries(T.stem.entries)}"]
    lines.extend(f"str {format_entries(node.entries)}" for node in T.sorted_nodes())
    return "\n".join(lines)


def format_graph(G: Graph) -> str:
    lines = ["graph", "v " + " ".join(str(v) for v in sorted(G.vertices))]
    lines.extend(f"e {u} {v}" for u, v in G.sorted_edges())
    return "\n".join(lines)


def format_pairs(pairs: PairSet) -> str:
    return "\n".join("p " + " ".join(str(v) for v in key) for key in sorted_pairs(pairs))


def format_machine_table(t: MachineTable) -> str:
    return "\n".join(f"diag {e} -> {t.diag[e]}" for e in t.defined())


def format_functional(F: OracleFunctionalTable) -> str:
    lines = []
    for (prefix, x), value in sorted(F.entries.items(), key=lambda item: (item[0][1], item[0][0].entries)):
        lines.append(f"fn {format_entries(prefix.entries)} | {x} -> {value}")
    return "\n".join(lines)


def format_enumerator(en: Enumerator) -> str:
    lines = [f"en {stage}: {format_entries(sorted(values))}" for stage, values in en.events]
    if en.progression is not None:
        lines.append(f"en every {en.progression[0]} {en.progression[1]}")
    return "\n".join(lines)


def format_condition(c: Condition) -> str:
    return f"cond stem={format_entries(c.stem.entries)} k={c.k}\n" + format_string_set(c.bad)


def format_outcome(out: SettleOutcome) -> str:
    if isinstance(out, Clause1):
        return f"clause1 tau={format_entries(out.tau.entries)}"
    if isinstance(out, Clause2):
        path = "" if out.path_equality is None else f" path={'yes' if out.path_equality else 'no'}"
        return (f"clause2 x={out.x} horizon={out.horizon} U={out.universe}{path}\n"
                + format_string_set(out.added))
    return f"exhausted {out.report}"


class FormatReader:
    """Parser for every lab text format over one default order"""

    def __init__(self, order: Optional[Order] = None):
        self.order = order

    def read_file(self, file_path: str) -> str:
        if not os.path.exists(file_path):
            raise FormatError(f"file not found: {file_path}")
        with open(file_path, 'r', encoding='utf-8') as file:
            return file.read()

    def _split_order(self, text: str) -> Tuple[Optional[Order], List[Record]]:
        records = split_records(text)
        order = self.order
        if records and records[0].keyword == "order":
            head = records.pop(0)
            try:
                order = Order(tuple(_int(head, value) for value in head.body.split()))
            except ForcingLabError as e:
                raise _fail(head, str(e))
        return order, records

    def _require_order(self, order: Optional[Order], what: str) -> Order:
        if order is None:
            raise FormatError(f"{what} needs an order: add an 'order' line or pass one")
        return order

    def parse_order(self, text: str) -> Order:
        order, _ = self._split_order(text)
        return self._require_order(order, "order file")

    def parse_string(self, text: str) -> BoundedString:
        order, records = self._split_order(text)
        order = self._require_order(order, "string")
        if len(records) != 1 or records[0].keyword != "str":
            raise FormatError("a string file holds exactly one 'str' record")
        return self._bounded(order, records[0], records[0].body)

    def _bounded(self, order: Order, record: Record, text: str) -> BoundedString:
        try:
            return BoundedString(order, _entries(record, text))
        except ForcingLabError as e:
            raise _fail(record, str(e))

    def _string_set(self, order: Order, records: List[Record]) -> StringSet:
        if not records or records[0].keyword != "set":
            raise FormatError("a string set starts with 'set upward=true|false'")
        header = records[0]
        upward = _options(header, header.body).get("upward", "true")
        if upward not in ("true", "false"):
            raise _fail(header, f"upward must be true or false, got '{upward}'")
        members, points = [], []
        for record in records[1:]:
            if record.keyword == "str":
                members.append(self._bounded(order, record, record.body).entries)
            elif record.keyword == "pt":
                points.append(self._bounded(order, record, record.body).entries)
            else:
                raise _fail(record, f"unexpected '{record.keyword}' inside a string set")
        if points and upward == "false":
            raise _fail(header, "isolated points only belong to upward-closed sets")
        return StringSet(order, frozenset(members), upward == "true", frozenset(points))

    def parse_string_set(self, text: str) -> StringSet:
        order, records = self._split_order(text)
        return self._string_set(self._require_order(order, "string set"), records)

    def parse_tree(self, text: str) -> FiniteTree:
        """A 'tree stem=...' header followed by one 'str' record per node"""
        order, records = self._split_order(text)
        order = self._require_order(order, "tree")
        if not records or records[0].keyword != "tree":
            raise FormatError("a tree starts with 'tree stem=...'")
        head = records[0]
        options = _options(head, head.body)
        if "stem" not in options:
            raise _fail(head, "a tree names its stem=")
        stem = self._bounded(order, head, options["stem"])
        nodes = []
        for record in records[1:]:
            if record.keyword != "str":
                raise _fail(record, f"unexpected '{record.keyword}' inside a tree")
            nodes.append(self._bounded(order, record, record.body))
        try:
            return FiniteTree(frozenset(nodes), stem)
        except ForcingLabError as e:
            raise _fail(head, str(e))

    def parse_graph(self, text: str) -> Graph:
        _, records = self._split_order(text)
        if not records or records[0].keyword != "graph":
            raise FormatError("a graph file starts with 'graph'")
        vertices, edges = set(), []
        for record in records[1:]:
            values = [_int(record, token) for token in record.body.split()]
            if record.keyword == "v":
                vertices.update(values)
            elif record.keyword == "e":
                if len(values) != 2:
                    raise _fail(record, "an edge names exactly two vertices")
                edges.append(tuple(values))
            else:
                raise _fail(record, f"unexpected '{record.keyword}' in a graph")
        try:
            return Graph.from_edges(edges, vertices)
        except ForcingLabError as e:
            raise FormatError(str(e))

    def parse_pairs(self, text: str) -> PairSet:
        _, records = self._split_order(text)
        pairs = set()
        for record in records:
            if record.keyword != "p":
                raise _fail(record, f"unexpected '{record.keyword}' in a pair set")
            values = [_int(record, token) for token in record.body.split()]
            if len(values) not in (1, 2):
                raise _fail(record, "a pair names one or two vertices")
            pairs.add(make_pair(values[0], values[-1]))
        return frozenset(pairs)

    def parse_vertex_set(self, text: str) -> frozenset:
        """Comma list or 'v' records"""
        if "," in text or text.strip().isdigit():
            return frozenset(parse_entries(text))
        _, records = self._split_order(text)
        vertices = set()
        for record in records:
            if record.keyword != "v":
                raise _fail(record, f"unexpected '{record.keyword}' in a vertex set")
            vertices.update(_int(record, token) for token in record.body.split())
        return frozenset(vertices)

    def parse_machine_table(self, text: str) -> MachineTable:
        _, records = self._split_order(text)
        diag = {}
        for record in records:
            if record.keyword != "diag":
                raise _fail(record, f"unexpected '{record.keyword}' in a machine table")
            left, arrow, right = record.body.partition("->")
            if not arrow:
                raise _fail(record, "expected 'diag e -> value'")
            e = _int(record, left.strip())
            if e in diag:
                raise _fail(record, f"diagonal entry {e} given twice")
            if right.strip() != "div":
                diag[e] = _int(record, right.strip())
        return MachineTable(diag)

    def parse_functional(self, text: str) -> OracleFunctionalTable:
        order, records = self._split_order(text)
        order = self._require_order(order, "functional table")
        entries = {}
        for record in records:
            if record.keyword != "fn":
                raise _fail(record, f"unexpected '{record.keyword}' in a functional table")
            prefix_text, bar, rest = record.body.partition("|")
            left, arrow, right = rest.partition("->")
            if not bar or not arrow:
                raise _fail(record, "expected 'fn prefix | input -> output'")
            prefix = self._bounded(order, record, prefix_text.strip())
            entries[(prefix, _int(record, left.strip()))] = _int(record, right.strip())
        return OracleFunctionalTable(order, entries)

    def parse_enumerator(self, text: str) -> Enumerator:
        _, records = self._split_order(text)
        events, progression = [], None
        for record in records:
            if record.keyword != "en":
                raise _fail(record, f"unexpected '{record.keyword}' in an enumerator")
            if record.body.startswith("every"):
                parts = record.body.split()
                if len(parts) != 3:
                    raise _fail(record, "expected 'en every offset step'")
                progression = (_int(record, parts[1]), _int(record, parts[2]))
                continue
            stage, colon, values = record.body.partition(":")
            if not colon:
                raise _fail(record, "expected 'en stage: v,v,...'")
            events.append((_int(record, stage.strip()), frozenset(_entries(record, values.strip()))))
        try:
            return Enumerator(tuple(events), progression)
        except ForcingLabError as e:
            raise FormatError(str(e))

    def _condition(self, order: Order, records: List[Record]) -> Condition:
        if not records or records[0].keyword != "cond":
            raise FormatError("a condition starts with 'cond stem=... k=...'")
        head = records[0]
        options = _options(head, head.body)
        if "stem" not in options or "k" not in options:
            raise _fail(head, "a condition names stem= and k=")
        stem = self._bounded(order, head, options["stem"])
        return Condition(stem, self._string_set(order, records[1:]), _int(head, options["k"]))

    def parse_condition(self, text: str) -> Condition:
        order, records = self._split_order(text)
        return self._condition(self._require_order(order, "condition"), records)

    def parse_outcome(self, text: str) -> SettleOutcome:
        order, records = self._split_order(text)
        if not records:
            raise FormatError("empty settle outcome")
        head = records[0]
        if head.keyword == "exhausted":
            return BoundExhausted(head.body)
        order = self._require_order(order, "settle outcome")
        options = _options(head, head.body)
        if head.keyword == "clause1":
            return Clause1(self._bounded(order, head, options.get("tau", "")))
        if head.keyword == "clause2":
            path = options.get("path")
            return Clause2(x=_int(head, options.get("x", "")), added=self._string_set(order, records[1:]),
                           horizon=_int(head, options.get("horizon", "")),
                           universe=_int(head, options.get("U", "")),
                           path_equality=None if path is None else path == "yes")
        raise _fail(head, f"unknown outcome '{head.keyword}'")

    def parse_settle_certificate(self, text: str) -> Tuple[Condition, SettleOutcome]:
        """A condition block followed by an outcome block"""
        order, records = self._split_order(text)
        order = self._require_order(order, "settle certificate")
        split = next((i for i, record in enumerate(records)
                      if record.keyword in ("clause1", "clause2", "exhausted")), None)
        if split is None:
            raise FormatError("certificate has no outcome record")
        condition = self._condition(order, records[:split])
        head = records[split]
        rest = "\n".join(f"{r.keyword} {r.body}" for r in records[split:])
        reader = FormatReader(order)
        logger.debug("certificate outcome starts at line %d", head.line_no)
        return condition, reader.parse_outcome(rest)
