"""
Deterministic text reports for every subcommand

Reports contain no timings or paths, so identical inputs give identical bytes.
Certificates are embedded in the record formats of core.text_formats so they
can be parsed back and re-verified.
"""

from typing import Dict, List, Optional, Tuple

from core.bigness import BigVerdict, StringSet
from core.graphs import Graph, PairSet
from core.ground_construction import DensityStrategy, DiagStrategy, EdgeDecision, GroundReport
from core.iteration_forcing import Condition, GenericTrace, SettleOutcome
from core.lemma_harness import SuiteReport
from core.strings import BoundedString, Order, format_entries
from core.text_formats import (format_condition, format_graph, format_outcome, format_pairs, format_string_set,
                               format_tree)


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def format_big(verdict: BigVerdict, k: int, stem: BoundedString) -> str:
    header = f"# k={k} stem={format_entries(stem.entries)}"
    if verdict.is_big:
        return "\n".join([header, "BIG", format_tree(verdict.witness.tree)])
    return "\n".join([header, "SMALL", f"# searched depth {verdict.searched_depth}"])


def format_closure(closure: StringSet, k: int) -> str:
    return "\n".join([str(closure.bound), f"# {k}-closure", format_string_set(closure)])


def format_dnc(f: BoundedString, dnc: bool) -> str:
    return "\n".join([str(f), f"# dnc {_yes(dnc)}"])


def format_odd(pairs: PairSet) -> str:
    body = format_pairs(pairs)
    return f"# {len(pairs)} odd pairs" + ("\n" + body if body else "")


def format_homogeneous(homogeneous: bool, k: int, H: List[int]) -> str:
    return f"{'HOMOGENEOUS' if homogeneous else 'NOT-HOMOGENEOUS'} k={k} H={format_entries(sorted(H))}"


def format_member(name: str, tau: BoundedString, witness: Optional[PairSet]) -> str:
    if witness is None:
        return f"NOT-MEMBER {name} tau={format_entries(tau.entries)}"
    lines = [f"MEMBER {name} tau={format_entries(tau.entries)}"]
    body = format_pairs(witness)
    if body:
        lines.append(body)
    return "\n".join(lines)


def format_edge_log(log: List[EdgeDecision]) -> str:
    return "\n".join(f"edge {d.u} {d.v} stage={d.stage} by={d.strategy}" for d in log)


def format_ground_report(report: GroundReport, seed: int) -> str:
    lines = [f"# ground run seed={seed} stages={report.stages}",
             f"budget {report.vertex_budget} fresh_used {report.fresh_used}",
             f"frozen {_yes(report.frozen_ok)}",
             f"bipartite_every_stage {_yes(all(report.bipartite_by_stage))}"]
    for strategy in report.strategies:
        line = f"strategy {strategy.name} rank={strategy.rank} status={strategy.status}"
        if strategy.acted_at is not None:
            line += f" stage={strategy.acted_at}"
        if isinstance(strategy, DiagStrategy):
            line += f" e={strategy.e} verified={_yes(report.diag_checks.get(strategy.name, False))}"
        elif isinstance(strategy, DensityStrategy):
            line += f" req={strategy.K.descriptor} k={strategy.k}"
            if strategy.committed is not None:
                line += (f" A0={format_entries(sorted(strategy.A0))} A1={format_entries(sorted(strategy.A1))}"
                         f" committed={strategy.committed}"
                         f" verified={_yes(report.density_checks.get(strategy.name, False))}")
        if strategy.restrained:
            line += f" restrained={format_entries(sorted(strategy.restrained))}"
        lines.append(line)
        if strategy.detail:
            lines.append(f"# {strategy.detail}")
    return "\n".join(lines)


def format_settle(order: Order, name: str, condition: Condition, outcome: SettleOutcome,
                  verified: Optional[bool]) -> str:
    """A settle certificate: order, the resulting condition and the outcome"""
    lines = [f"# settle {name}", str(order), format_condition(condition), format_outcome(outcome)]
    if verified is not None:
        lines.append(f"# verified {_yes(verified)}")
    return "\n".join(lines)


def _scan_line(hits: List[Tuple[int, int]]) -> str:
    if not hits:
        return "# scan clean"
    return "# scan hits " + " ".join(f"{length}:{x}" for length, x in hits)


def format_generic(trace: GenericTrace, stem: BoundedString, dnc: bool, seed: int,
                   scans: Optional[Dict[int, List[Tuple[int, int]]]] = None) -> str:
    """One header per step followed by its full outcome record, so each block parses back"""
    scans = scans or {}
    lines = [f"# generic run seed={seed} steps={len(trace.steps)}",
             f"initial stem={format_entries(trace.initial.stem.entries)} k={trace.initial.k}"]
    for step in trace.steps:
        line = f"step {step.step} stem={format_entries(step.stem.entries)} k={step.k}"
        if step.requirement is not None:
            line += f" req={step.requirement}"
        lines.append(line)
        if step.outcome is not None:
            lines.append(format_outcome(step.outcome))
        if step.step in scans:
            lines.append(_scan_line(scans[step.step]))
    lines.append(f"final {stem}")
    lines.append(f"dnc {_yes(dnc)}")
    return "\n".join(lines)


def format_lemmas(reports: List[SuiteReport], seed: int) -> str:
    lines = [f"# lemma suites seed={seed}"]
    for report in reports:
        lines.append(f"suite {report.suite} trials={report.trials} violations={report.violations}")
        lines.extend(f"# {failure}" for failure in report.failures)
    total = sum(report.violations for report in reports)
    lines.append(f"total violations={total}")
    return "\n".join(lines)


def format_ground_files(graph: Graph, report: GroundReport, seed: int) -> List[Tuple[str, str]]:
    return [("graph.out", format_graph(graph) + "\n"),
            ("log.out", format_edge_log(report.log) + "\n"),
            ("report.out", format_ground_report(report, seed) + "\n")]
