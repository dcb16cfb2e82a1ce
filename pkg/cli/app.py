"""
forcing-lab: command-line surface of the laboratory

Exit codes: 0 on success, 1 on a domain error (its name is printed on stderr),
2 on a usage error.
"""

import logging
import os
import sys
from contextlib import contextmanager
from typing import Annotated, List, Optional

import click
import typer

from cli.report import (format_big, format_closure, format_dnc, format_generic, format_ground_files,
                        format_homogeneous, format_lemmas, format_member, format_odd, format_settle)
from core.bigness import is_k_big, k_closure
from core.config import LabSettings, SearchBounds
from core.dnc import build_dnc_string, is_dnc
from core.errors import EngineBug, FormatError, ForcingLabError, OrderMismatch
from core.graphs import Graph, is_k_homogeneous, odd_pairs
from core.ground_construction import run_ground
from core.iteration_forcing import BoundExhausted, build_generic, scan_trace, settle, verify_settled
from core.lemma_harness import HarnessProgress, LemmaHarness
from core.manifest import LabSetup, load_setup
from core.requirements import Biclique, ExplicitGraph, PairSource, TailSquare, constant_relation, find_witness
from core.strings import Order, lookup_string, parse_entries
from core.text_formats import FormatReader

logger = logging.getLogger(__name__)

app = typer.Typer(name="forcing-lab", add_completion=False, no_args_is_help=True,
                  help="Bushy-tree forcing laboratory: bigness, DNC strings, graphs, ground runs and settling.")


@contextmanager
def domain_errors():
    try:
        yield
    except ForcingLabError as e:
        typer.echo(f"{e.name}: {e}", err=True)
        raise typer.Exit(1)


def configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def _emit(text: str, out: Optional[str]):
    if out is None:
        typer.echo(text)
        return
    with open(out, 'w', encoding='utf-8') as f:
        f.write(text + "\n")


def _order_option(text: Optional[str]) -> Optional[Order]:
    if text is None:
        return None
    try:
        return Order(parse_entries(text))
    except ValueError as e:
        if isinstance(e, ForcingLabError):
            raise
        raise FormatError(f"--order '{text}' is not a comma separated list of naturals")


def _depth(depth: Optional[int], order: Order) -> int:
    settings = LabSettings.from_env()
    return settings.clamp_depth(order.depth if depth is None else depth)


def _vertex_list(text: str) -> List[int]:
    reader = FormatReader()
    if os.path.exists(text):
        return sorted(reader.parse_vertex_set(reader.read_file(text)))
    try:
        return sorted(parse_entries(text))
    except ValueError:
        raise FormatError(f"'{text}' is neither a file nor a comma separated vertex list")


def _pair_source(setup: LabSetup, text: str) -> PairSource:
    """graph:NAME, biclique:0,1/2,3 or tail:x/U"""
    kind, _, rest = text.partition(":")
    if kind == "graph":
        return ExplicitGraph(setup.graph(rest))
    left, slash, right = rest.partition("/")
    if not slash:
        raise FormatError(f"pair source '{text}' needs two parts separated by '/'")
    try:
        if kind == "biclique":
            return Biclique(parse_entries(left), parse_entries(right))
        if kind == "tail":
            return TailSquare(int(left), int(right))
    except ValueError as e:
        if isinstance(e, ForcingLabError):
            raise
        raise FormatError(f"pair source '{text}' has a malformed vertex list")
    raise FormatError(f"unknown pair source kind '{kind}'; use graph:, biclique: or tail:")


@app.callback()
def main_options(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log engine internals on stderr")] = False,
):
    configure_logging(verbose)


@app.command()
def big(
    set_file: Annotated[str, typer.Option("--set", help="String set file")],
    k: Annotated[int, typer.Option("--k", help="Bushiness")],
    stem: Annotated[str, typer.Option("--stem", help="Stem as a comma list, '-' for empty")] = "-",
    depth: Annotated[Optional[int], typer.Option("--depth", help="Search depth (capped)")] = None,
    order: Annotated[Optional[str], typer.Option("--order", help="Order when the file has none")] = None,
    out: Annotated[Optional[str], typer.Option("--out", help="Write the report here")] = None,
):
    """Decide whether a set is k-big above a stem and print the witness tree."""
    with domain_errors():
        reader = FormatReader(_order_option(order))
        B = reader.parse_string_set(reader.read_file(set_file))
        s = lookup_string(B.bound, stem)
        verdict = is_k_big(B, k, s, _depth(depth, B.bound))
        _emit(format_big(verdict, k, s), out)


@app.command()
def closure(
    set_file: Annotated[str, typer.Option("--set", help="String set file")],
    k: Annotated[int, typer.Option("--k", help="Bushiness")],
    depth: Annotated[Optional[int], typer.Option("--depth", help="Search depth (capped)")] = None,
    order: Annotated[Optional[str], typer.Option("--order", help="Order when the file has none")] = None,
    out: Annotated[Optional[str], typer.Option("--out", help="Write the closure here")] = None,
):
    """Print the k-closure of a set."""
    with domain_errors():
        reader = FormatReader(_order_option(order))
        B = reader.parse_string_set(reader.read_file(set_file))
        _emit(format_closure(k_closure(B, k, _depth(depth, B.bound)), k), out)


@app.command()
def dnc(
    table: Annotated[str, typer.Option("--table", help="Machine table file")],
    length: Annotated[int, typer.Option("--len", help="Length of the string to build")],
    order: Annotated[Optional[str], typer.Option("--order", help="Order when the file has none")] = None,
):
    """Build a DNC string of the given length by avoiding the 2-closure of B_DNC."""
    with domain_errors():
        reader = FormatReader(_order_option(order))
        text = reader.read_file(table)
        h = reader.parse_order(text)
        t = reader.parse_machine_table(text)
        f = build_dnc_string(t, length, h)
        _emit(format_dnc(f, is_dnc(f, t)), None)


@app.command()
def odd(
    graph: Annotated[str, typer.Option("--graph", help="Graph file")],
    universe: Annotated[Optional[str], typer.Option("--universe", help="Vertex list or file")] = None,
):
    """List the pairs joined by an odd-length walk."""
    with domain_errors():
        reader = FormatReader()
        G = reader.parse_graph(reader.read_file(graph))
        U = None if universe is None else _vertex_list(universe)
        _emit(format_odd(odd_pairs(G, U)), None)


@app.command()
def homog(
    graph: Annotated[str, typer.Option("--graph", help="Graph file")],
    vertex_set: Annotated[str, typer.Option("--set", help="Vertex list or file")],
    k: Annotated[int, typer.Option("--k", help="Number of colors")] = 2,
    subset_bound: Annotated[int, typer.Option("--bound", help="Subset size of the exhaustive check")] = 6,
):
    """Check that every k-coloring of every small subgraph leaves the set monochromatic."""
    with domain_errors():
        reader = FormatReader()
        G = reader.parse_graph(reader.read_file(graph))
        H = _vertex_list(vertex_set)
        _emit(format_homogeneous(is_k_homogeneous(G, H, k, subset_bound), k, H), None)


@app.command()
def member(
    manifest: Annotated[str, typer.Option("--manifest", help="Manifest declaring the requirement")],
    req: Annotated[str, typer.Option("--req", help="Requirement name")],
    source: Annotated[str, typer.Option("--source", help="graph:NAME, biclique:0,1/2,3 or tail:x/U")],
    tau: Annotated[str, typer.Option("--tau", help="String as a comma list")],
    fbound: Annotated[Optional[int], typer.Option("--fbound", help="Largest |F| searched")] = None,
):
    """Decide membership of a string in a requirement set and print the witness pairs."""
    with domain_errors():
        setup = load_setup(manifest)
        K = setup.registry.get(req)
        src = _pair_source(setup, source)
        string = lookup_string(K.bound, tau)
        F_bound = setup.search_bounds.f_bound if fbound is None else fbound
        _emit(format_member(req, string, find_witness(K, src, string, F_bound)), None)


@app.command()
def ground(
    manifest: Annotated[str, typer.Option("--manifest", help="Run manifest")],
    stages: Annotated[Optional[int], typer.Option("--stages", help="Number of stages")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Seed named in the report")] = None,
    out_dir: Annotated[str, typer.Option("--out-dir", help="Directory for graph.out, log.out, report.out")] = ".",
):
    """Run the ground construction and write the graph, edge log and report."""
    with domain_errors():
        setup = load_setup(manifest)
        strategies = setup.build_strategies()
        G, report = run_ground(strategies, stages or setup.manifest.stages, setup.ground_bounds)
        files = format_ground_files(G, report, setup.manifest.seed if seed is None else seed)
        os.makedirs(out_dir, exist_ok=True)
        for name, text in files:
            with open(os.path.join(out_dir, name), 'w', encoding='utf-8') as f:
                f.write(text)
        typer.echo(files[-1][1], nl=False)


@app.command("settle")
def settle_command(
    req: Annotated[str, typer.Option("--req", help="Requirement name, or TRUE / FALSE")],
    cond: Annotated[str, typer.Option("--cond", help="Condition file")],
    graph: Annotated[Optional[str], typer.Option("--graph", help="Graph file or manifest graph name")] = None,
    bounds: Annotated[Optional[str], typer.Option("--bounds", help="x=..,a=..,y=..,f=..,depth=..,U=..")] = None,
    manifest: Annotated[Optional[str], typer.Option("--manifest", help="Manifest declaring requirements")] = None,
    out: Annotated[Optional[str], typer.Option("--out", help="Write the certificate here")] = None,
):
    """Settle one requirement on a condition and print a re-checkable certificate."""
    with domain_errors():
        setup = load_setup(manifest) if manifest is not None else None
        reader = setup.reader if setup is not None else FormatReader()
        c = reader.parse_condition(reader.read_file(cond))
        if req in ("TRUE", "FALSE"):
            K = constant_relation(req == "TRUE", c.bound)
        elif setup is None:
            raise FormatError(f"requirement {req} needs --manifest")
        else:
            K = setup.registry.get(req)
        if K.bound != c.bound:
            raise OrderMismatch(f"{K.descriptor} is over {K.bound}, the condition over {c.bound}")
        if setup is not None and graph in setup.graphs:
            G = setup.graphs[graph]
        elif graph is not None:
            G = reader.parse_graph(reader.read_file(graph))
        else:
            G = setup.generic_graph() if setup is not None else Graph.from_edges([])
        if bounds is not None:
            search_bounds = SearchBounds.parse(bounds)
        else:
            search_bounds = setup.search_bounds if setup is not None else SearchBounds()
        search_bounds = search_bounds.model_copy(
            update={"depth": LabSettings.from_env().clamp_depth(search_bounds.depth)})
        new_c, outcome = settle(K, c, G, search_bounds)
        verified = None
        if not isinstance(outcome, BoundExhausted):
            verified = verify_settled(K, G, new_c, outcome, search_bounds)
        _emit(format_settle(c.bound, req, new_c, outcome, verified), out)


@app.command()
def generic(
    manifest: Annotated[str, typer.Option("--manifest", help="Run manifest")],
    steps: Annotated[Optional[int], typer.Option("--steps", help="Number of steps")] = None,
    out: Annotated[Optional[str], typer.Option("--out", help="Write the trace here")] = None,
):
    """Build a finite generic stem settling the manifest's roster in order."""
    with domain_errors():
        setup = load_setup(manifest)
        bounds = setup.search_bounds.model_copy(
            update={"depth": LabSettings.from_env().clamp_depth(setup.search_bounds.depth)})
        count = setup.manifest.steps if steps is None else steps
        stem, trace = build_generic(setup.table, setup.roster_relations(), setup.generic_graph(), count,
                                    bounds, h=setup.order)
        scans = scan_trace(trace, stem, setup.functionals)
        _emit(format_generic(trace, stem, is_dnc(stem, setup.table), setup.manifest.seed, scans), out)


@app.command()
def lemmas(
    suites: Annotated[str, typer.Option("--suites", help="Comma list of suites")] = "concatenation,additivity,closure",
    trials: Annotated[int, typer.Option("--trials", help="Trials per suite")] = 1000,
    seed: Annotated[int, typer.Option("--seed", help="Run seed")] = 0,
    workers: Annotated[int, typer.Option("--workers", help="Threads running trials")] = 1,
    out: Annotated[Optional[str], typer.Option("--out", help="Write the report here")] = None,
):
    """Run the randomized lemma suites and report violations."""
    with domain_errors():
        harness = LemmaHarness(workers=workers)

        def progress(update: HarnessProgress):
            if update.is_complete:
                logger.debug("suite %s complete: %d violations", update.suite, update.violations)

        names = [name.strip() for name in suites.split(",") if name.strip()]
        reports = harness.run(names, trials, seed, progress_callback=progress)
        _emit(format_lemmas(reports, seed), out)
        total = sum(report.violations for report in reports)
        if total:
            raise EngineBug(f"{total} lemma violations")


def run_command(argv: List[str]) -> int:
    """Run one subcommand and return its exit code"""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=list(argv), prog_name="forcing-lab", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0
