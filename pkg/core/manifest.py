"""
Run manifests: one JSON document naming every input of a ground or generic run

Example:

    {
      "order": [8, 8, 32, 32],
      "machine_table": "table.txt",
      "graphs": {"path": "path.txt"},
      "requirements": {"W0": "W m=0 table=w0.txt", "T0": "T base=W1 xi=1 r=2 source=path"},
      "strategies": [
        {"kind": "diag", "name": "R0", "rank": 0, "e": 0, "enumerator": "en0.txt"},
        {"kind": "density", "name": "S0", "rank": 1, "requirement": "W0", "sigma": "", "k": 2}
      ],
      "roster": ["W0", "T0"],
      "generic_graph": "path",
      "bounds": "x=2,a=2,y=4,f=2,depth=4,U=10",
      "seed": 7
    }

File paths are resolved against the manifest's directory.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from core.config import GroundBounds, SearchBounds
from core.dnc import MachineTable, OracleFunctionalTable
from core.errors import FormatError, PreconditionFailed
from core.graphs import Graph
from core.ground_construction import DensityStrategy, DiagStrategy, Strategy
from core.requirements import (ExplicitGraph, RequirementRegistry, RequirementRelation, constant_relation,
                               propagation_requirement, w_requirement)
from core.strings import Order, lookup_string
from core.text_formats import FormatReader

logger = logging.getLogger(__name__)


class StrategySpec(BaseModel):
    """One entry of the ground construction's priority list"""
    kind: Literal["diag", "density"]
    name: str
    rank: int = Field(ge=0)
    e: int = Field(default=0, ge=0)
    enumerator: Optional[str] = None
    requirement: Optional[str] = None
    sigma: str = ""
    k: int = Field(default=1, ge=1)

    @model_validator(mode='after')
    def validate_kind(self):
        if self.kind == "diag" and self.enumerator is None:
            raise ValueError(f"diag strategy {self.name} needs an enumerator file")
        if self.kind == "density" and self.requirement is None:
            raise ValueError(f"density strategy {self.name} needs a requirement name")
        return self


class Manifest(BaseModel):
    order: Union[str, List[int]]
    machine_table: Optional[str] = None
    graphs: Dict[str, str] = Field(default_factory=dict)
    requirements: Dict[str, str] = Field(default_factory=dict)
    strategies: List[StrategySpec] = Field(default_factory=list)
    roster: List[str] = Field(default_factory=list)
    generic_graph: Optional[str] = None
    bounds: str = Field(default_factory=lambda: SearchBounds().render())
    ground_bounds: str = Field(default_factory=lambda: GroundBounds().render())
    stages: int = Field(default=200, ge=1)
    steps: int = Field(default=6, ge=0)
    seed: int

    @classmethod
    def load(cls, path: str) -> 'Manifest':
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise FormatError(f"manifest not found: {path}")
        except json.JSONDecodeError as e:
            raise FormatError(f"manifest {path} is not valid JSON: {e}")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(part) for part in first['loc'])
            raise FormatError(f"manifest {path}: {where}: {first['msg']}")


def _registration_options(line: str) -> Dict[str, str]:
    options = {}
    for token in line.split()[1:]:
        if "=" not in token:
            raise FormatError(f"registration '{line}': expected key=value, got '{token}'")
        key, value = token.split("=", 1)
        options[key] = value
    return options


def _natural(text: str, line: str) -> int:
    if not text.isdigit():
        raise FormatError(f"registration '{line}': '{text}' is not a natural number")
    return int(text)


@dataclass
class LabSetup:
    """A manifest with every referenced file parsed and every relation built"""
    manifest: Manifest
    base_dir: str
    order: Order
    table: MachineTable
    graphs: Dict[str, Graph]
    registry: RequirementRegistry
    search_bounds: SearchBounds
    ground_bounds: GroundBounds
    reader: FormatReader = field(repr=False, default=None)
    functionals: Dict[str, OracleFunctionalTable] = field(repr=False, default_factory=dict)

    def path(self, name: str) -> str:
        return name if os.path.isabs(name) else os.path.join(self.base_dir, name)

    def read(self, name: str) -> str:
        return self.reader.read_file(self.path(name))

    def graph(self, name: str) -> Graph:
        if name not in self.graphs:
            raise PreconditionFailed(f"unknown graph {name}")
        return self.graphs[name]

    def register(self, name: str, line: str) -> RequirementRelation:
        """Build a relation from `W m=0 table=FILE`, `T base=NAME xi=1,0 r=2 source=GRAPH`, `TRUE` or `FALSE`"""
        body = line[4:].strip() if line.startswith("req ") else line.strip()
        kind = body.split()[0] if body else ""
        options = _registration_options(body)
        if kind in ("TRUE", "FALSE"):
            relation = constant_relation(kind == "TRUE", self.order)
        elif kind == "W":
            if "m" not in options or "table" not in options:
                raise FormatError(f"registration '{line}' needs m= and table=")
            functional = self.reader.parse_functional(self.read(options["table"]))
            relation = w_requirement(_natural(options["m"], line), functional)
            self.functionals[relation.descriptor] = functional
        elif kind == "T":
            missing = [key for key in ("base", "xi", "r", "source") if key not in options]
            if missing:
                raise FormatError(f"registration '{line}' is missing {', '.join(missing)}")
            base = self.registry.get(options["base"])
            xi = lookup_string(self.order, options["xi"])
            source = ExplicitGraph(self.graph(options["source"]))
            relation = propagation_requirement(base, xi, _natural(options["r"], line), source,
                                              self.search_bounds.f_bound)
        else:
            raise FormatError(f"unknown requirement kind '{kind}' in '{line}'")
        self.registry.add(name, relation)
        logger.debug("registered %s as %s", name, relation.descriptor)
        return relation

    def build_strategies(self) -> List[Strategy]:
        """Fresh strategy objects; a ground run mutates their status"""
        strategies: List[Strategy] = []
        for spec in self.manifest.strategies:
            if spec.kind == "diag":
                enumerator = self.reader.parse_enumerator(self.read(spec.enumerator))
                strategies.append(DiagStrategy(name=spec.name, rank=spec.rank, e=spec.e, enumerator=enumerator))
            else:
                K = self.registry.get(spec.requirement)
                sigma = lookup_string(K.bound, spec.sigma)
                strategies.append(DensityStrategy(name=spec.name, rank=spec.rank, K=K, sigma=sigma, k=spec.k))
        return strategies

    def roster_relations(self) -> List[RequirementRelation]:
        return [self.registry.get(name) for name in self.manifest.roster]

    def generic_graph(self) -> Graph:
        if self.manifest.generic_graph is None:
            return Graph.from_edges([])
        return self.graph(self.manifest.generic_graph)


def build_setup(manifest: Manifest, base_dir: str) -> LabSetup:
    reader = FormatReader()
    setup = LabSetup(manifest=manifest, base_dir=base_dir, order=None, table=MachineTable(),
                     graphs={}, registry=RequirementRegistry(),
                     search_bounds=SearchBounds.parse(manifest.bounds),
                     ground_bounds=GroundBounds.parse(manifest.ground_bounds), reader=reader)
    if isinstance(manifest.order, str):
        setup.order = reader.parse_order(setup.read(manifest.order))
    else:
        setup.order = Order(tuple(manifest.order))
    reader.order = setup.order
    if manifest.machine_table is not None:
        setup.table = reader.parse_machine_table(setup.read(manifest.machine_table))
    for name, path in manifest.graphs.items():
        setup.graphs[name] = reader.parse_graph(setup.read(path))
    for name, line in manifest.requirements.items():
        setup.register(name, line)
    logger.info("manifest loaded: %d graphs, %d requirements, %d strategies",
                len(setup.graphs), len(setup.registry), len(manifest.strategies))
    return setup


def load_setup(path: str) -> LabSetup:
    manifest = Manifest.load(path)
    return build_setup(manifest, os.path.dirname(os.path.abspath(path)))
