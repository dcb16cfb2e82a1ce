"""
Configuration models for search bounds and lab-wide settings

Bounds blocks are written as comma separated key=value lists, e.g.

    x=4,a=3,y=8,f=3,depth=4,U=32
"""

import os
from typing import Dict

from pydantic import BaseModel, Field, ValidationError, model_validator

from core.errors import FormatError

DEPTH_CAP_VARIABLE = "FORCING_LAB_DEPTH_CAP"
DEFAULT_DEPTH_CAP = 6

SEARCH_KEYS = {"x": "x_max", "a": "a_size", "y": "y_max", "f": "f_bound", "depth": "depth",
               "U": "universe", "budget": "member_budget"}
GROUND_KEYS = {"a": "a_size", "window": "vertex_window", "f": "f_bound", "depth": "depth"}


def _parse_pairs(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise FormatError(f"bounds entry '{chunk}' is not key=value")
        key, value = chunk.split("=", 1)
        values[key.strip()] = value.strip()
    return values


class SearchBounds(BaseModel):
    """Quantifier bounds for essentialness and settling"""
    x_max: int = Field(default=2, ge=0, description="largest x tried by the essentialness scan")
    a_size: int = Field(default=2, ge=1, description="largest |A0| and |A1|")
    y_max: int = Field(default=4, ge=0, description="largest y tried against each A0")
    f_bound: int = Field(default=2, ge=0, description="largest |F| searched in member")
    depth: int = Field(default=4, ge=0, description="search height above the current stem")
    universe: int = Field(default=10, ge=1, description="tails (x, +inf) are cut at U")
    member_budget: int = Field(default=20000, ge=1, description="largest materialized requirement set")

    @model_validator(mode='after')
    def validate_universe(self):
        """Tails must be nonempty for every x and y the scans try"""
        if self.universe <= self.x_max or self.universe <= self.y_max:
            raise ValueError(f"universe bound {self.universe} must exceed x={self.x_max} and y={self.y_max}")
        return self

    @classmethod
    def parse(cls, text: str) -> 'SearchBounds':
        values = {}
        for key, value in _parse_pairs(text).items():
            if key not in SEARCH_KEYS:
                raise FormatError(f"unknown bounds key '{key}'")
            values[SEARCH_KEYS[key]] = value
        try:
            return cls(**values)
        except ValidationError as e:
            raise FormatError(f"invalid bounds '{text}': {e.errors()[0]['msg']}")

    def render(self) -> str:
        return (f"x={self.x_max},a={self.a_size},y={self.y_max},f={self.f_bound},"
                f"depth={self.depth},U={self.universe}")


class GroundBounds(BaseModel):
    """Search limits of the density strategies in the ground construction"""
    a_size: int = Field(default=2, ge=1)
    vertex_window: int = Field(default=8, ge=2, description="A0 and A1 are drawn below this vertex")
    f_bound: int = Field(default=2, ge=0)
    depth: int = Field(default=4, ge=0)

    @classmethod
    def parse(cls, text: str) -> 'GroundBounds':
        values = {}
        for key, value in _parse_pairs(text).items():
            if key not in GROUND_KEYS:
                raise FormatError(f"unknown ground bounds key '{key}'")
            values[GROUND_KEYS[key]] = value
        try:
            return cls(**values)
        except ValidationError as e:
            raise FormatError(f"invalid ground bounds '{text}': {e.errors()[0]['msg']}")

    def render(self) -> str:
        return f"a={self.a_size},window={self.vertex_window},f={self.f_bound},depth={self.depth}"


class LabSettings(BaseModel):
    """Process-wide settings taken from the environment"""
    depth_cap: int = Field(default=DEFAULT_DEPTH_CAP, ge=0)

    @classmethod
    def from_env(cls) -> 'LabSettings':
        raw = os.environ.get(DEPTH_CAP_VARIABLE)
        if raw is None or not raw.strip():
            return cls()
        try:
            return cls(depth_cap=int(raw))
        except (ValueError, ValidationError):
            raise FormatError(f"{DEPTH_CAP_VARIABLE} must be a non-negative integer, got '{raw}'")

    def clamp_depth(self, depth: int) -> int:
        return min(depth, self.depth_cap)
