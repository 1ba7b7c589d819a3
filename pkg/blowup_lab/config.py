"""
blowup-lab — Job Configuration
Flat key=value job files with dotted section prefixes:

    command=cdf
    model.c1=1.0
    g.kind=exponential
    g.scale=1.0
    g.rate=1.0
    r=0.5,1,2            # or r_from / r_to / r_steps

A dotted key with an empty value keeps its default.
Sections validate through pydantic models and convert into the library's
dataclasses. Every parse or validation failure surfaces as ConfigError
carrying the offending line and field.
"""
import math
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .barrier_crossing import Orientation
from .blowup_cdf import InitialConditionSpec, InitialKind, ModelParams, QuadratureConfig
from .errors import BlowupLabError, ConfigError


# ─── Enums ────────────────────────────────────────────────────────────────────

class Command(str, Enum):
    CROSSING = "crossing"
    CDF      = "cdf"
    SIMULATE = "simulate"
    VALIDATE = "validate"


class OutputFormat(str, Enum):
    CSV   = "csv"
    JSONL = "jsonl"


GRID_KEYS = ("r", "r_from", "r_to", "r_steps")


# ─── Sections ─────────────────────────────────────────────────────────────────

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Section):
    c1: float = Field(default=1.0, gt=0)
    c2: float = Field(default=1.0, gt=0)
    p:  float = Field(default=2.0, gt=1)
    T:  float = Field(default=1.0, gt=0)

    def to_params(self) -> ModelParams:
        return ModelParams(self.c1, self.c2, self.p, self.T)


class GSection(_Section):
    kind:   InitialKind     = InitialKind.CONSTANT
    l0:     Optional[float] = 1.0
    scale:  Optional[float] = None
    rate:   Optional[float] = None
    slope:  Optional[float] = None
    offset: Optional[float] = None
    floor:  Optional[float] = None
    knots:  Optional[Tuple[Tuple[float, float], ...]] = None

    @field_validator("knots", mode="before")
    @classmethod
    def parse_knots(cls, v):
        if not isinstance(v, str):
            return v
        pairs = []
        for item in filter(None, (s.strip() for s in v.split(","))):
            x, sep, y = item.partition(":")
            if not sep:
                raise ValueError(f"knot {item!r} is not of the form x:y")
            pairs.append((float(x), float(y)))
        return tuple(pairs)

    @model_validator(mode="after")
    def check_spec(self):
        try:
            self.to_spec()
        except BlowupLabError as e:
            raise ValueError(str(e)) from e
        return self

    def to_spec(self) -> InitialConditionSpec:
        if self.kind is InitialKind.CONSTANT:
            return InitialConditionSpec.constant(self.l0)
        if self.kind is InitialKind.EXPONENTIAL:
            return InitialConditionSpec.exponential(self.scale, self.rate)
        if self.kind is InitialKind.AFFINE_CLAMPED:
            return InitialConditionSpec.affine_clamped(self.slope, self.offset, self.floor)
        return InitialConditionSpec.table(self.knots or ())


class QuadSection(_Section):
    truncation_sigmas: float = Field(default=8.0, ge=4)
    tol:               float = Field(default=1e-9, gt=0)
    max_refinements:   int   = Field(default=20, ge=0)

    def to_config(self) -> QuadratureConfig:
        return QuadratureConfig(self.truncation_sigmas, self.tol, self.max_refinements)


class McSection(_Section):
    paths:             int   = Field(default=100_000, ge=100)
    dt:                float = Field(default=1e-3, gt=0)
    seed:              int   = Field(default=0, ge=0)
    bridge_correction: bool  = True


class OutputSection(_Section):
    path:   Optional[str] = None
    format: OutputFormat  = OutputFormat.CSV


class CrossingSection(_Section):
    """Explicit barrier inputs for the crossing command; T unset means free Brownian motion."""
    orientation: Orientation     = Orientation.PLUS
    a:           float           = 1.0
    b:           float           = 1.0
    r:           float           = Field(default=math.inf, gt=0)
    T:           Optional[float] = Field(default=None, gt=0)
    x:           float           = 0.0

    @field_validator("r", "T", mode="before")
    @classmethod
    def parse_float(cls, v):
        return float(v) if isinstance(v, str) else v


class JobConfig(_Section):
    command:  Command         = Command.CDF
    model:    ModelSection    = ModelSection()
    g:        GSection        = GSection()
    quad:     QuadSection     = QuadSection()
    mc:       McSection       = McSection()
    output:   OutputSection   = OutputSection()
    crossing: CrossingSection = CrossingSection()
    r_grid:   Tuple[float, ...] = (0.5, 1.0, 2.0)

    @field_validator("r_grid")
    @classmethod
    def check_grid(cls, v):
        if not v:
            raise ValueError("r grid is empty")
        if any(not math.isfinite(r) or r < 0.0 for r in v):
            raise ValueError("r values must be finite and >= 0")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("r values must be strictly increasing")
        return v


SECTIONS: Dict[str, type] = {
    "model":    ModelSection,
    "g":        GSection,
    "quad":     QuadSection,
    "mc":       McSection,
    "output":   OutputSection,
    "crossing": CrossingSection,
}


def known_keys() -> List[str]:
    keys = ["command", *GRID_KEYS]
    for section, model in SECTIONS.items():
        keys.extend(f"{section}.{name}" for name in model.model_fields)
    return keys


# ─── Parsing ──────────────────────────────────────────────────────────────────

def parse_config_text(text: str) -> Dict[str, Tuple[str, int]]:
    """key -> (raw value, 1-based line). Later duplicates win."""
    allowed = set(known_keys())
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", line=lineno)
        if key not in allowed:
            raise ConfigError("unknown key", line=lineno, field=key)
        entries[key] = (value, lineno)
    return entries


def _grid_from(entries: Mapping[str, Tuple[str, Optional[int]]]) -> Optional[Tuple[float, ...]]:
    def number(key, kind=float):
        value, line = entries[key]
        try:
            return kind(value)
        except ValueError:
            raise ConfigError(f"not a valid {kind.__name__}: {value!r}", line=line, field=key) from None

    if "r" in entries:
        value, line = entries["r"]
        try:
            return tuple(float(s) for s in value.split(",") if s.strip())
        except ValueError:
            raise ConfigError(f"not a list of numbers: {value!r}", line=line, field="r") from None
    ranged = [k for k in GRID_KEYS[1:] if k in entries]
    if not ranged:
        return None
    if len(ranged) != 3:
        missing = sorted(set(GRID_KEYS[1:]) - set(ranged))
        raise ConfigError(f"range grid needs {', '.join(missing)} as well",
                          line=entries[ranged[0]][1], field=ranged[0])
    steps = number("r_steps", int)
    if steps < 2:
        raise ConfigError("r_steps must be >= 2", line=entries["r_steps"][1], field="r_steps")
    return tuple(float(r) for r in np.linspace(number("r_from"), number("r_to"), steps))


def build_job(entries: Mapping[str, Tuple[str, Optional[int]]]) -> JobConfig:
    data: Dict[str, object] = {}
    for key, (value, _) in entries.items():
        if key in GRID_KEYS:
            continue
        if "." in key:
            if value == "":
                continue  # empty value: keep the default
            section, name = key.split(".", 1)
            data.setdefault(section, {})[name] = value
        else:
            data[key] = value
    grid = _grid_from(entries)
    if grid is not None:
        data["r_grid"] = grid

    try:
        return JobConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(first["msg"], line=_line_of(entries, field), field=field) from None


def _line_of(entries: Mapping[str, Tuple[str, Optional[int]]], field: Optional[str]) -> Optional[int]:
    if not field:
        return None
    if field.startswith("r_grid"):
        candidates = [k for k in GRID_KEYS if k in entries]
    else:
        parts = field.split(".")
        prefixes = (".".join(parts[:n]) for n in range(len(parts), 0, -1))
        exact = next((k for k in prefixes if k in entries), None)
        candidates = [exact] if exact else [k for k in entries if k.startswith(field + ".")]
    lines = [entries[k][1] for k in candidates if entries[k][1] is not None]
    return min(lines) if lines else None


def merge_overrides(entries: Dict[str, Tuple[str, Optional[int]]],
                    overrides: Mapping[str, Optional[str]]) -> Dict[str, Tuple[str, Optional[int]]]:
    """Flag values replace file values; a grid given by flags replaces the file's grid."""
    merged = dict(entries)
    given = {k: v for k, v in overrides.items() if v is not None}
    if any(k in GRID_KEYS for k in given):
        for k in GRID_KEYS:
            merged.pop(k, None)
    for key, value in given.items():
        merged[key] = (str(value), None)
    return merged


def load_job(path: Optional[str] = None, overrides: Optional[Mapping[str, Optional[str]]] = None) -> JobConfig:
    entries: Dict[str, Tuple[str, Optional[int]]] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path!r}: {e.strerror}") from None
        entries = dict(parse_config_text(text))
    return build_job(merge_overrides(entries, overrides or {}))


# ─── Dumping ──────────────────────────────────────────────────────────────────

def _format_value(value) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(f"{x!r}:{y!r}" for x, y in value)
    return str(value)


def dump_config(job: JobConfig) -> str:
    """Canonical sorted key=value text that reparses to an equal JobConfig."""
    lines = [f"command={job.command.value}", "r=" + ",".join(repr(float(r)) for r in job.r_grid)]
    for section in SECTIONS:
        for name, value in getattr(job, section).model_dump().items():
            if value is not None:
                lines.append(f"{section}.{name}={_format_value(value)}")
    return "\n".join(sorted(lines)) + "\n"
