"""Strict JSON experiment configs."""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path

from .distributions import DEFAULT_GRID, BoundedDistribution, DistributionError, NoiseSpec, from_literal
from .montecarlo import MCConfig
from .screening import CAPACITY_TOL, STRATEGY_KINDS, ScreeningProblem

GRID_ENV = "SCREENLAB_GRID"

TOP_FIELDS = {"impact", "noises", "capacity", "strategy", "mc", "output_dir", "grid_resolution", "ks"}
REQUIRED = {"impact", "noises", "capacity", "strategy", "output_dir"}


class ConfigError(ValueError):
    """Invalid experiment config; message names the field and, when known, the line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None, source: str | None = None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.field = field
        self.line = line


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    thresholds: tuple | None = None
    stage_capacities: tuple | None = None


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    impact: BoundedDistribution
    noises: tuple
    capacity: float
    strategy: StrategySpec
    output_dir: Path
    mc: MCConfig | None = None
    grid_resolution: int = DEFAULT_GRID
    ks: tuple | None = None
    raw: dict | None = None

    def problem(self) -> ScreeningProblem:
        return ScreeningProblem(self.impact, self.noises, self.capacity)


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def grid_override(default: int | None) -> int:
    env = os.environ.get(GRID_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{GRID_ENV} must be an integer, got {env!r}") from None
        if value < 2:
            raise ConfigError(f"{GRID_ENV} must be >= 2")
        return value
    return DEFAULT_GRID if default is None else default


def parse_config(obj: dict, text: str | None = None, source: str | None = None) -> ExperimentConfig:
    def fail(msg, field, key=None):
        raise ConfigError(msg, field, _line_of(text, key or field.split(".")[-1].split("[")[0]), source)

    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object", source=source)
    for key in obj:
        if key not in TOP_FIELDS:
            fail("unknown field", key)
    for key in sorted(REQUIRED - set(obj)):
        raise ConfigError("missing required field", key, source=source)

    grid = obj.get("grid_resolution")
    if grid is not None and (not isinstance(grid, int) or isinstance(grid, bool) or grid < 2):
        fail("must be an integer >= 2", "grid_resolution")
    grid = grid_override(grid)

    try:
        impact = from_literal(obj["impact"], grid)
    except (DistributionError, TypeError, ValueError) as exc:
        fail(str(exc), "impact")
    if not isinstance(obj["noises"], list) or not obj["noises"]:
        fail("must be a nonempty list of distribution literals", "noises")
    noises = []
    for i, lit in enumerate(obj["noises"]):
        try:
            noises.append(NoiseSpec(from_literal(lit, grid)))
        except (DistributionError, TypeError, ValueError) as exc:
            fail(str(exc), f"noises[{i}]", "noises")

    cap = obj["capacity"]
    if isinstance(cap, bool) or not isinstance(cap, (int, float)) or not 0.0 < cap < 1.0:
        fail("capacity must be a number in (0, 1)", "capacity")

    strat = obj["strategy"]
    if not isinstance(strat, dict):
        fail("must be an object", "strategy")
    extra = set(strat) - {"kind", "thresholds", "stage_capacities"}
    if extra:
        fail(f"unknown field(s) {sorted(extra)}", "strategy")
    kind = strat.get("kind")
    if kind not in STRATEGY_KINDS:
        fail(f"kind must be one of {list(STRATEGY_KINDS)}", "strategy.kind", "kind")
    given = [k for k in ("thresholds", "stage_capacities") if k in strat]
    if kind == "explicit" and len(given) != 1:
        fail("explicit strategies need exactly one of 'thresholds' or 'stage_capacities'", "strategy")
    if kind != "explicit" and given:
        fail(f"'{given[0]}' is only allowed for explicit strategies", f"strategy.{given[0]}", given[0])
    thresholds = capacities = None
    for key in given:
        vals = strat[key]
        if not isinstance(vals, list) or len(vals) != len(noises) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            fail(f"must be a list of {len(noises)} numbers (one per noise)", f"strategy.{key}", key)
        if key == "thresholds":
            thresholds = tuple(float(v) for v in vals)
        else:
            if any(not 0.0 < v <= 1.0 for v in vals):
                fail("stage capacities must lie in (0, 1]", "strategy.stage_capacities", key)
            capacities = tuple(float(v) for v in vals)
            if abs(math.prod(capacities) - float(cap)) > CAPACITY_TOL:
                fail(f"stage capacities multiply to {math.prod(capacities):.10g}, not the capacity {cap}",
                     "strategy.stage_capacities", key)

    mc = None
    if obj.get("mc") is not None:
        m = obj["mc"]
        if not isinstance(m, dict) or set(m) - {"samples", "seed"} or "samples" not in m:
            fail("mc must be an object with 'samples' and optional 'seed'", "mc")
        try:
            mc = MCConfig(int(m["samples"]), int(m.get("seed", 0)))
        except (DistributionError, TypeError, ValueError) as exc:
            fail(str(exc), "mc")

    out = obj["output_dir"]
    if not isinstance(out, str) or not out:
        fail("must be a nonempty path string", "output_dir")

    ks = obj.get("ks")
    if ks is not None:
        if not isinstance(ks, list) or not ks or not all(isinstance(k, int) and k >= 1 for k in ks):
            fail("must be a nonempty list of positive integers", "ks")
        ks = tuple(ks)

    return ExperimentConfig(impact, tuple(noises), float(cap), StrategySpec(kind, thresholds, capacities),
                            Path(out), mc, grid, ks, obj)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno,
                          source=str(path)) from None
    return parse_config(obj, text, str(path))
