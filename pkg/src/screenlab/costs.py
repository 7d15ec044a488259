"""Illustrative screening cost functions (natural logarithms throughout)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .distributions import DistributionError

LOG_BASE = "e"


@dataclass(frozen=True)
class CostSpec:
    """Accuracy indices per stage, stage capacities, and their product."""

    alphas: tuple
    stage_capacities: tuple
    overall: float

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        caps = tuple(float(q) for q in self.stage_capacities)
        if not alphas or len(alphas) != len(caps):
            raise DistributionError("alphas and stage_capacities must be nonempty and of equal length")
        if alphas[0] <= 0 or any(b < a for a, b in zip(alphas, alphas[1:])):
            raise DistributionError("alphas must be positive and nondecreasing")
        if any(not 0.0 < q <= 1.0 for q in caps):
            raise DistributionError("stage capacities must lie in (0, 1]")
        if not 0.0 < self.overall <= 1.0:
            raise DistributionError("overall capacity must lie in (0, 1]")
        if abs(math.prod(caps) - self.overall) > 1e-9:
            raise DistributionError(f"stage capacities multiply to {math.prod(caps)!r}, not {self.overall!r}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "stage_capacities", caps)

    @classmethod
    def from_json(cls, obj: dict) -> "CostSpec":
        extra = set(obj) - {"alphas", "stage_capacities", "overall"}
        if extra:
            raise DistributionError(f"unknown fields: {sorted(extra)}")
        caps = obj["stage_capacities"]
        return cls(tuple(obj["alphas"]), tuple(caps), float(obj.get("overall", math.prod(caps))))


def cost_accuracy(spec: CostSpec) -> float:
    """sum_i alpha_i * log(p_0 * ... * p_{i-1} / p) with p_0 = 1.

    Stage i pays in proportion to its accuracy index and to the mass it
    inspects relative to the final intake.

    >>> round(cost_accuracy(CostSpec((1, 2), (0.1, 0.5), 0.05)), 5)
    4.38203
    """
    total = 0.0
    inspected = 1.0
    for alpha, q in zip(spec.alphas, spec.stage_capacities):
        total += alpha * math.log(inspected / spec.overall)
        inspected *= q
    return total


def cost_capacity(stage_capacities: Sequence[float]) -> float:
    """-sum_i log(p_i); depends only on the product of the capacities."""
    caps = [float(q) for q in stage_capacities]
    if not caps or any(not 0.0 < q <= 1.0 for q in caps):
        raise DistributionError("stage capacities must lie in (0, 1]")
    return -math.fsum(math.log(q) for q in caps)
