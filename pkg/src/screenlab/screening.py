"""Multi-stage screening: conditional propagation, threshold solvers, benchmarks.

After stages with thresholds t_1..t_k the surviving impact density is

    f_V(x) * prod_i Pr(N_i >= t_i - x) / prod_i p_i,

so a posterior is carried around in that factorized form and only
materialized onto a grid (:func:`posterior_to_distribution`) when a plain
:class:`BoundedDistribution` is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import (
    BoundedDistribution,
    DistributionError,
    NoiseSpec,
    as_noise,
    quantile_upper,
)
from .quadrature import bisect_decreasing, simpson_rule

CAPACITY_TOL = 1e-6
SOLVER_TOL = 1e-8
DRIFT_ERROR = 1e-4

STRATEGY_KINDS = ("fixed_threshold", "fixed_capacity", "explicit")


class ScreeningError(RuntimeError):
    """Numerical failure inside the screening engine."""


class ZeroCapacity(ScreeningError):
    """A stage threshold leaves nothing to condition on."""

    def __init__(self, message: str, stage: int | None = None):
        super().__init__(message if stage is None else f"stage {stage}: {message}")
        self.stage = stage


class NormalizationDrift(ScreeningError):
    """Materialized posterior density does not integrate to one on the grid."""


@dataclass(frozen=True, eq=False)
class ScreeningProblem:
    impact: BoundedDistribution
    noises: tuple
    capacity: float

    def __post_init__(self):
        noises = tuple(as_noise(n) for n in self.noises)
        if len(noises) < 1:
            raise DistributionError("a screening problem needs at least one stage")
        if not 0.0 < self.capacity < 1.0:
            raise DistributionError(f"capacity must lie in (0, 1), got {self.capacity}")
        object.__setattr__(self, "noises", noises)

    @property
    def stages(self) -> int:
        return len(self.noises)

    @property
    def iid(self) -> bool:
        first = self.noises[0]
        return all(first.same_law(n) for n in self.noises[1:])


@dataclass(frozen=True)
class ThresholdStrategy:
    thresholds: tuple
    stage_capacities: tuple
    kind: str = "explicit"
    requested_capacity: float | None = None
    noop_stages: tuple = ()

    @property
    def overall_capacity(self) -> float:
        return math.prod(self.stage_capacities)

    @property
    def meets_capacity(self) -> bool:
        if self.requested_capacity is None:
            return True
        return abs(self.overall_capacity - self.requested_capacity) <= CAPACITY_TOL

    def to_json(self) -> dict:
        out = {
            "thresholds": list(self.thresholds),
            "stage_capacities": list(self.stage_capacities),
            "overall_capacity": self.overall_capacity,
            "kind": self.kind,
        }
        if self.noop_stages:
            out["noop_stages"] = list(self.noop_stages)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ThresholdStrategy":
        return cls(tuple(obj["thresholds"]), tuple(obj["stage_capacities"]), obj.get("kind", "explicit"),
                   noop_stages=tuple(obj.get("noop_stages", ())))


@dataclass(frozen=True, eq=False)
class FactorizedPosterior:
    """Base density times a product of noise-survivor factors.

    ``normalization`` is the product of the realized stage capacities so far,
    i.e. the mass of the unnormalized product.
    """

    base: BoundedDistribution
    factors: tuple = ()
    normalization: float = 1.0
    stage_capacities: tuple = ()
    support_lo_effective: float = field(default=None)

    def __post_init__(self):
        if self.support_lo_effective is None:
            lo = self.base.support_lo
            for noise, t in self.factors:
                lo = max(lo, t - noise.hi)
            object.__setattr__(self, "support_lo_effective", lo)

    @classmethod
    def prior(cls, base: BoundedDistribution) -> "FactorizedPosterior":
        return cls(base)

    @property
    def support_hi(self) -> float:
        return self.base.support_hi

    @property
    def thresholds(self) -> tuple:
        return tuple(t for _, t in self.factors)

    def breakpoints(self, extra=()) -> np.ndarray:
        parts = [self.base.knots_x]
        parts += [t - noise.knots_x for noise, t in self.factors]
        parts.append(np.asarray(extra, dtype=float).ravel())
        return np.concatenate(parts)

    def unnormalized(self, x, extra_factors=()):
        x = np.asarray(x, dtype=float)
        out = self.base.pdf(x)
        for noise, t in (*self.factors, *extra_factors):
            out *= noise.survivor(t - x)
        return out

    def density(self, x):
        return self.unnormalized(x) / self.normalization

    def rule(self, extra_breaks=()) -> tuple[np.ndarray, np.ndarray]:
        return simpson_rule(self.support_lo_effective, self.support_hi,
                            self.breakpoints(extra_breaks), self.base.grid_resolution)

    def stage_capacity(self, noise: NoiseSpec, t: float) -> float:
        """Pr(current + N >= t) under this posterior, by quadrature."""
        noise = as_noise(noise)
        if t <= self.support_lo_effective + noise.lo:
            return 1.0
        if t >= self.support_hi + noise.hi:
            return 0.0
        nodes, weights = self.rule(t - noise.knots_x)
        mass = np.dot(weights, self.unnormalized(nodes, ((noise, t),)))
        return float(min(1.0, max(0.0, mass / self.normalization)))

    def mean(self) -> float:
        nodes, weights = self.rule()
        return float(np.dot(weights, nodes * self.density(nodes)))

    def total_mass(self) -> float:
        nodes, weights = self.rule()
        return float(np.dot(weights, self.density(nodes)))


def apply_stage(post: FactorizedPosterior, noise, t: float, stage: int | None = None) -> FactorizedPosterior:
    """Condition ``post`` on surviving one more noisy threshold."""
    noise = as_noise(noise)
    if t >= post.support_hi + noise.hi:
        raise ZeroCapacity(f"threshold {t!r} is at or above the largest attainable score "
                           f"{post.support_hi + noise.hi!r}", stage)
    p_i = post.stage_capacity(noise, t)
    if not p_i > 0.0:
        raise ZeroCapacity(f"threshold {t!r} accepts no mass", stage)
    return FactorizedPosterior(
        post.base,
        post.factors + ((noise, float(t)),),
        post.normalization * p_i,
        post.stage_capacities + (p_i,),
        max(post.support_lo_effective, t - noise.hi),
    )


def solve_stage_threshold(post: FactorizedPosterior, noise, stage_capacity: float) -> float:
    """Threshold ``t`` with Pr(current + N >= t) = ``stage_capacity``."""
    if not 0.0 < stage_capacity < 1.0:
        raise DistributionError(f"stage capacity must lie in (0, 1), got {stage_capacity}")
    noise = as_noise(noise)
    lo = post.support_lo_effective + noise.lo
    hi = post.support_hi + noise.hi
    t = bisect_decreasing(lambda s: post.stage_capacity(noise, s), stage_capacity, lo, hi)
    realized = post.stage_capacity(noise, t)
    if abs(realized - stage_capacity) >= SOLVER_TOL:
        raise ScreeningError(f"threshold bisection stalled: wanted {stage_capacity}, got {realized}")
    return t


def run_strategy(sp: ScreeningProblem, thresholds: Sequence[float],
                 kind: str = "explicit") -> tuple[FactorizedPosterior, ThresholdStrategy]:
    if len(thresholds) != sp.stages:
        raise DistributionError(f"expected {sp.stages} thresholds, got {len(thresholds)}")
    post = FactorizedPosterior.prior(sp.impact)
    noop = []
    for i, (noise, t) in enumerate(zip(sp.noises, thresholds), start=1):
        if t <= post.support_lo_effective + noise.lo:
            noop.append(i)
        post = apply_stage(post, noise, float(t), stage=i)
    strategy = ThresholdStrategy(tuple(float(t) for t in thresholds), post.stage_capacities, kind,
                                 requested_capacity=sp.capacity, noop_stages=tuple(noop))
    return post, strategy


def fixed_threshold_capacity(sp: ScreeningProblem, t: float) -> float:
    """Overall capacity when every stage uses the same threshold ``t``."""
    post = FactorizedPosterior(sp.impact, tuple((n, t) for n in sp.noises))
    nodes, weights = post.rule()
    return float(np.dot(weights, post.unnormalized(nodes)))


def solve_fixed_threshold(sp: ScreeningProblem) -> ThresholdStrategy:
    """Common threshold for all stages meeting the overall capacity (i.i.d. noises only)."""
    if not sp.iid:
        raise DistributionError("the fixed-threshold strategy requires identically distributed noises")
    noise = sp.noises[0]
    lo = sp.impact.support_lo + noise.lo
    hi = sp.impact.support_hi + noise.hi
    t = bisect_decreasing(lambda s: fixed_threshold_capacity(sp, s), sp.capacity, lo, hi)
    if abs(fixed_threshold_capacity(sp, t) - sp.capacity) >= SOLVER_TOL:
        raise ScreeningError("fixed-threshold bisection did not reach the requested capacity")
    _, strategy = run_strategy(sp, [t] * sp.stages, kind="fixed_threshold")
    return strategy


def solve_stage_capacities(sp: ScreeningProblem, stage_capacities: Sequence[float],
                           kind: str = "explicit") -> tuple[FactorizedPosterior, ThresholdStrategy]:
    """Solve thresholds stage by stage for the given per-stage capacities."""
    if len(stage_capacities) != sp.stages:
        raise DistributionError(f"expected {sp.stages} stage capacities, got {len(stage_capacities)}")
    post = FactorizedPosterior.prior(sp.impact)
    thresholds = []
    noop = []
    for i, (noise, q) in enumerate(zip(sp.noises, stage_capacities), start=1):
        if q == 1.0:
            t = post.support_lo_effective + noise.lo
            noop.append(i)
        else:
            try:
                t = solve_stage_threshold(post, noise, q)
            except ScreeningError as exc:
                raise ScreeningError(f"stage {i}: {exc}") from exc
        post = apply_stage(post, noise, t, stage=i)
        thresholds.append(t)
    return post, ThresholdStrategy(tuple(thresholds), post.stage_capacities, kind,
                                   requested_capacity=sp.capacity, noop_stages=tuple(noop))


def solve_fixed_capacity(sp: ScreeningProblem) -> ThresholdStrategy:
    """Per-stage capacity p**(1/k) at every stage."""
    q = sp.capacity ** (1.0 / sp.stages)
    _, strategy = solve_stage_capacities(sp, [q] * sp.stages, kind="fixed_capacity")
    return strategy


def solve_strategy(sp: ScreeningProblem, kind: str) -> tuple[FactorizedPosterior, ThresholdStrategy]:
    if kind == "fixed_threshold":
        strategy = solve_fixed_threshold(sp)
        post, _ = run_strategy(sp, strategy.thresholds, kind)
        return post, strategy
    if kind == "fixed_capacity":
        q = sp.capacity ** (1.0 / sp.stages)
        return solve_stage_capacities(sp, [q] * sp.stages, kind="fixed_capacity")
    raise DistributionError(f"unknown stationary strategy kind {kind!r}")


def limit_threshold(V: BoundedDistribution, noise, p: float) -> float:
    """Constant threshold v_p + N_lo that deep increasing strategies settle on."""
    return quantile_upper(V, p) + as_noise(noise).lo


def run_limit_truncation(V: BoundedDistribution, noise, p: float,
                         depth: int) -> tuple[FactorizedPosterior, ThresholdStrategy]:
    """Depth-``depth`` run of the constant limit threshold."""
    noise = as_noise(noise)
    t = limit_threshold(V, noise, p)
    sp = ScreeningProblem(V, (noise,) * depth, p)
    return run_strategy(sp, [t] * depth, kind="explicit")


def perfect_screening_target(V: BoundedDistribution, p: float) -> BoundedDistribution:
    """Law of V given V >= v_p: density f_V / p on [v_p, V_hi]."""
    if not 0.0 < p < 1.0:
        raise DistributionError(f"p must lie in (0, 1), got {p}")
    vp = quantile_upper(V, p)
    inner = V.knots_x > vp
    x = np.concatenate(([vp], V.knots_x[inner]))
    f = V.pdf(x)
    mass = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))
    return BoundedDistribution(x, f / mass, V.grid_resolution, renormalization=1.0 / mass)


def posterior_to_distribution(post: FactorizedPosterior) -> BoundedDistribution:
    """Sample the normalized posterior density on its quadrature grid."""
    if not post.normalization > 0:
        raise NormalizationDrift("posterior has no mass")
    if not post.factors:
        return post.base
    nodes, weights = post.rule()
    x = np.unique(nodes)
    f = post.density(x)
    positive = np.flatnonzero(f > 0)
    if positive.size == 0:
        raise NormalizationDrift("posterior density vanishes on the whole grid")
    # underflowed tails of long factor products are treated as outside the support
    lo_i = max(positive[0] - 1, 0)
    hi_i = min(positive[-1] + 1, x.size - 1)
    x, f = x[lo_i:hi_i + 1], f[lo_i:hi_i + 1]
    if x.size > 2:
        f[1:-1] = np.maximum(f[1:-1], np.finfo(float).tiny)
    mass = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))
    if abs(mass - 1.0) >= DRIFT_ERROR:
        raise NormalizationDrift(f"sampled posterior integrates to {mass:.8g}; raise grid_resolution")
    return BoundedDistribution(x, f / mass, post.base.grid_resolution, renormalization=1.0 / mass)
