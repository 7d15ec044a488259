"""Comparisons between screening outcomes.

All comparisons work on :class:`BoundedDistribution` values.  Both CDFs are
piecewise quadratic on the union of the two knot sets, so the CDF gap is
quadratic per union cell and its extrema are located exactly: at cell
edges, or where the (linear) density difference vanishes inside a cell.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .distributions import BoundedDistribution, DistributionError, NoiseSpec, as_noise, quantile_upper
from .quadrature import bisect_sign
from .screening import (
    ScreeningProblem,
    perfect_screening_target,
    posterior_to_distribution,
    solve_strategy,
)

DEFAULT_TOL = 1e-6
CROSSING_XTOL = 1e-8
# density differences below this fraction of the peak density count as ties
DENSITY_RESOLUTION = 1e-7


class Verdict(str, Enum):
    A_DOMINATES = "A_dominates"
    B_DOMINATES = "B_dominates"
    CROSSING = "crossing"
    INDISTINGUISHABLE = "indistinguishable"


class Distinctness(str, Enum):
    NOT_DISTINCT = "not_distinct"
    EPS_DISTINCT = "eps_distinct"
    FULLY_EPS_DISTINCT = "fully_eps_distinct"


@dataclass(frozen=True)
class DominanceReport:
    verdict: Verdict
    max_gap_A_over_B: float
    max_gap_B_over_A: float
    cdf_crossings: list = field(default_factory=list)
    density_crossings: list = field(default_factory=list)
    tolerance: float = DEFAULT_TOL

    def to_json(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict.value
        return out


@dataclass(frozen=True)
class ConvergenceCurve:
    stage_counts: list
    distances: list
    strategy_kind: str
    thresholds: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"stage_counts": list(self.stage_counts), "distances": list(self.distances),
                "strategy_kind": self.strategy_kind}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "distance"])
        for k, d in zip(self.stage_counts, self.distances):
            w.writerow([k, f"{d:.12g}"])
        return buf.getvalue()


def union_grid(A: BoundedDistribution, B: BoundedDistribution) -> np.ndarray:
    return np.union1d(A.knots_x, B.knots_x)


def _pdf_limit(D: BoundedDistribution, x: np.ndarray, side: str) -> np.ndarray:
    """One-sided density limit; matters where a density jumps at its support edge."""
    val = np.interp(x, D.knots_x, D.knots_f)
    if side == "right":
        outside = (x < D.support_lo) | (x >= D.support_hi)
    else:
        outside = (x <= D.support_lo) | (x > D.support_hi)
    return np.where(outside, 0.0, val)


def _gap_points(A: BoundedDistribution, B: BoundedDistribution) -> np.ndarray:
    """Union knots plus interior stationary points of F_A - F_B."""
    x = union_grid(A, B)
    left = _pdf_limit(A, x[:-1], "right") - _pdf_limit(B, x[:-1], "right")
    right = _pdf_limit(A, x[1:], "left") - _pdf_limit(B, x[1:], "left")
    inside = left * right < 0
    frac = left[inside] / (left[inside] - right[inside])
    extra = x[:-1][inside] + frac * np.diff(x)[inside]
    return np.concatenate((x, extra))


def cdf_gaps(A: BoundedDistribution, B: BoundedDistribution) -> tuple[float, float]:
    pts = _gap_points(A, B)
    d = A.cdf(pts) - B.cdf(pts)
    return max(0.0, float(d.max())), max(0.0, float(-d.min()))


def kolmogorov_distance(A: BoundedDistribution, B: BoundedDistribution) -> float:
    """sup_v |F_A(v) - F_B(v)|."""
    over, under = cdf_gaps(A, B)
    return max(over, under)


def _cdf_crossings(A, B, tol: float) -> list[float]:
    x = np.sort(_gap_points(A, B))
    d = A.cdf(x) - B.cdf(x)
    sig = np.flatnonzero(np.abs(d) > tol)
    out = []
    gap = lambda v: float(A.cdf(v) - B.cdf(v))
    for i, j in zip(sig[:-1], sig[1:]):
        if np.sign(d[i]) != np.sign(d[j]):
            # the last index before j that still carries d[i]'s sign brackets the root
            seg = np.arange(i, j + 1)
            same = seg[np.sign(d[seg]) == np.sign(d[i])]
            k = same[-1]
            out.append(bisect_sign(gap, float(x[k]), float(x[k + 1]), CROSSING_XTOL))
    return out


def check_fosd(A: BoundedDistribution, B: BoundedDistribution, tol: float = DEFAULT_TOL) -> DominanceReport:
    """First-order dominance verdict between A and B.

    ``max_gap_A_over_B`` is the largest amount by which F_A exceeds F_B; A
    dominates when that is within ``tol`` while F_B exceeds F_A somewhere.
    """
    if not tol > 0:
        raise DistributionError("tolerance must be positive")
    over, under = cdf_gaps(A, B)
    if over <= tol and under <= tol:
        verdict = Verdict.INDISTINGUISHABLE
    elif over <= tol:
        verdict = Verdict.A_DOMINATES
    elif under <= tol:
        verdict = Verdict.B_DOMINATES
    else:
        verdict = Verdict.CROSSING
    return DominanceReport(verdict, over, under, _cdf_crossings(A, B, tol), find_density_crossings(A, B), tol)


def find_density_crossings(A: BoundedDistribution, B: BoundedDistribution) -> list[float]:
    """Interior points where f_A - f_B changes sign.

    The scan runs over the union grid inside the intersection of supports and
    ignores crossings within one grid cell of either end of that intersection.
    """
    lo = max(A.support_lo, B.support_lo)
    hi = min(A.support_hi, B.support_hi)
    if not hi > lo:
        return []
    x = union_grid(A, B)
    x = np.unique(np.concatenate(([lo, hi], x[(x > lo) & (x < hi)])))
    d = A.pdf(x) - B.pdf(x)
    peak = max(float(A.knots_f.max()), float(B.knots_f.max()))
    sig = np.flatnonzero(np.abs(d) > DENSITY_RESOLUTION * peak)
    cell = (hi - lo) / max(A.grid_resolution, B.grid_resolution)
    diff = lambda v: float(A.pdf(v) - B.pdf(v))
    out = []
    for i, j in zip(sig[:-1], sig[1:]):
        if np.sign(d[i]) == np.sign(d[j]):
            continue
        root = bisect_sign(diff, float(x[i]), float(x[j]), CROSSING_XTOL)
        if lo + cell < root < hi - cell:
            out.append(root)
    return out


def classify_distinctness(stage_capacities: Sequence[float], eps: float) -> Distinctness:
    """Two-stage capacity profile against the eps-distinctness conditions.

    eps-distinct: max(p1, p2) < 1 - eps.  Fully eps-distinct additionally
    needs eps < p2 < 1 - eps.
    """
    if not 0.0 < eps < 0.5:
        raise DistributionError(f"eps must lie in (0, 1/2), got {eps}")
    p1, p2 = stage_capacities
    if not (0.0 < p1 <= 1.0 and 0.0 < p2 <= 1.0):
        raise DistributionError("stage capacities must lie in (0, 1]")
    if not max(p1, p2) < 1.0 - eps:
        return Distinctness.NOT_DISTINCT
    if eps < p2 < 1.0 - eps:
        return Distinctness.FULLY_EPS_DISTINCT
    return Distinctness.EPS_DISTINCT


def noise_support_bound(noise, eps: float) -> float:
    """Interval length c = N_hi - N_0 where Pr(N >= N_0) = eps.

    Any impact law on an interval shorter than c that passes a threshold t
    with probability above eps must have t < V_lo + N_hi.
    """
    if not 0.0 < eps < 1.0:
        raise DistributionError(f"eps must lie in (0, 1), got {eps}")
    noise = as_noise(noise)
    return noise.hi - quantile_upper(noise.law, eps)


def convergence_curve(V: BoundedDistribution, noise: NoiseSpec, p: float, ks: Sequence[int],
                      kind: str) -> ConvergenceCurve:
    """Kolmogorov distance to the noiseless top-p law as the stage count grows."""
    if not ks:
        raise DistributionError("ks must be nonempty")
    noise = as_noise(noise)
    target = perfect_screening_target(V, p)
    dists, ths = [], []
    for k in ks:
        if int(k) < 1:
            raise DistributionError(f"stage counts must be >= 1, got {k}")
        post, strategy = solve_strategy(ScreeningProblem(V, (noise,) * int(k), p), kind)
        dists.append(kolmogorov_distance(posterior_to_distribution(post), target))
        ths.append(list(strategy.thresholds))
    return ConvergenceCurve([int(k) for k in ks], dists, kind, ths)


def gap_table(A: BoundedDistribution, B: BoundedDistribution) -> np.ndarray:
    """Rows (v, F_A, F_B, F_A - F_B) over the union grid."""
    x = union_grid(A, B)
    fa, fb = A.cdf(x), B.cdf(x)
    return np.column_stack((x, fa, fb, fa - fb))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
