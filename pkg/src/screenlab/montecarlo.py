"""Monte Carlo oracle for the screening process.

Each element draws its impact once and a fresh noise at every stage; it is
accepted iff every noisy score clears its stage threshold.  Uniform variates
come from Philox streams keyed by ``(seed, stage)`` and indexed by sample
number, so a sample's draws do not depend on how the population is split
into blocks or across workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import BoundedDistribution, DistributionError
from .screening import ScreeningProblem, posterior_to_distribution, run_strategy

BLOCK = 1 << 16  # multiple of 4: Philox emits four words per counter step
MIN_ACCEPTED = 100
CDF_POINTS = 1025
Z_LIMIT = 4.0
DKW_ALPHA = 0.01


class InsufficientAcceptance(RuntimeError):
    pass


@dataclass(frozen=True)
class MCConfig:
    samples: int
    seed: int = 0

    def __post_init__(self):
        if int(self.samples) < 1:
            raise DistributionError("samples must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DistributionError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class MCEstimate:
    samples: int
    accepted_count: int
    acceptance_rate: float
    acceptance_se: float
    accepted_mean: float
    mean_se: float
    cdf_grid: list = field(repr=False)
    cdf_values: list = field(repr=False)

    @property
    def empirical_cdf(self) -> list[tuple[float, float]]:
        return list(zip(self.cdf_grid, self.cdf_values))

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "accepted_count": self.accepted_count,
            "acceptance_rate": self.acceptance_rate,
            "acceptance_se": self.acceptance_se,
            "accepted_mean": self.accepted_mean,
            "mean_se": self.mean_se,
            "empirical_cdf": [[v, F] for v, F in self.empirical_cdf],
        }

    def cdf_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["v", "F_hat"])
        for v, F in self.empirical_cdf:
            w.writerow([f"{v:.12g}", f"{F:.12g}"])
        return buf.getvalue()


def uniforms(seed: int, stream: int, start: int, n: int) -> np.ndarray:
    """Variates ``start .. start+n-1`` of the stream keyed by (seed, stream)."""
    if start % 4:
        raise ValueError("block starts must be multiples of 4")
    bg = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    bg.advance(start // 4)
    return np.random.Generator(bg).random(n)


def sample(d: BoundedDistribution, n: int, seed: int, stream: int = 0, start: int = 0) -> np.ndarray:
    """Inverse-CDF draws from ``d``."""
    return d.ppf(uniforms(seed, stream, start, n))


def _block(sp: ScreeningProblem, thresholds, seed: int, start: int, n: int, grid: np.ndarray):
    v = sp.impact.ppf(uniforms(seed, 0, start, n))
    keep = np.ones(n, dtype=bool)
    for stage, (noise, t) in enumerate(zip(sp.noises, thresholds), start=1):
        z = noise.law.ppf(uniforms(seed, stage, start, n))
        keep &= v + z >= t
    acc = v[keep]
    counts = np.searchsorted(np.sort(acc), grid, side="right")
    return acc.size, math.fsum(acc), math.fsum(acc * acc), counts


def simulate(sp: ScreeningProblem, thresholds: Sequence[float], cfg: MCConfig, workers: int = 1,
             cdf_points: int = CDF_POINTS) -> MCEstimate:
    if len(thresholds) != sp.stages:
        raise DistributionError(f"expected {sp.stages} thresholds, got {len(thresholds)}")
    M = int(cfg.samples)
    grid = np.linspace(sp.impact.support_lo, sp.impact.support_hi, cdf_points)
    starts = range(0, M, BLOCK)
    job = lambda s: _block(sp, thresholds, int(cfg.seed), s, min(BLOCK, M - s), grid)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]

    n_acc = sum(p[0] for p in parts)
    if n_acc < MIN_ACCEPTED:
        raise InsufficientAcceptance(f"only {n_acc} of {M} samples accepted (need {MIN_ACCEPTED})")
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    counts = np.sum([p[3] for p in parts], axis=0)

    rate = n_acc / M
    mean = s1 / n_acc
    var = max(0.0, (s2 - n_acc * mean * mean) / max(n_acc - 1, 1))
    return MCEstimate(
        samples=M,
        accepted_count=int(n_acc),
        acceptance_rate=rate,
        acceptance_se=math.sqrt(rate * (1.0 - rate) / M),
        accepted_mean=mean,
        mean_se=math.sqrt(var / n_acc),
        cdf_grid=[float(v) for v in grid],
        cdf_values=[float(c) / n_acc for c in counts],
    )


@dataclass(frozen=True)
class CrossValidation:
    quadrature_capacity: float
    quadrature_mean: float
    estimate: MCEstimate
    acceptance_z: float
    mean_z: float
    cdf_sup_gap: float
    dkw_band: float

    @property
    def acceptance_ok(self) -> bool:
        return abs(self.acceptance_z) <= Z_LIMIT

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean_z) <= Z_LIMIT

    @property
    def cdf_ok(self) -> bool:
        return self.cdf_sup_gap <= self.dkw_band

    @property
    def passed(self) -> bool:
        return self.acceptance_ok and self.mean_ok and self.cdf_ok

    def to_json(self) -> dict:
        return {
            "quadrature_capacity": self.quadrature_capacity,
            "quadrature_mean": self.quadrature_mean,
            "mc_acceptance_rate": self.estimate.acceptance_rate,
            "mc_acceptance_se": self.estimate.acceptance_se,
            "mc_accepted_mean": self.estimate.accepted_mean,
            "mc_mean_se": self.estimate.mean_se,
            "mc_samples": self.estimate.samples,
            "mc_accepted_count": self.estimate.accepted_count,
            "acceptance_z": self.acceptance_z,
            "mean_z": self.mean_z,
            "cdf_sup_gap": self.cdf_sup_gap,
            "dkw_band": self.dkw_band,
            "acceptance_ok": self.acceptance_ok,
            "mean_ok": self.mean_ok,
            "cdf_ok": self.cdf_ok,
            "passed": self.passed,
        }


def _z(diff: float, se: float) -> float:
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def cross_validate(sp: ScreeningProblem, thresholds: Sequence[float], cfg: MCConfig,
                   workers: int = 1, mc_thresholds: Sequence[float] | None = None) -> CrossValidation:
    """Compare the sampled process with the quadrature engine.

    ``mc_thresholds`` feeds the sampler different cutoffs than the quadrature
    side, which is how the disagreement flags are exercised.
    """
    est = simulate(sp, thresholds if mc_thresholds is None else mc_thresholds, cfg, workers)
    post, strategy = run_strategy(sp, thresholds)
    law = posterior_to_distribution(post)
    q_cap = strategy.overall_capacity
    q_mean = post.mean()
    gap = float(np.max(np.abs(np.asarray(est.cdf_values) - law.cdf(np.asarray(est.cdf_grid)))))
    band = math.sqrt(math.log(2.0 / DKW_ALPHA) / (2.0 * est.accepted_count))
    return CrossValidation(q_cap, q_mean, est,
                           _z(est.acceptance_rate - q_cap, est.acceptance_se),
                           _z(est.accepted_mean - q_mean, est.mean_se),
                           gap, band)
