"""Bounded continuous laws with piecewise-linear densities.

Every impact and noise variable in a screening problem is a
:class:`BoundedDistribution`: a density that is linear between knots, zero
outside ``[support_lo, support_hi]`` and strictly positive inside.  The CDF is
then piecewise quadratic and is evaluated in closed form; only derived
quantities (means, sum survivors) go through quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import bisect_decreasing, integrate

DEFAULT_GRID = 4096

NORMALIZATION_TOL = 1e-9
SYMMETRY_TOL = 1e-9


class DistributionError(ValueError):
    """Raised for invalid distribution parameters."""


@dataclass(frozen=True, eq=False)
class BoundedDistribution:
    """Piecewise-linear density on a bounded interval.

    Construct through :func:`make_uniform` or :func:`make_piecewise_linear`;
    the knot values passed here must already integrate to one.
    """

    knots_x: np.ndarray
    knots_f: np.ndarray
    grid_resolution: int = DEFAULT_GRID
    renormalization: float = 1.0
    _cum: np.ndarray = field(init=False, repr=False)
    _tail: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.knots_x, dtype=float)
        f = np.array(self.knots_f, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise DistributionError("need at least two (x, f) knots")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(f)):
            raise DistributionError("knots must be finite")
        if not np.all(np.diff(x) > 0):
            raise DistributionError("knot positions must be strictly increasing")
        if np.any(f < 0):
            raise DistributionError("density values must be nonnegative")
        if np.any(f[1:-1] <= 0):
            raise DistributionError("density must be strictly positive on the interior of the support")
        if int(self.grid_resolution) < 2:
            raise DistributionError("grid_resolution must be at least 2")
        seg = 0.5 * (f[1:] + f[:-1]) * np.diff(x)
        if abs(seg.sum() - 1.0) > NORMALIZATION_TOL:
            raise DistributionError(f"density integrates to {seg.sum():.12g}, not 1")
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        tail = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
        x.setflags(write=False)
        f.setflags(write=False)
        cum.setflags(write=False)
        tail.setflags(write=False)
        object.__setattr__(self, "knots_x", x)
        object.__setattr__(self, "knots_f", f)
        object.__setattr__(self, "grid_resolution", int(self.grid_resolution))
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_tail", tail)

    @property
    def support_lo(self) -> float:
        return float(self.knots_x[0])

    @property
    def support_hi(self) -> float:
        return float(self.knots_x[-1])

    @property
    def knots(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.knots_x, self.knots_f)]

    def with_grid(self, grid_resolution: int) -> "BoundedDistribution":
        return BoundedDistribution(self.knots_x, self.knots_f, grid_resolution, self.renormalization)

    def shifted(self, c: float) -> "BoundedDistribution":
        return BoundedDistribution(self.knots_x + c, self.knots_f, self.grid_resolution, self.renormalization)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.knots_x, self.knots_f)
        return np.where((x < self.knots_x[0]) | (x > self.knots_x[-1]), 0.0, out)

    def _locate(self, x):
        i = np.searchsorted(self.knots_x, x, side="right") - 1
        i = np.clip(i, 0, self.knots_x.size - 2)
        x0 = self.knots_x[i]
        dx = x - x0
        f0 = self.knots_f[i]
        slope = (self.knots_f[i + 1] - f0) / (self.knots_x[i + 1] - x0)
        return i, dx, f0, slope

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        i, dx, f0, slope = self._locate(x)
        out = self._cum[i] + dx * (f0 + 0.5 * slope * dx)
        out = np.where(x <= self.knots_x[0], 0.0, out)
        out = np.where(x >= self.knots_x[-1], 1.0, out)
        return np.clip(out, 0.0, 1.0)

    @property
    def is_uniform(self) -> bool:
        return self.knots_x.size == 2 and self.knots_f[0] == self.knots_f[1]

    def survivor(self, x):
        """Pr(X >= x), accumulated from the upper tail for accuracy near 0."""
        x = np.asarray(x, dtype=float)
        if self.is_uniform:
            lo, hi = self.knots_x
            return np.clip((hi - x) / (hi - lo), 0.0, 1.0)
        i, dx, f0, slope = self._locate(x)
        seg_mass = self._cum[i + 1] - self._cum[i]
        out = self._tail[i + 1] + seg_mass - dx * (f0 + 0.5 * slope * dx)
        out = np.where(x <= self.knots_x[0], 1.0, out)
        out = np.where(x >= self.knots_x[-1], 0.0, out)
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u):
        """Inverse CDF, solving the per-segment quadratic in closed form."""
        u = np.asarray(u, dtype=float)
        i = np.searchsorted(self._cum, u, side="right") - 1
        i = np.clip(i, 0, self.knots_x.size - 2)
        x0 = self.knots_x[i]
        f0 = self.knots_f[i]
        slope = (self.knots_f[i + 1] - f0) / (self.knots_x[i + 1] - x0)
        r = np.clip(u - self._cum[i], 0.0, None)
        disc = np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * r, 0.0))
        denom = f0 + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = np.where(denom > 0, 2.0 * r / denom, 0.0)
        return np.clip(x0 + dx, self.knots_x[0], self.knots_x[-1])

    def mean(self) -> float:
        return integrate(lambda t: t * self.pdf(t), self.support_lo, self.support_hi,
                         self.knots_x, self.grid_resolution)

    def total_mass(self) -> float:
        return integrate(self.pdf, self.support_lo, self.support_hi, self.knots_x, self.grid_resolution)

    def to_literal(self) -> dict:
        return {"kind": "pwl", "knots": [[a, b] for a, b in self.knots]}


def _build(x, f, grid_resolution: int) -> BoundedDistribution:
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.ndim != 1 or x.shape != f.shape or x.size < 2:
        raise DistributionError("need at least two (x, f) knots")
    if not np.all(np.diff(x) > 0):
        raise DistributionError("knot positions must be strictly increasing")
    if np.any(f < 0):
        raise DistributionError("density values must be nonnegative")
    mass = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))
    if not mass > 0:
        raise DistributionError("density is identically zero")
    return BoundedDistribution(x, f / mass, grid_resolution, renormalization=1.0 / mass)


def make_uniform(lo: float, hi: float, grid_resolution: int = DEFAULT_GRID) -> BoundedDistribution:
    if not hi > lo:
        raise DistributionError(f"uniform law needs lo < hi, got [{lo}, {hi}]")
    h = 1.0 / (hi - lo)
    return BoundedDistribution(np.array([lo, hi], float), np.array([h, h]), grid_resolution)


def make_piecewise_linear(knots, grid_resolution: int = DEFAULT_GRID) -> BoundedDistribution:
    """Density interpolated linearly between ``(x, f)`` knots, then normalized.

    The factor applied during normalization is kept in ``renormalization``.

    >>> make_piecewise_linear([(0, 0), (1, 2)]).mean()  # doctest: +ELLIPSIS
    0.66666666666...
    """
    arr = np.asarray(knots, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DistributionError("knots must be a list of (x, f) pairs")
    return _build(arr[:, 0], arr[:, 1], grid_resolution)


def from_literal(obj: dict, grid_resolution: int = DEFAULT_GRID) -> BoundedDistribution:
    """Parse ``{"kind": "uniform", "lo", "hi"}`` or ``{"kind": "pwl", "knots"}``."""
    if not isinstance(obj, dict):
        raise DistributionError("distribution literal must be a JSON object")
    kind = obj.get("kind")
    if kind == "uniform":
        extra = set(obj) - {"kind", "lo", "hi"}
        if extra:
            raise DistributionError(f"unknown fields in uniform literal: {sorted(extra)}")
        try:
            return make_uniform(float(obj["lo"]), float(obj["hi"]), grid_resolution)
        except KeyError as exc:
            raise DistributionError(f"uniform literal missing {exc.args[0]!r}") from None
    if kind == "pwl":
        extra = set(obj) - {"kind", "knots"}
        if extra:
            raise DistributionError(f"unknown fields in pwl literal: {sorted(extra)}")
        if "knots" not in obj:
            raise DistributionError("pwl literal missing 'knots'")
        return make_piecewise_linear(obj["knots"], grid_resolution)
    raise DistributionError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """A stage noise: a bounded law symmetric about zero."""

    law: BoundedDistribution

    def __post_init__(self):
        law = self.law
        scale = max(1.0, abs(law.support_hi))
        if abs(law.support_lo + law.support_hi) > SYMMETRY_TOL * scale:
            raise DistributionError("noise support must be symmetric about zero")
        pts = np.concatenate((law.knots_x, -law.knots_x))
        if np.max(np.abs(law.pdf(pts) - law.pdf(-pts))) > SYMMETRY_TOL:
            raise DistributionError("noise density must be symmetric about zero")

    @property
    def lo(self) -> float:
        return self.law.support_lo

    @property
    def hi(self) -> float:
        return self.law.support_hi

    @property
    def knots_x(self) -> np.ndarray:
        return self.law.knots_x

    def survivor(self, x):
        return self.law.survivor(x)

    def same_law(self, other: "NoiseSpec") -> bool:
        a, b = self.law, other.law
        return (a.knots_x.shape == b.knots_x.shape
                and np.array_equal(a.knots_x, b.knots_x)
                and np.array_equal(a.knots_f, b.knots_f))


def uniform_noise(half_width: float, grid_resolution: int = DEFAULT_GRID) -> NoiseSpec:
    return NoiseSpec(make_uniform(-half_width, half_width, grid_resolution))


def as_noise(d) -> NoiseSpec:
    return d if isinstance(d, NoiseSpec) else NoiseSpec(d)


def survivor(d, x):
    """Pr(X >= x) for a distribution or a noise spec."""
    return d.survivor(x)


def quantile_upper(d: BoundedDistribution, p: float, xtol: float = 1e-12) -> float:
    """The value ``v`` with ``Pr(X >= v) = p``, located by bisection."""
    if not 0.0 < p < 1.0:
        raise DistributionError(f"p must lie in (0, 1), got {p}")
    return bisect_decreasing(lambda v: float(d.survivor(v)), p, d.support_lo, d.support_hi, xtol=xtol)


def mean(d: BoundedDistribution) -> float:
    return d.mean()


def sum_survivor(V: BoundedDistribution, N, t: float) -> float:
    """Pr(V + N >= t) by quadrature of f_V(x) * Pr(N >= t - x) over V's support."""
    N = as_noise(N)
    if t <= V.support_lo + N.lo:
        return 1.0
    if t >= V.support_hi + N.hi:
        return 0.0
    breaks = np.concatenate((V.knots_x, t - N.knots_x))
    val = integrate(lambda x: V.pdf(x) * N.survivor(t - x), V.support_lo, V.support_hi,
                    breaks, V.grid_resolution)
    return min(1.0, max(0.0, val))
