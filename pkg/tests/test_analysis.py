import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenlab.analysis import (
    Distinctness,
    Verdict,
    check_fosd,
    classify_distinctness,
    convergence_curve,
    find_density_crossings,
    gap_table,
    kolmogorov_distance,
    noise_support_bound,
)
from screenlab.distributions import (
    DistributionError,
    make_piecewise_linear,
    make_uniform,
    sum_survivor,
    uniform_noise,
)
from screenlab.screening import ScreeningProblem, posterior_to_distribution, solve_stage_capacities

from oracles import pwl_knots

U = make_uniform(0.0, 1.0)
TRI = make_piecewise_linear([(0, 0), (1, 2)])


def test_self_comparison_indistinguishable():
    r = check_fosd(U, U)
    assert r.verdict is Verdict.INDISTINGUISHABLE
    assert r.max_gap_A_over_B == 0.0 and r.max_gap_B_over_A == 0.0
    assert find_density_crossings(U, U) == []


def test_triangular_dominates_uniform():
    # F_tri(v) = v^2 <= v, largest gap 1/4 at v = 1/2
    r = check_fosd(TRI, U)
    assert r.verdict is Verdict.A_DOMINATES
    assert r.max_gap_B_over_A == pytest.approx(0.25, abs=1e-12)
    assert r.density_crossings == pytest.approx([0.5], abs=1e-8)
    s = check_fosd(U, TRI)
    assert s.verdict is Verdict.B_DOMINATES
    assert s.max_gap_A_over_B == pytest.approx(r.max_gap_B_over_A, abs=1e-15)


def test_crossing_cdfs():
    A = make_uniform(0.2, 0.8)
    r = check_fosd(A, U)
    assert r.verdict is Verdict.CROSSING
    assert r.cdf_crossings == pytest.approx([0.5], abs=1e-8)


def test_kolmogorov_examples():
    top = make_uniform(0.5, 1.0)
    assert kolmogorov_distance(U, top) == pytest.approx(0.5, abs=1e-12)
    assert kolmogorov_distance(top, U) == kolmogorov_distance(U, top)
    assert kolmogorov_distance(U, U) == 0.0


def test_tolerance_must_be_positive():
    with pytest.raises(DistributionError):
        check_fosd(U, U, 0.0)


@pytest.mark.parametrize("caps, eps, expected", [
    ((0.1, 0.5), 0.2, Distinctness.FULLY_EPS_DISTINCT),
    ((0.9, 0.056), 0.2, Distinctness.NOT_DISTINCT),
    ((0.5, 0.1), 0.2, Distinctness.EPS_DISTINCT),
    ((0.0125, 0.8), 0.2, Distinctness.NOT_DISTINCT),
])
def test_distinctness(caps, eps, expected):
    assert classify_distinctness(caps, eps) is expected


def test_distinctness_rejects_eps():
    for eps in (0.0, 0.5, 0.7):
        with pytest.raises(DistributionError):
            classify_distinctness((0.1, 0.5), eps)


def test_support_bound_examples():
    N = uniform_noise(0.25)
    assert noise_support_bound(N, 0.5) == pytest.approx(0.25, abs=1e-12)
    # c shrinks to zero as eps -> 0 and grows to the full noise width as eps -> 1
    assert noise_support_bound(N, 0.001) < 0.01
    assert noise_support_bound(N, 0.999) == pytest.approx(0.4995, abs=1e-10)
    # integral of 5 * 2x over [0, 0.2]
    assert sum_survivor(make_uniform(0.0, 0.2), N, 0.25) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(DistributionError):
        noise_support_bound(N, 1.0)


def test_intro_verdicts():
    one = ScreeningProblem(U, (uniform_noise(0.25),), 0.05)
    two = ScreeningProblem(U, (uniform_noise(0.25), uniform_noise(0.2)), 0.05)
    A = posterior_to_distribution(solve_stage_capacities(one, [0.05])[0])
    B = posterior_to_distribution(solve_stage_capacities(two, [0.1, 0.5])[0])
    r = check_fosd(A, B)
    assert r.verdict is Verdict.CROSSING
    assert r.cdf_crossings == pytest.approx([0.9126812], abs=1e-6)
    # the two-stage density is higher at both ends, so densities cross twice
    assert r.density_crossings == pytest.approx([0.8174519, 0.9609154], abs=1e-6)


def test_convergence_curve_consistency():
    N = uniform_noise(0.25)
    a = convergence_curve(U, N, 0.05, [1, 2], "fixed_capacity")
    b = convergence_curve(U, N, 0.05, [1, 2], "fixed_threshold")
    assert a.distances[0] == pytest.approx(b.distances[0], abs=1e-12)
    # one-stage CDF ((v - lo)/(1 - lo))^2 against U[0.95, 1]
    assert a.distances[0] == pytest.approx(0.6027864045, abs=1e-9)
    assert a.to_csv().splitlines()[0] == "k,distance"
    assert json.loads(json.dumps(a.to_json()))["strategy_kind"] == "fixed_capacity"
    with pytest.raises(DistributionError):
        convergence_curve(U, N, 0.05, [], "fixed_capacity")


def test_gap_table_columns():
    rows = gap_table(TRI, U)
    assert rows.shape[1] == 4
    assert np.allclose(rows[:, 3], rows[:, 1] - rows[:, 2])


@settings(max_examples=40, deadline=None)
@given(pwl_knots(5), pwl_knots(5))
def test_antisymmetry_and_metric(ka, kb):
    A, B = make_piecewise_linear(ka), make_piecewise_linear(kb)
    r, s = check_fosd(A, B), check_fosd(B, A)
    assert r.max_gap_A_over_B == s.max_gap_B_over_A
    assert r.max_gap_B_over_A == s.max_gap_A_over_B
    mirror = {Verdict.A_DOMINATES: Verdict.B_DOMINATES, Verdict.B_DOMINATES: Verdict.A_DOMINATES}
    assert s.verdict == mirror.get(r.verdict, r.verdict)
    d = kolmogorov_distance(A, B)
    assert d == kolmogorov_distance(B, A) and 0.0 <= d <= 1.0
    # exact sup is at least any sampled gap
    x = np.linspace(min(A.support_lo, B.support_lo), max(A.support_hi, B.support_hi), 2001)
    assert d >= np.max(np.abs(A.cdf(x) - B.cdf(x))) - 1e-14


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.01, 0.99), st.floats(0.0, 0.999), st.floats(-2, 2), st.data())
def test_support_bound_holds(w, eps, frac, lo, data):
    N = uniform_noise(w)
    c = noise_support_bound(N, eps)
    V = make_uniform(lo, lo + max(frac * c, 1e-6))
    t = data.draw(st.floats(lo - 1.0, lo + 2 * w + c))
    if sum_survivor(V, N, t) > eps:
        assert t < V.support_lo + N.hi
