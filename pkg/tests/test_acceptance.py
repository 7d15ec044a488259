"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np

from screenlab.analysis import (
    Distinctness,
    Verdict,
    check_fosd,
    classify_distinctness,
    convergence_curve,
    kolmogorov_distance,
    noise_support_bound,
)
from screenlab.costs import CostSpec, cost_accuracy, cost_capacity
from screenlab.distributions import (
    NoiseSpec,
    make_piecewise_linear,
    make_uniform,
    quantile_upper,
    sum_survivor,
    survivor,
    uniform_noise,
)
from screenlab.montecarlo import MCConfig, cross_validate
from screenlab.screening import (
    ScreeningProblem,
    perfect_screening_target,
    posterior_to_distribution,
    run_limit_truncation,
    run_strategy,
    solve_stage_capacities,
    solve_strategy,
)

from oracles import posterior_oracle

V = make_uniform(0.0, 1.0)
N1 = uniform_noise(0.25)
N2 = uniform_noise(0.2)
TOL = 1e-6


def law(post):
    return posterior_to_distribution(post)


def one_stage(p, noise=N1):
    return solve_stage_capacities(ScreeningProblem(V, (noise,), p), [p])


def iid_fixed_threshold_two_stage(p):
    return solve_strategy(ScreeningProblem(V, (N1, N1), p), "fixed_threshold")


def test_criterion_1_expected_value_reversal(criterion):
    start = time.perf_counter()
    post1, s1 = one_stage(0.05)
    post2, s2 = solve_stage_capacities(ScreeningProblem(V, (N1, N2), 0.05), [0.1, 0.5])
    m1, m2 = post1.mean(), post2.mean()
    cfg = MCConfig(10 ** 6, seed=20240601)
    cv1 = cross_validate(ScreeningProblem(V, (N1,), 0.05), s1.thresholds, cfg)
    cv2 = cross_validate(ScreeningProblem(V, (N1, N2), 0.05), s2.thresholds, cfg)
    elapsed = time.perf_counter() - start
    ok = m1 - m2 > 1e-3 and cv1.mean_ok and cv2.mean_ok and elapsed < 30
    criterion(1, "one-stage mean exceeds two-stage mean at 5%", ok,
              f"E1={m1:.6f} E2={m2:.6f} margin={m1 - m2:.4g} "
              f"z1={cv1.mean_z:.2f} z2={cv2.mean_z:.2f} t={elapsed:.1f}s")


def test_criterion_2_dominance_flip(criterion):
    start = time.perf_counter()
    a3 = law(one_stage(0.03)[0])
    b3 = law(solve_stage_capacities(ScreeningProblem(V, (N1, N2), 0.03), [0.06, 0.5])[0])
    r3 = check_fosd(a3, b3, TOL)
    a5 = law(one_stage(0.05)[0])
    b5 = law(solve_stage_capacities(ScreeningProblem(V, (N1, N2), 0.05), [0.1, 0.5])[0])
    r5 = check_fosd(a5, b5, TOL)
    elapsed = time.perf_counter() - start
    near = [c for c in r5.cdf_crossings if abs(c - 0.9127) <= 0.005]
    ok = (r3.verdict is Verdict.A_DOMINATES and r3.max_gap_A_over_B <= TOL
          and r5.verdict is Verdict.CROSSING and bool(near) and elapsed < 10)
    criterion(2, "one-stage dominates at 3%, CDFs cross near 0.9127 at 5%", ok,
              f"3%: {r3.verdict.value} adverse={r3.max_gap_A_over_B:.2e}; "
              f"5%: {r5.verdict.value} crossings={[round(c, 6) for c in r5.cdf_crossings]} t={elapsed:.1f}s")


def test_criterion_3_high_capacity_two_stage_dominates(criterion):
    start = time.perf_counter()
    parts, ok = [], True
    for p in (0.75, 0.8, 0.9):
        one = law(one_stage(p)[0])
        two = law(iid_fixed_threshold_two_stage(p)[0])
        r = check_fosd(one, two, TOL)
        good = r.verdict is Verdict.B_DOMINATES and r.max_gap_B_over_A <= TOL
        ok &= good
        parts.append(f"p={p}: {r.verdict.value} adverse={r.max_gap_B_over_A:.2e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    criterion(3, "i.i.d. fixed-threshold two-stage dominates at p in {0.75, 0.8, 0.9}", ok,
              "; ".join(parts) + f" t={elapsed:.1f}s")


def _one_stage_wins(one, two):
    r = check_fosd(one, two, TOL)
    return r, r.verdict is Verdict.A_DOMINATES and len(r.density_crossings) == 1


def test_criterion_4_low_capacity_sweeps(criterion):
    start = time.perf_counter()
    bad, count = [], 0
    for p in (0.005, 0.01, 0.02):
        r, good = _one_stage_wins(law(one_stage(p)[0]), law(iid_fixed_threshold_two_stage(p)[0]))
        count += 1
        if not good:
            bad.append(f"fixed-threshold p={p}: {r.verdict.value}, {len(r.density_crossings)} crossings")

    p, eps = 0.01, 0.2
    one = law(one_stage(p)[0])
    for p1 in (0.0125, 0.025, 0.05, 0.1, 0.2, 0.5):
        caps = (p1, round(p / p1, 12))  # keeps 0.01/0.0125 at exactly 0.8
        cls = classify_distinctness(caps, eps)
        if cls is not Distinctness.NOT_DISTINCT:
            r, good = _one_stage_wins(one, law(solve_stage_capacities(ScreeningProblem(V, (N1, N1), p), caps)[0]))
            count += 1
            if not good:
                bad.append(f"iid caps=({p1}, {caps[1]:g}): {r.verdict.value}, "
                           f"{len(r.density_crossings)} crossings")
        if cls is Distinctness.FULLY_EPS_DISTINCT:
            r, good = _one_stage_wins(one, law(solve_stage_capacities(ScreeningProblem(V, (N1, N2), p), caps)[0]))
            count += 1
            if not good:
                bad.append(f"sharper second test caps=({p1}, {caps[1]:g}): {r.verdict.value}, "
                           f"{len(r.density_crossings)} crossings")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    criterion(4, "one-stage dominates with a single density crossing across low-capacity sweeps", ok,
              f"{count - len(bad)}/{count} comparisons hold" + (f"; failing: {'; '.join(bad)}" if bad else "")
              + f" t={elapsed:.1f}s")


def test_criterion_5_convergence(criterion):
    start = time.perf_counter()
    ks = [1, 2, 4, 8, 16, 32, 64]
    parts, ok = [], True
    for kind in ("fixed_threshold", "fixed_capacity"):
        curve = convergence_curve(V, N1, 0.05, ks, kind)
        d1, d64 = curve.distances[0], curve.distances[-1]
        ok &= d64 < 0.05 and d64 < d1
        if kind == "fixed_threshold":
            ts = [th[0] for th in curve.thresholds]
            mono = all(b < a for a, b in zip(ts, ts[1:]))
        else:
            mono = all(np.all(np.diff(th) > 0) for th in curve.thresholds[1:])
        ok &= mono
        parts.append(f"{kind}: d(1)={d1:.4f} d(64)={d64:.4f} monotone={mono}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    criterion(5, "distance to noiseless top-5% law below 0.05 at 64 stages", ok,
              "; ".join(parts) + f" t={elapsed:.1f}s")


def test_criterion_6_limit_truncation(criterion):
    start = time.perf_counter()
    post, strat = run_limit_truncation(V, N1, 0.05, 256)
    got = law(post)
    dist = kolmogorov_distance(got, perfect_screening_target(V, 0.05))
    cap = strat.overall_capacity
    realized_target = kolmogorov_distance(got, perfect_screening_target(V, cap))
    elapsed = time.perf_counter() - start
    ok = abs(cap - 0.05) <= 0.01 and dist < 0.02 and elapsed < 60
    criterion(6, "256-stage constant limit threshold approaches noiseless screening", ok,
              f"capacity={cap:.6f} distance={dist:.4f} "
              f"(distance to top-{cap:.4f} law={realized_target:.4f}) t={elapsed:.1f}s")


def _random_problem(rng):
    n = int(rng.integers(2, 6))
    xs = np.cumsum(np.concatenate(([rng.uniform(-1, 1)], rng.uniform(0.1, 0.6, n - 1))))
    fs = rng.uniform(0.2, 2.0, n)
    knots = list(zip(xs.tolist(), fs.tolist()))
    widths = rng.uniform(0.05, 0.4, int(rng.integers(1, 4))).tolist()
    imp = make_piecewise_linear(knots)
    while True:
        ts = rng.uniform(xs[0] - 0.2, xs[0] + 0.7 * (xs[-1] - xs[0]), len(widths)).tolist()
        sp = ScreeningProblem(imp, tuple(uniform_noise(w) for w in widths), 0.5)
        post, strat = run_strategy(sp, ts)
        if strat.overall_capacity > 0.02:
            return knots, widths, ts, sp, post, strat


def test_criterion_7_engine_consistency(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(777)
    worst_pdf, worst_z, n_ok = 0.0, 0.0, 0
    for i in range(20):
        knots, widths, ts, sp, post, strat = _random_problem(rng)
        dens, _, _ = posterior_oracle(knots, [(-w, w) for w in widths], ts)
        x = np.linspace(sp.impact.support_lo, sp.impact.support_hi, 257)
        worst_pdf = max(worst_pdf, float(np.max(np.abs(post.density(x) - [dens(v) for v in x]))))
        cv = cross_validate(sp, ts, MCConfig(10 ** 5, seed=1000 + i))
        worst_z = max(worst_z, abs(cv.acceptance_z), abs(cv.mean_z))
        n_ok += cv.acceptance_ok and cv.mean_ok
    elapsed = time.perf_counter() - start
    ok = worst_pdf <= 1e-8 and n_ok == 20 and elapsed < 120
    criterion(7, "product density matches sequential conditioning and Monte Carlo", ok,
              f"max |pdf diff|={worst_pdf:.2e} MC agreement {n_ok}/20 max|z|={worst_z:.2f} t={elapsed:.1f}s")


def _random_noise(rng):
    a = rng.uniform(0.05, 0.5)
    if rng.random() < 0.5:
        return uniform_noise(a)
    return NoiseSpec(make_piecewise_linear([(-a, 0.0), (0.0, 1.0), (a, 0.0)]))


def test_criterion_8_solver_accuracy(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(888)
    worst_cap = worst_q = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 5))
        xs = np.cumsum(np.concatenate(([0.0], rng.uniform(0.1, 0.5, n - 1))))
        imp = make_piecewise_linear(list(zip(xs, rng.uniform(0.2, 2.0, n))))
        noise = _random_noise(rng)
        p = float(rng.uniform(0.02, 0.9))
        k = int(rng.integers(1, 4))
        sp = ScreeningProblem(imp, (noise,) * k, p)
        for kind in ("fixed_threshold", "fixed_capacity"):
            worst_cap = max(worst_cap, abs(solve_strategy(sp, kind)[1].overall_capacity - p))
        caps = rng.dirichlet(np.ones(k)) * math.log(p)
        caps = np.exp(caps)
        worst_cap = max(worst_cap, abs(solve_stage_capacities(sp, caps)[1].overall_capacity - p))
        for q in rng.uniform(0.001, 0.999, 10):
            worst_q = max(worst_q, abs(survivor(imp, quantile_upper(imp, q)) - q))

    violations = 0
    for _ in range(100):
        noise = _random_noise(rng)
        eps = float(rng.uniform(0.01, 0.99))
        c = noise_support_bound(noise, eps)
        lo = float(rng.uniform(-1, 1))
        length = float(rng.uniform(0.01, 0.999)) * c
        imp = make_piecewise_linear([(lo, rng.uniform(0.2, 2)), (lo + length, rng.uniform(0.2, 2))])
        for t in rng.uniform(lo + noise.lo, lo + length + noise.hi, 20):
            if sum_survivor(imp, noise, float(t)) > eps and not t < lo + noise.hi:
                violations += 1
    elapsed = time.perf_counter() - start
    ok = worst_cap <= 1e-6 and worst_q <= 1e-8 and violations == 0 and elapsed < 30
    criterion(8, "solvers hit requested capacities; quantiles invert; support bound holds", ok,
              f"max capacity error={worst_cap:.2e} max quantile error={worst_q:.2e} "
              f"bound violations={violations}/2000 t={elapsed:.1f}s")


def test_criterion_9_cost_identities(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(999)
    worst = 0.0
    for _ in range(50):
        caps = rng.uniform(0.01, 1.0, int(rng.integers(1, 8)))
        worst = max(worst, abs(cost_capacity(caps) + math.log(math.prod(caps))))
    examples = [
        (cost_accuracy(CostSpec((1, 2), (0.1, 0.5), 0.05)), math.log(20) + 2 * math.log(2)),
        (cost_accuracy(CostSpec((1.7,), (0.3,), 0.3)), 1.7 * math.log(1 / 0.3)),
        (cost_accuracy(CostSpec((1, 2), (0.05, 1.0), 0.05)), math.log(20)),
        (cost_capacity((0.1, 0.5)), math.log(20)),
        (cost_capacity((1.0,)), 0.0),
        (cost_capacity((0.5, 0.5, 0.5)), cost_capacity((0.125,))),
    ]
    worst_ex = max(abs(a - b) for a, b in examples)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and worst_ex <= 1e-12 and elapsed < 1
    criterion(9, "capacity cost equals -ln p; accuracy cost matches hand values", ok,
              f"max identity error={worst:.1e} max example error={worst_ex:.1e} t={elapsed:.3f}s")
