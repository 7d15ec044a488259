"""Kolmogorov distance to noiseless top-p screening as stages are added.

Runs both stationary strategies on U[0,1] with i.i.d. U[-1/4, 1/4] noise and
the constant limit threshold, writing one CSV per curve.

Usage: python3 scripts/convergence_sweep.py [--out DIR] [--p 0.05] [--kmax 256]
"""

import argparse
from pathlib import Path

from screenlab import convergence_curve, kolmogorov_distance, make_uniform, perfect_screening_target
from screenlab import posterior_to_distribution, run_limit_truncation, uniform_noise


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--p", type=float, default=0.05)
    ap.add_argument("--kmax", type=int, default=256)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    V, N = make_uniform(0.0, 1.0), uniform_noise(0.25)
    ks = [1]
    while ks[-1] * 2 <= args.kmax:
        ks.append(ks[-1] * 2)
    for kind in ("fixed_threshold", "fixed_capacity"):
        curve = convergence_curve(V, N, args.p, ks, kind)
        (out / f"convergence_{kind}.csv").write_text(curve.to_csv())
        print(kind, " ".join(f"{k}:{d:.4f}" for k, d in zip(ks, curve.distances)))

    target = perfect_screening_target(V, args.p)
    lines = ["k,capacity,distance"]
    for k in ks:
        post, strat = run_limit_truncation(V, N, args.p, k)
        d = kolmogorov_distance(posterior_to_distribution(post), target)
        lines.append(f"{k},{strat.overall_capacity:.12g},{d:.12g}")
    (out / "limit_truncation.csv").write_text("\n".join(lines) + "\n")
    print("limit truncation", lines[-1])


if __name__ == "__main__":
    main()
