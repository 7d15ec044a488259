"""Dominance verdicts of one- versus two-stage screening across capacities.

For each capacity p, the one-stage posterior (noise U[-1/4, 1/4]) is compared
with the two-stage common-threshold posterior under i.i.d. noise, and with the
two-stage posterior using a sharper second test and an even capacity split.
Writes ``regimes.csv`` with the verdicts and both CDF gaps.

Usage: python3 scripts/dominance_regimes.py [--out DIR] [--ps 0.005,0.01,...]
"""

import argparse
import csv
import math
from pathlib import Path

from screenlab import (
    ScreeningProblem,
    check_fosd,
    make_uniform,
    posterior_to_distribution,
    uniform_noise,
)
from screenlab.screening import solve_stage_capacities, solve_strategy

DEFAULT_PS = "0.005,0.01,0.02,0.03,0.05,0.1,0.2,0.3,0.5,0.7,0.75,0.77,0.78,0.8,0.9"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/regimes")
    ap.add_argument("--ps", default=DEFAULT_PS)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    V = make_uniform(0.0, 1.0)
    n1, n2 = uniform_noise(0.25), uniform_noise(0.2)
    rows = []
    for p in (float(s) for s in args.ps.split(",")):
        one = posterior_to_distribution(solve_stage_capacities(ScreeningProblem(V, (n1,), p), [p])[0])
        designs = {
            "iid_fixed_threshold": solve_strategy(ScreeningProblem(V, (n1, n1), p), "fixed_threshold")[0],
            "sharper_even_split": solve_stage_capacities(ScreeningProblem(V, (n1, n2), p),
                                                         [math.sqrt(p)] * 2)[0],
        }
        for name, post in designs.items():
            r = check_fosd(one, posterior_to_distribution(post))
            rows.append([p, name, r.verdict.value, r.max_gap_A_over_B, r.max_gap_B_over_A,
                         len(r.density_crossings)])
            print(f"p={p:<6g} {name:<22} {r.verdict.value:<18} "
                  f"F1-F2 max={r.max_gap_A_over_B:.2e}  F2-F1 max={r.max_gap_B_over_A:.2e}")

    with open(out / "regimes.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "design", "verdict", "gap_one_over_two", "gap_two_over_one", "density_crossings"])
        for row in rows:
            w.writerow([f"{row[0]:.12g}", row[1], row[2], f"{row[3]:.12g}", f"{row[4]:.12g}", row[5]])


if __name__ == "__main__":
    main()
