"""``screenlab`` command line.

Exit codes: 0 success, 2 config error, 3 numeric/solver failure,
4 reproduction check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import intro
from .analysis import check_fosd, convergence_curve, gap_table
from .config import ConfigError, ExperimentConfig, grid_override, load_config
from .costs import LOG_BASE, CostSpec, cost_accuracy, cost_capacity
from .distributions import DistributionError
from .montecarlo import InsufficientAcceptance, cross_validate
from .screening import (
    ScreeningError,
    posterior_to_distribution,
    run_strategy,
    solve_stage_capacities,
    solve_strategy,
)

log = logging.getLogger("screenlab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_REPRO = 0, 2, 3, 4


def fmt(v) -> str:
    return f"{float(v):.12g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([r if isinstance(r, (int, np.integer)) else fmt(r) for r in row])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def solve_config(cfg: ExperimentConfig):
    """Posterior and strategy record for a config's strategy block."""
    sp = cfg.problem()
    s = cfg.strategy
    if s.kind == "explicit" and s.thresholds is not None:
        return run_strategy(sp, s.thresholds)
    if s.kind == "explicit":
        return solve_stage_capacities(sp, s.stage_capacities)
    return solve_strategy(sp, s.kind)


def cmd_posterior(path, out_dir=None) -> dict:
    cfg = load_config(path)
    out = Path(out_dir) if out_dir else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    post, strategy = solve_config(cfg)
    law = posterior_to_distribution(post)
    x = law.knots_x
    write_csv(out / "posterior_cdf.csv", ["v", "F"], zip(x, law.cdf(x)))
    write_csv(out / "posterior_pdf.csv", ["v", "f"], zip(x, law.knots_f))
    write_json(out / "strategy.json", strategy.to_json())
    summary = {
        "mean": post.mean(),
        "stage_capacities": list(strategy.stage_capacities),
        "overall_capacity": strategy.overall_capacity,
        "requested_capacity": cfg.capacity,
        "meets_capacity": strategy.meets_capacity,
        "support": [law.support_lo, law.support_hi],
        "grid_resolution": cfg.grid_resolution,
        "capacity_cost": cost_capacity(strategy.stage_capacities),
        "log_base": LOG_BASE,
    }
    if cfg.mc is not None:
        cv = cross_validate(cfg.problem(), strategy.thresholds, cfg.mc)
        summary["mc"] = cv.to_json()
        (out / "mc_cdf.csv").write_text(cv.estimate.cdf_csv())
    write_json(out / "summary.json", summary)
    return summary


def cmd_compare(path_a, path_b, out_dir=None, tol: float = 1e-6) -> dict:
    cfg_a, cfg_b = load_config(path_a), load_config(path_b)
    ia, ib = cfg_a.impact, cfg_b.impact
    if not (np.array_equal(ia.knots_x, ib.knots_x) and np.allclose(ia.knots_f, ib.knots_f, rtol=0, atol=1e-12)):
        raise ConfigError("both configs must share the impact distribution", "impact", source=str(path_b))
    out = Path(out_dir) if out_dir else cfg_a.output_dir
    out.mkdir(parents=True, exist_ok=True)
    A = posterior_to_distribution(solve_config(cfg_a)[0])
    B = posterior_to_distribution(solve_config(cfg_b)[0])
    report = check_fosd(A, B, tol).to_json()
    write_json(out / "dominance.json", report)
    write_csv(out / "gap.csv", ["v", "F_A", "F_B", "gap"], gap_table(A, B))
    return report


def cmd_converge(path, ks=None, kinds=None, out_dir=None) -> dict:
    cfg = load_config(path)
    ks = list(ks or cfg.ks or [])
    if not ks:
        raise ConfigError("no stage counts given (use --ks or a 'ks' config field)", "ks")
    kinds = list(kinds or [cfg.strategy.kind])
    for kind in kinds:
        if kind not in ("fixed_threshold", "fixed_capacity"):
            raise ConfigError(f"convergence needs a stationary strategy kind, got {kind!r}", "strategy.kind")
    noise = cfg.noises[0]
    if any(not noise.same_law(n) for n in cfg.noises[1:]):
        raise ConfigError("convergence runs repeat one noise law; config noises differ", "noises")
    out = Path(out_dir) if out_dir else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    curves = {}
    for kind in kinds:
        curve = convergence_curve(cfg.impact, noise, cfg.capacity, ks, kind)
        (out / f"convergence_{kind}.csv").write_text(curve.to_csv())
        curves[kind] = curve.to_json()
    if len(kinds) == 1:
        (out / "convergence.csv").write_text(curve.to_csv())
    write_json(out / "convergence.json", curves)
    return curves


def cmd_reproduce_intro(mc_samples: int, seed: int, out_dir, grid=None, workers: int = 1) -> intro.IntroReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = intro.reproduce(mc_samples, seed, grid, workers)
    for key, o in rep.outcomes.items():
        x = o.law.knots_x
        write_csv(out / f"cdf_{key}.csv", ["v", "F"], zip(x, o.law.cdf(x)))
    write_json(out / "expected_values.json", rep.expected_values())
    write_json(out / "dominance.json", rep.dominance)
    write_json(out / "reversal.json", rep.reversal)
    if rep.mc:
        write_json(out / "mc_crosscheck.json", rep.mc)
    write_json(out / "report.json", rep.to_json())
    return rep


def cmd_cost(which: str, path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read cost spec: {exc.strerror}", source=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno, source=str(path)) from None
    if not isinstance(obj, dict):
        raise ConfigError("cost spec must be a JSON object", source=str(path))
    try:
        if which == "accuracy":
            spec = CostSpec.from_json(obj)
            value = cost_accuracy(spec)
        else:
            extra = set(obj) - {"stage_capacities", "alphas", "overall"}
            if extra:
                raise DistributionError(f"unknown fields: {sorted(extra)}")
            value = cost_capacity(obj["stage_capacities"])
    except KeyError as exc:
        raise ConfigError("missing required field", exc.args[0], source=str(path)) from None
    except (DistributionError, TypeError) as exc:
        raise ConfigError(str(exc), source=str(path)) from None
    return {"cost": which, "value": value, "log_base": LOG_BASE}


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("stage counts must be positive integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="screenlab", description="Multi-stage noisy screening experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("posterior", help="solve a strategy and write the post-screening law")
    p.add_argument("config")
    p.add_argument("--out", help="override output_dir")

    p = sub.add_parser("compare", help="first-order dominance between two configs' posteriors")
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.add_argument("--out", help="output directory (default: output_dir of config A)")
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("converge", help="distance to noiseless screening as stages grow")
    p.add_argument("config")
    p.add_argument("--ks", type=_int_list)
    p.add_argument("--kinds", type=lambda s: [k for k in s.split(",") if k])
    p.add_argument("--out")

    p = sub.add_parser("reproduce-intro", help="rerun the uniform one- vs two-stage example")
    p.add_argument("--mc-samples", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", default="reproduce_intro")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("cost", help="evaluate an illustrative cost function")
    p.add_argument("which", choices=["accuracy", "capacity"])
    p.add_argument("spec")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "posterior":
            res = cmd_posterior(args.config, args.out)
            print(json.dumps({k: res[k] for k in ("mean", "overall_capacity", "stage_capacities")}))
        elif args.command == "compare":
            res = cmd_compare(args.config_a, args.config_b, args.out, args.tol)
            print(json.dumps({k: res[k] for k in ("verdict", "max_gap_A_over_B", "max_gap_B_over_A",
                                                  "cdf_crossings")}))
        elif args.command == "converge":
            res = cmd_converge(args.config, args.ks, args.kinds, args.out)
            print(json.dumps(res))
        elif args.command == "reproduce-intro":
            grid = grid_override(None)
            rep = cmd_reproduce_intro(args.mc_samples, args.seed, args.out, grid, args.workers)
            for name, check in rep.checks.items():
                print(f"{'PASS' if check['passed'] else 'FAIL'}  {name}")
            if not rep.passed:
                print("reproduction checks failed; see report.json", file=sys.stderr)
                return EXIT_REPRO
        elif args.command == "cost":
            print(json.dumps(cmd_cost(args.which, args.spec)))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScreeningError, InsufficientAcceptance, DistributionError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
