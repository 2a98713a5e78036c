#!/usr/bin/env python3
"""Ridge-parameter search comparison table.

Runs the generalized cross-validation minimization on the synthetic
singular regression problem for every combination of trace back-end
(cholesky, hutchinson, slq) and tau source (direct evaluation at every
optimizer step, or a rational interpolant of degree 1 or 2 fitted to a
handful of exactly computed values). Prints one table row per run and
writes the rows as JSON.

The default problem seed is one whose realization shows the two-basin
cross-validation curve this construction is designed to produce.
"""

import argparse
import json
from pathlib import Path

from traceinv.experiments import gcv_experiment, make_gcv_problem, relative_log_theta_error

MODES = {"exact": None, "rational1": 1, "rational2": 2}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--m", type=int, default=500)
    parser.add_argument("--s", type=float, default=1e-3)
    parser.add_argument("--sigma", type=float, default=0.4)
    parser.add_argument("--seed", type=int, default=287)
    parser.add_argument("--de-seed", type=int, default=0)
    parser.add_argument("--nv", type=int, default=30)
    parser.add_argument("--degree", type=int, default=30)
    parser.add_argument("--methods", nargs="+",
                        default=["cholesky", "hutchinson", "slq"])
    parser.add_argument("--modes", nargs="+", default=list(MODES),
                        choices=list(MODES))
    parser.add_argument("--max-generations", type=int, default=200,
                        help="optimizer budget; the no-interpolation rows with a "
                             "stochastic back-end use all of it, so lower this "
                             "for a quick pass")
    parser.add_argument("--out", type=Path, default=Path("gcv-results"))
    args = parser.parse_args()

    problem = make_gcv_problem(n=args.n, m=args.m, seed=args.seed, s=args.s,
                               sigma=args.sigma)
    print(f"{'method':<11}{'tau source':<13}{'N_tr':>6}{'N_tot':>7}"
          f"{'T_tr':>8}{'T_tot':>8}{'V(theta*)':>12}{'log10 theta*':>14}{'error':>9}")
    rows = []
    for method in args.methods:
        benchmark = None
        for mode in args.modes:
            res = gcv_experiment(problem, interpolation=MODES[mode], method=method,
                                 n_v=args.nv, degree=args.degree,
                                 trace_seed=args.seed, de_seed=args.de_seed,
                                 max_generations=args.max_generations)
            row = res.to_json()
            if MODES[mode] is None:
                benchmark = res
                row["error_vs_exact"] = 0.0
            elif benchmark is not None:
                row["error_vs_exact"] = relative_log_theta_error(
                    res.theta_star, benchmark.theta_star)
            error = row.get("error_vs_exact")
            print(f"{method:<11}{mode:<13}{res.n_tr:>6}{res.n_tot:>7}"
                  f"{res.t_tr:>8.2f}{res.t_tot:>8.2f}{res.v_min:>12.5f}"
                  f"{res.log10_theta_star:>14.4f}"
                  f"{'' if error is None else f'{error * 100:>8.2f}%'}")
            rows.append(row)

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "gcv_results.json", "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    print(f"rows written to {args.out}/gcv_results.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
