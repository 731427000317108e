"""Command-line surface: recover, bench, coherence, oracle.

Exit codes: 0 success, 2 parse/flag/dimension errors, 3 algorithm
dead-ends, 4 enumeration-guard trips. All outputs are byte-identical for
identical flags and seeds; run-to-run timing is only recorded when
--timing is passed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .analytics import coherence_decay_check, mutual_coherence
from .errors import EnumerationGuard, PursuitError
from .experiments import ALGORITHM_CHOICES, ExperimentConfig, run_frequency_experiment
from .fileio import (
    FileFormatError,
    read_matrix,
    read_vector,
    recovery_to_dict,
    write_frequency_csv,
    write_report,
)
from .linalg import as_sensing_matrix
from .oracle import best_support
from .pursuit import StoppingRule, gomp, omp, qomp
from .sampling import gaussian_matrix


def _dump(doc, output=None):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(text):
    try:
        return [int(p) for p in str(text).split(",") if p != ""]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {err}")


def cmd_recover(args):
    matrix = read_matrix(args.matrix)
    b = read_vector(args.measurement)
    if b.size != matrix.shape[0]:
        raise ValueError(
            f"measurement length {b.size} does not match matrix rows {matrix.shape[0]}"
        )
    if args.sparsity < 1:
        raise ValueError("--sparsity must be positive")
    budget = args.max_iters if args.max_iters is not None else args.sparsity
    stop = StoppingRule(budget, args.tol)
    sm = as_sensing_matrix(matrix)
    if args.algo == "omp":
        result = omp(sm, b, stop)
    elif args.algo == "gomp":
        result = gomp(sm, b, args.gomp_n, stop)
    else:
        result = qomp(sm, b, stop)
    tol = stop.tolerance_for(float(np.linalg.norm(b)))
    if result.iterations_run == 0 and result.residual_history[-1] > tol:
        sys.stderr.write("recover: no admissible selection could reduce the residual\n")
        return 3
    _dump(recovery_to_dict(result, args.algo, *matrix.shape), args.output)
    return 0


def cmd_bench(args):
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("PURSUIT_THREADS", "1"))
    config = ExperimentConfig(
        m=args.m,
        n_ratios=tuple(args.ratios),
        sparsity_range=(args.sparsity_min, args.sparsity_max),
        trials=args.trials,
        algorithms=tuple(args.algos.split(",")),
        noise_eps=args.noise_eps,
        base_seed=args.seed,
        threads=threads,
        collect_timing=args.timing,
    )
    report = run_frequency_experiment(config)
    write_report(args.output, report)
    if args.csv:
        write_frequency_csv(args.csv, report)
    return 0


def cmd_coherence(args):
    if args.matrix:
        arr = read_matrix(args.matrix)
        sm = as_sensing_matrix(arr)
        report = mutual_coherence(sm)
        _dump(
            {
                "m": sm.rows,
                "n": sm.cols,
                "mu": report.mu,
                "argmax_pair": list(report.argmax_pair),
                "welch_lower": report.welch_lower,
                "f_value": report.f_value,
                "mu_times_f": report.mu_times_f,
            }
        )
        return 0
    if not args.m:
        raise ValueError("either --matrix or --m is required")
    m_values = args.m
    if len(m_values) == 1 and args.trials == 1:
        if not args.n:
            raise ValueError("single-matrix mode requires --n")
        sm = gaussian_matrix(m_values[0], args.n, args.seed)
        report = mutual_coherence(sm)
        _dump(
            {
                "m": sm.rows,
                "n": sm.cols,
                "seed": args.seed,
                "mu": report.mu,
                "argmax_pair": list(report.argmax_pair),
                "welch_lower": report.welch_lower,
                "f_value": report.f_value,
                "mu_times_f": report.mu_times_f,
            }
        )
        return 0
    if args.ratio is not None:
        aspect = args.ratio
    elif args.n:
        aspect = args.n / m_values[0]
    else:
        raise ValueError("decay mode requires --ratio or --n")
    rows = coherence_decay_check(m_values, aspect, args.trials, args.seed)
    _dump(
        {
            "aspect": aspect,
            "trials": args.trials,
            "seed": args.seed,
            "rows": [
                {
                    "m": r.m,
                    "mean_mu": r.mean_mu,
                    "mean_mu_f": r.mean_mu_f,
                    "fraction_bounded": r.fraction_bounded,
                }
                for r in rows
            ],
        }
    )
    return 0


def cmd_oracle(args):
    matrix = read_matrix(args.matrix)
    b = read_vector(args.measurement)
    if b.size != matrix.shape[0]:
        raise ValueError(
            f"measurement length {b.size} does not match matrix rows {matrix.shape[0]}"
        )
    support, coeff, rn = best_support(matrix, b, args.sparsity)
    _dump(
        {
            "support": [int(i) for i in support],
            "coefficients": [float(c) for c in coeff],
            "residual_norm": rn,
        }
    )
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qpursuit",
        description="Greedy sparse recovery, coherence analytics, and seeded benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="run one recovery on a matrix/measurement pair")
    p.add_argument("--matrix", required=True, help="matrix file (text or binary)")
    p.add_argument(
        "--measurement",
        required=True,
        help="measurement file: a one-column (m,1) or one-row (1,m) matrix file",
    )
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--algo", choices=("omp", "gomp", "qomp"), required=True)
    p.add_argument("--gomp-n", type=int, default=2, help="indices per gomp iteration")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="absolute residual tolerance")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("bench", help="run a seeded frequency experiment grid")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--ratios", type=_int_list, default=[4], help="n/m ratios, comma-separated")
    p.add_argument("--sparsity-min", type=int, required=True)
    p.add_argument("--sparsity-max", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument(
        "--algos",
        required=True,
        help=f"comma-separated subset of {','.join(ALGORITHM_CHOICES)}",
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise-eps", type=float, default=0.0)
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker processes (default: PURSUIT_THREADS or 1)",
    )
    p.add_argument("--timing", action="store_true", help="record mean runtimes per cell")
    p.add_argument("--output", required=True, help="report JSON path")
    p.add_argument("--csv", default=None, help="also write plot-ready CSV here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("coherence", help="coherence report or decay table")
    p.add_argument("--matrix", default=None, help="matrix file to analyze")
    p.add_argument("--m", type=_int_list, default=None, help="row counts, comma-separated")
    p.add_argument("--n", type=int, default=None, help="columns (single-matrix mode)")
    p.add_argument("--ratio", type=float, default=None, help="n/m aspect for decay mode")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("oracle", help="exhaustive optimal support for small problems")
    p.add_argument("--matrix", required=True)
    p.add_argument("--measurement", required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if err.code is not None else 0
    try:
        return args.func(args)
    except (FileFormatError, ValueError) as err:
        sys.stderr.write(f"qpursuit: {err}\n")
        return 2
    except EnumerationGuard as err:
        sys.stderr.write(f"qpursuit: {err}\n")
        return 4
    except PursuitError as err:
        sys.stderr.write(f"qpursuit: {err}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
