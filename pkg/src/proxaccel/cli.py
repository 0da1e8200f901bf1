"""Command line front end.

Subcommands:
  solve   run one method on one seeded problem and print the outcome
  bench   run the full (method x seed) sweep of a config and write CSVs
  path    solve a warm-started decreasing penalty sequence
  gen     write the seeded synthetic dataset of a config to disk

Every numeric printed uses 12 significant digits.  ``bench``, ``solve``,
and ``path`` exit 0 only when every run converged; otherwise they exit 1
after printing a JSON failure list to stdout.
"""

import argparse
import json
import os
import sys

import numpy as np

from .bench import (
    ExperimentConfig,
    build_problem,
    run_experiment,
    run_method,
    run_path,
    write_trace_csv,
)
from .simgen import (
    CompletionSimSpec,
    LassoSimSpec,
    QPSimSpec,
    gen_completion_data,
    gen_lasso_data,
    gen_logistic_data,
    gen_qp,
)


def _load_config(args):
    config = ExperimentConfig.from_file(args.config)
    if getattr(args, "seed", None) is not None:
        config.seeds = [args.seed]
    if getattr(args, "method", None) is not None:
        keep = [m for m in config.methods if m.label == args.method]
        if not keep:
            raise ValueError(
                f"method {args.method!r} not in config; "
                f"available: {[m.label for m in config.methods]}"
            )
        config.methods = keep
    if getattr(args, "out", None) is not None:
        config.out = args.out
    return config


def _g(value):
    return f"{float(value):.12g}"


def _fail_exit(failures):
    if failures:
        print(json.dumps({"failures": failures}))
        return 1
    return 0


def _cmd_solve(args):
    config = _load_config(args)
    method = config.methods[0]
    seed = config.seeds[0]
    problem = build_problem(config.problem, seed)
    report = run_method(method, problem, np.zeros(problem.dim), config.step_config())
    print(f"method={method.label} seed={seed} converged={report.converged}")
    print(f"iterations={report.iterations} pg_steps={report.pg_steps}")
    print(f"final_objective={_g(report.final_objective)}")
    print(f"final_resid_norm={_g(report.final_resid_norm)}")
    print(f"wall_time={_g(report.wall_time)}")
    if config.out is not None:
        os.makedirs(config.out, exist_ok=True)
        path = os.path.join(config.out, f"trace_{method.label}_{seed}.csv")
        write_trace_csv(path, report)
        print(f"trace={path}")
    if not report.converged:
        return _fail_exit([{"method": method.label, "seed": seed, "status": "max_iter"}])
    return 0


def _cmd_bench(args):
    config = _load_config(args)
    result = run_experiment(config, out_dir=config.out)
    for row in result.summary:
        print(
            f"{row.method}: runs={row.runs} converged={row.converged} "
            f"pg_steps mean={_g(row.pg_steps_mean)} median={_g(row.pg_steps_median)} "
            f"sd={_g(row.pg_steps_sd)} wall mean={_g(row.wall_mean)} "
            f"median={_g(row.wall_median)} objective mean={_g(row.objective_mean)}"
        )
    print(f"best_objective={_g(result.best_objective)}")
    if config.out is not None:
        print(f"out={config.out}")
    return _fail_exit(result.failures)


def _cmd_path(args):
    config = _load_config(args)
    warm = True
    if config.path_spec and "warm" in config.path_spec:
        warm = bool(config.path_spec["warm"])
    results = run_path(config, warm=warm, out_dir=config.out)
    failures = []
    for res in results:
        print(
            f"{res.method} seed={res.seed}: penalties={len(res.penalties)} "
            f"total_pg_steps={res.total_pg_steps} "
            f"total_wall_time={_g(res.total_wall_time)} "
            f"all_converged={res.all_converged}"
        )
        for j, pen in enumerate(res.penalties):
            print(
                f"  penalty={_g(pen)} pg_steps={res.pg_steps[j]} "
                f"objective={_g(res.objectives[j])} converged={res.converged[j]}"
            )
        if not res.all_converged:
            failures.append(
                {"method": res.method, "seed": res.seed, "status": "max_iter"}
            )
    if config.out is not None:
        print(f"out={config.out}")
    return _fail_exit(failures)


def _save(path, array):
    np.savetxt(path, np.atleast_2d(array), delimiter=",", fmt="%.17g")
    print(f"wrote {path}")


def _cmd_gen(args):
    config = _load_config(args)
    problem = config.problem
    kind = problem["kind"]
    out = config.out or "."
    os.makedirs(out, exist_ok=True)
    for seed in config.seeds:
        tag = f"_{seed}"
        if kind in ("lasso", "logistic"):
            spec = LassoSimSpec(
                n=int(problem["n"]),
                p=int(problem["p"]),
                rho=float(problem.get("rho", 0.0)),
                sparsity=float(problem.get("sparsity", 0.8)),
                seed=seed,
            )
            gen = gen_lasso_data if kind == "lasso" else gen_logistic_data
            X, y, beta = gen(spec)
            _save(os.path.join(out, f"X{tag}.csv"), X)
            _save(os.path.join(out, f"y{tag}.csv"), y.reshape(-1, 1))
            _save(os.path.join(out, f"beta{tag}.csv"), beta.reshape(-1, 1))
        elif kind == "box_qp":
            spec = QPSimSpec(
                p=int(problem["p"]),
                cond=float(problem.get("cond", 1e4)),
                noise_sd=float(problem.get("noise_sd", 0.2)),
                seed=seed,
            )
            Q, q = gen_qp(spec)
            _save(os.path.join(out, f"Q{tag}.csv"), Q)
            _save(os.path.join(out, f"q{tag}.csv"), q.reshape(-1, 1))
        else:
            spec = CompletionSimSpec(
                n_rows=int(problem["n_rows"]),
                n_cols=int(problem["n_cols"]),
                rank=int(problem.get("rank", 3)),
                obs_fraction=float(problem.get("obs_fraction", 0.5)),
                noise_sd=float(problem.get("noise_sd", 0.1)),
                seed=seed,
            )
            rows, cols, vals, full = gen_completion_data(spec)
            path = os.path.join(out, f"ratings{tag}.tsv")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for i, j, v in zip(rows, cols, vals):
                    fh.write(f"{i + 1}\t{j + 1}\t{v:.17g}\t0\n")
            print(f"wrote {path}")
            _save(os.path.join(out, f"full{tag}.csv"), full)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="proxaccel",
        description="Proximal gradient solvers with Anderson style acceleration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("solve", _cmd_solve, "run one method on one seeded problem"),
        ("bench", _cmd_bench, "run the full method x seed sweep"),
        ("path", _cmd_path, "solve a warm-started decreasing penalty sequence"),
        ("gen", _cmd_gen, "write the seeded synthetic dataset to disk"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None,
                       help="replace the config seed list with this one seed")
        p.add_argument("--method", default=None,
                       help="restrict to the method with this label")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
