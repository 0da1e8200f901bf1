"""Experiment orchestration: problem assembly from config, multi-method
benchmark sweeps, warm-start penalty paths, and CSV emission.

A config is a plain mapping (typically parsed from YAML) with a problem
block, a method list, solver settings, and a seed list; see the repository
README for the schema.  Sweeps run serially in (method, seed) sorted order
so output files are deterministic byte for byte, except wall-time columns.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .core import StepConfig
from .problems import (
    BoxQPProblem,
    LassoProblem,
    LogisticProblem,
    MatrixCompletionProblem,
)
from .simgen import (
    CompletionSimSpec,
    LassoSimSpec,
    QPSimSpec,
    gen_completion_data,
    gen_lasso_data,
    gen_logistic_data,
    gen_qp,
    load_design,
    load_ratings,
)
from .solvers import (
    DaaremConfig,
    run_aa_restart,
    run_daarem,
    run_nesterov,
    run_nesterov_restart,
    run_nidaarem,
    run_pgd,
)

__all__ = [
    "MethodSpec",
    "ExperimentConfig",
    "RunResult",
    "SummaryRow",
    "ExperimentResult",
    "PathResult",
    "lambda_max_lasso",
    "lambda_max_logistic",
    "lambda_max_completion",
    "build_problem",
    "run_method",
    "run_experiment",
    "run_path",
    "write_experiment_csvs",
    "write_path_csvs",
]

METHOD_NAMES = ("pgd", "nesterov", "nesterov_restart", "aa_restart", "daarem", "nidaarem")
PROBLEM_KINDS = ("lasso", "logistic", "completion", "box_qp")

_DAAREM_KEYS = (
    "window", "damping_base", "damping_offset", "max_setback", "cond_limit",
    "accept_slack", "monitor", "resid_decay", "resid_scale", "resid_power",
    "cycle_slack", "subset", "subset_scale",
)


def lambda_max_lasso(X, y):
    """Smallest l1 penalty at which the lasso solution is exactly zero,
    ``max_j |X^T y|_j`` for the half squared error loss."""
    return float(np.max(np.abs(np.asarray(X).T @ np.asarray(y)))) if np.asarray(X).size else 0.0


def lambda_max_logistic(X, y):
    """Smallest l1 penalty at which the logistic solution is exactly zero,
    ``max_j |X^T (1/2 - y)|_j``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.max(np.abs(X.T @ (0.5 - y))))


def lambda_max_completion(n_rows, n_cols, rows, cols, vals):
    """Smallest nuclear-norm penalty at which the completion solution is the
    zero matrix: the top singular value of the observed entries scattered
    into a zero matrix."""
    Z = np.zeros((int(n_rows), int(n_cols)))
    Z[np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)] = vals
    return float(np.linalg.svd(Z, compute_uv=False)[0])


@dataclass
class MethodSpec:
    """One solver entry of a sweep: registry ``name``, unique ``label`` used
    in file names and summary rows, and runner-specific ``options``."""

    name: str
    label: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        name = data.pop("name", None)
        if name not in METHOD_NAMES:
            raise ValueError(f"unknown method {name!r}; choose from {METHOD_NAMES}")
        label = data.pop("label", name)
        return cls(name=name, label=str(label), options=data)


@dataclass
class ExperimentConfig:
    """Validated sweep description.

    ``problem`` keeps the raw problem block (kind plus generator parameters
    or file paths plus penalty policy); ``path_spec`` is the optional
    penalty-path block used by :func:`run_path`.
    """

    problem: dict
    methods: list
    seeds: list
    eps_stop: float = 1e-8
    max_iter: int = 100_000
    step: float | None = None
    out: str | None = None
    path_spec: dict | None = None

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        problem = data.get("problem")
        if not isinstance(problem, dict) or problem.get("kind") not in PROBLEM_KINDS:
            raise ValueError(
                f"problem block must set kind to one of {PROBLEM_KINDS}"
            )
        for key in ("design", "response", "ratings"):
            path = problem.get(key)
            if path is not None and not os.path.exists(path):
                raise FileNotFoundError(f"problem {key} file does not exist: {path}")
        raw_methods = data.get("methods") or []
        if not raw_methods:
            raise ValueError("config needs at least one method")
        methods = [MethodSpec.from_dict(m) for m in raw_methods]
        labels = [m.label for m in methods]
        if len(set(labels)) != len(labels):
            raise ValueError(
                f"method labels must be unique, got {labels}; set 'label' to disambiguate"
            )
        seeds = data.get("seeds", [0])
        if isinstance(seeds, int):
            seeds = [seeds]
        if not seeds:
            raise ValueError("config needs at least one seed")
        solver = data.get("solver") or {}
        return cls(
            problem=problem,
            methods=methods,
            seeds=[int(s) for s in seeds],
            eps_stop=float(solver.get("eps_stop", 1e-8)),
            max_iter=int(solver.get("max_iter", 100_000)),
            step=solver.get("step"),
            out=data.get("out"),
            path_spec=data.get("path"),
        )

    @classmethod
    def from_file(cls, path):
        import yaml

        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a mapping")
        return cls.from_dict(data)

    def step_config(self):
        return StepConfig(step=self.step, eps_stop=self.eps_stop, max_iter=self.max_iter)


def _dataset(problem, seed):
    """Materialize the data for one seed.

    Returns ``(make, lam_max)`` where ``make(penalty)`` builds the problem
    instance (caching the Lipschitz bound across penalties, which does not
    depend on the penalty for any backend) and ``lam_max`` is the smallest
    penalty with an all-zero solution (None for box QP).
    """
    kind = problem["kind"]
    if kind == "box_qp":
        spec = QPSimSpec(
            p=int(problem["p"]),
            cond=float(problem.get("cond", 1e4)),
            noise_sd=float(problem.get("noise_sd", 0.2)),
            seed=seed,
        )
        Q, q = gen_qp(spec)

        def make(penalty, _cache={}):
            if "problem" not in _cache:
                _cache["problem"] = BoxQPProblem(Q, q)
            return _cache["problem"]

        return make, None

    if kind in ("lasso", "logistic"):
        if "design" in problem:
            X, y = load_design(problem["design"], problem["response"])
        else:
            spec = LassoSimSpec(
                n=int(problem["n"]),
                p=int(problem["p"]),
                rho=float(problem.get("rho", 0.0)),
                sparsity=float(problem.get("sparsity", 0.8)),
                seed=seed,
            )
            if kind == "lasso":
                X, y, _ = gen_lasso_data(spec)
            else:
                X, y, _ = gen_logistic_data(spec)
        if kind == "lasso":
            lam_max = lambda_max_lasso(X, y)
            cls_ = LassoProblem
        else:
            lam_max = lambda_max_logistic(X, y)
            cls_ = LogisticProblem

        def make(penalty, _cache={}):
            prob = cls_(X, y, penalty, lipschitz=_cache.get("lipschitz"))
            _cache["lipschitz"] = prob.lipschitz
            return prob

        return make, lam_max

    # completion
    if "ratings" in problem:
        base = load_ratings(problem["ratings"])
        rows, cols = np.divmod(base.observed_flat, base.n_cols)
        vals = base.observed_vals
        n_rows, n_cols = base.n_rows, base.n_cols
    else:
        spec = CompletionSimSpec(
            n_rows=int(problem["n_rows"]),
            n_cols=int(problem["n_cols"]),
            rank=int(problem.get("rank", 3)),
            obs_fraction=float(problem.get("obs_fraction", 0.5)),
            noise_sd=float(problem.get("noise_sd", 0.1)),
            seed=seed,
        )
        rows, cols, vals, _ = gen_completion_data(spec)
        n_rows, n_cols = spec.n_rows, spec.n_cols
    lam_max = lambda_max_completion(n_rows, n_cols, rows, cols, vals)

    def make(penalty):
        return MatrixCompletionProblem(n_rows, n_cols, rows, cols, vals, penalty)

    return make, lam_max


def _resolve_penalty(problem, lam_max):
    if problem["kind"] == "box_qp":
        return 0.0
    if "penalty" in problem:
        return float(problem["penalty"])
    scale = float(problem.get("penalty_scale", 0.1))
    return scale * lam_max


def build_problem(problem, seed):
    """Build the configured problem instance for one seed."""
    make, lam_max = _dataset(problem, seed)
    return make(_resolve_penalty(problem, lam_max))


def _daarem_from_options(options):
    return DaaremConfig(**{k: options[k] for k in _DAAREM_KEYS if k in options})


def run_method(method, problem, x0, cfg):
    """Dispatch one solver run for a :class:`MethodSpec`."""
    o = method.options
    if method.name == "pgd":
        return run_pgd(problem, x0, cfg)
    if method.name == "nesterov":
        return run_nesterov(problem, x0, cfg)
    if method.name == "nesterov_restart":
        return run_nesterov_restart(problem, x0, cfg, criterion=o.get("criterion", "objective"))
    if method.name == "aa_restart":
        return run_aa_restart(problem, x0, cfg, window=int(o.get("window", 10)))
    if method.name == "daarem":
        return run_daarem(problem, x0, cfg, daarem=_daarem_from_options(o))
    if method.name == "nidaarem":
        return run_nidaarem(
            problem, x0, cfg,
            daarem=_daarem_from_options(o),
            switch=o.get("switch", "objective"),
            switch_cap=int(o.get("switch_cap", 1000)),
        )
    raise ValueError(f"unknown method {method.name!r}")


@dataclass
class RunResult:
    """One (method, seed) outcome; ``status`` is ``ok``, ``max_iter``, or an
    ``error: ...`` string, and ``report`` is None only for errors."""

    method: str
    seed: int
    status: str
    report: object


@dataclass
class SummaryRow:
    """Per-method aggregates over the configured seed list."""

    method: str
    runs: int
    converged: int
    pg_steps_mean: float
    pg_steps_median: float
    pg_steps_sd: float
    wall_mean: float
    wall_median: float
    objective_mean: float


@dataclass
class ExperimentResult:
    runs: list
    summary: list
    best_objective: float
    failures: list


def _summarize(label, results):
    reports = [r.report for r in results if r.report is not None]
    pg = np.array([rep.pg_steps for rep in reports], dtype=np.float64)
    wall = np.array([rep.wall_time for rep in reports], dtype=np.float64)
    obj = np.array([rep.final_objective for rep in reports], dtype=np.float64)
    if pg.size == 0:
        return SummaryRow(label, len(results), 0, *(float("nan"),) * 6)
    sd = float(np.std(pg, ddof=1)) if pg.size > 1 else 0.0
    return SummaryRow(
        method=label,
        runs=len(results),
        converged=sum(1 for r in results if r.status == "ok"),
        pg_steps_mean=float(np.mean(pg)),
        pg_steps_median=float(np.median(pg)),
        pg_steps_sd=sd,
        wall_mean=float(np.mean(wall)),
        wall_median=float(np.median(wall)),
        objective_mean=float(np.mean(obj)),
    )


def run_experiment(config, out_dir=None):
    """Run the full (method x seed) sweep of a config.

    Runs execute serially in (method label, seed) sorted order.  A run that
    raises is recorded with an error status and does not abort the sweep.
    When ``out_dir`` is given, per-run trace CSVs plus ``summary.csv``,
    ``runs.csv``, and ``metadata.csv`` are written there.
    """
    cfg = config.step_config()
    methods = sorted(config.methods, key=lambda m: m.label)
    seeds = sorted(config.seeds)
    runs = []
    for method in methods:
        for seed in seeds:
            try:
                problem = build_problem(config.problem, seed)
                report = run_method(method, problem, np.zeros(problem.dim), cfg)
                status = "ok" if report.converged else "max_iter"
            except Exception as exc:  # noqa: BLE001 - sweep must survive bad runs
                report = None
                status = f"error: {exc}"
            runs.append(RunResult(method.label, seed, status, report))
    summary = [
        _summarize(method.label, [r for r in runs if r.method == method.label])
        for method in methods
    ]
    final_objs = [r.report.final_objective for r in runs if r.report is not None]
    best = float(min(final_objs)) if final_objs else float("nan")
    failures = [
        {"method": r.method, "seed": r.seed, "status": r.status}
        for r in runs
        if r.status != "ok"
    ]
    result = ExperimentResult(runs, summary, best, failures)
    if out_dir is not None:
        write_experiment_csvs(result, out_dir)
    return result


@dataclass
class PathResult:
    """One (method, seed) sweep along a decreasing penalty sequence."""

    method: str
    seed: int
    penalties: list
    pg_steps: list
    iterations: list
    converged: list
    objectives: list
    wall_times: list

    @property
    def total_pg_steps(self):
        return int(sum(self.pg_steps))

    @property
    def total_wall_time(self):
        return float(sum(self.wall_times))

    @property
    def all_converged(self):
        return all(self.converged)


def _path_penalties(config, lam_max):
    spec = config.path_spec or {}
    if "penalties" in spec:
        pens = [float(v) for v in spec["penalties"]]
    else:
        num = int(spec.get("num", 10))
        decay = float(spec.get("decay", 0.01))
        start = float(spec.get("start_scale", 1.0)) * lam_max
        if num < 1 or not 0.0 < decay < 1.0 or start <= 0:
            raise ValueError("path grid needs num >= 1, 0 < decay < 1, positive start")
        pens = [start * decay ** (j / (num - 1.0)) for j in range(num)] if num > 1 else [start]
    if any(b >= a for a, b in zip(pens, pens[1:])):
        raise ValueError(f"penalty sequence must be strictly decreasing, got {pens}")
    return pens


def run_path(config, warm=True, out_dir=None):
    """Solve along a decreasing penalty sequence for every (method, seed).

    Each solve after the first starts from the previous solution when
    ``warm`` is true, and from zero otherwise.  The penalty grid comes from
    the config's ``path`` block: an explicit strictly decreasing
    ``penalties`` list, or ``num``/``decay``/``start_scale`` for the
    geometric grid ``lam_1 * decay ** ((j-1)/(num-1))`` anchored at
    ``start_scale`` times the zero-solution penalty.
    """
    if config.problem["kind"] == "box_qp":
        raise ValueError("penalty paths are not defined for box QP")
    cfg = config.step_config()
    methods = sorted(config.methods, key=lambda m: m.label)
    seeds = sorted(config.seeds)
    results = []
    for method in methods:
        for seed in seeds:
            make, lam_max = _dataset(config.problem, seed)
            pens = _path_penalties(config, lam_max)
            res = PathResult(method.label, seed, pens, [], [], [], [], [])
            x = None
            for pen in pens:
                problem = make(pen)
                x0 = np.zeros(problem.dim) if (x is None or not warm) else x
                report = run_method(method, problem, x0, cfg)
                x = report.final_x
                res.pg_steps.append(report.pg_steps)
                res.iterations.append(report.iterations)
                res.converged.append(bool(report.converged))
                res.objectives.append(report.final_objective)
                res.wall_times.append(report.wall_time)
            results.append(res)
    if out_dir is not None:
        write_path_csvs(results, out_dir)
    return results


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_trace_csv(path, report):
    """Write one run's per-iteration trace."""
    _write_csv(
        path,
        ["iter", "objective", "resid_norm", "pg_steps", "step_kind"],
        [(t.iteration, t.objective, t.resid_norm, t.pg_steps, t.step_kind) for t in report.trace],
    )


def write_experiment_csvs(result, out_dir):
    """Emit ``trace_<method>_<seed>.csv`` per run plus ``summary.csv``,
    ``runs.csv``, and ``metadata.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    for run in result.runs:
        if run.report is not None:
            write_trace_csv(
                os.path.join(out_dir, f"trace_{run.method}_{run.seed}.csv"), run.report
            )
    _write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["method", "runs", "converged", "pg_steps_mean", "pg_steps_median",
         "pg_steps_sd", "wall_mean", "wall_median", "objective_mean"],
        [(s.method, s.runs, s.converged, s.pg_steps_mean, s.pg_steps_median,
          s.pg_steps_sd, s.wall_mean, s.wall_median, s.objective_mean)
         for s in result.summary],
    )
    _write_csv(
        os.path.join(out_dir, "runs.csv"),
        ["method", "seed", "status", "converged", "pg_steps", "iterations",
         "final_objective", "final_resid_norm", "wall_time"],
        [
            (r.method, r.seed, r.status,
             r.report.converged if r.report else False,
             r.report.pg_steps if r.report else 0,
             r.report.iterations if r.report else 0,
             r.report.final_objective if r.report else float("nan"),
             r.report.final_resid_norm if r.report else float("nan"),
             r.report.wall_time if r.report else float("nan"))
            for r in result.runs
        ],
    )
    _write_csv(
        os.path.join(out_dir, "metadata.csv"),
        ["key", "value"],
        [("best_objective", result.best_objective),
         ("runs", len(result.runs)),
         ("failures", len(result.failures))],
    )


def write_path_csvs(results, out_dir):
    """Emit ``path_<method>_<seed>.csv`` per sweep plus ``path_summary.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    for res in results:
        _write_csv(
            os.path.join(out_dir, f"path_{res.method}_{res.seed}.csv"),
            ["index", "penalty", "pg_steps", "iterations", "converged",
             "final_objective", "wall_time"],
            [
                (j + 1, res.penalties[j], res.pg_steps[j], res.iterations[j],
                 res.converged[j], res.objectives[j], res.wall_times[j])
                for j in range(len(res.penalties))
            ],
        )
    _write_csv(
        os.path.join(out_dir, "path_summary.csv"),
        ["method", "seed", "total_pg_steps", "total_wall_time", "all_converged"],
        [(r.method, r.seed, r.total_pg_steps, r.total_wall_time, r.all_converged)
         for r in results],
    )
