"""Micro-benchmarks for the compiled elementwise kernels.

Times each kernel against the pure NumPy reference on a few array sizes,
then compares end-to-end solver wall time under both backends by re-running
this interpreter with the fallback forced through PROXACCEL_PURE_PYTHON.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 1000,100000,1000000]
                                        [--repeats 7] [--no-solve]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from proxaccel._kernels import _reference

try:
    from proxaccel._kernels import _fastpath
except ImportError:
    _fastpath = None

KERNELS = ("soft_threshold", "clip_box", "sigmoid", "log1p_exp")

_SOLVE_SNIPPET = """\
import json, time
import numpy as np
from proxaccel import (LassoProblem, LassoSimSpec, LogisticProblem, StepConfig,
                       gen_lasso_data, gen_logistic_data, kernel_backend,
                       lambda_max_lasso, lambda_max_logistic, run_daarem)
X, y, _ = gen_lasso_data(LassoSimSpec(n=300, p=600, rho=0.5, seed=0))
lasso = LassoProblem(X, y, 0.05 * lambda_max_lasso(X, y))
Xg, yg, _ = gen_logistic_data(LassoSimSpec(n=400, p=200, rho=0.3, seed=0))
logit = LogisticProblem(Xg, yg, 0.02 * lambda_max_logistic(Xg, yg))
out = {"backend": kernel_backend}
for name, prob in (("lasso", lasso), ("logistic", logit)):
    t0 = time.perf_counter()
    rep = run_daarem(prob, np.zeros(prob.dim), StepConfig(eps_stop=1e-8))
    out[name] = {"wall": time.perf_counter() - t0, "pg_steps": rep.pg_steps,
                 "converged": rep.converged}
print(json.dumps(out))
"""


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_args(name, x):
    if name == "soft_threshold":
        return (x, 0.3)
    if name == "clip_box":
        return (x, -1.0, 1.0)
    return (x,)


def bench_kernels(sizes, repeats):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'n':>10}{'numpy':>12}{'compiled':>12}{'speedup':>9}")
    for n in sizes:
        x = 3.0 * rng.standard_normal(n)
        for name in KERNELS:
            args = kernel_args(name, x)
            ref = _time(getattr(_reference, name), args, repeats)
            if _fastpath is None:
                print(f"{name:<15}{n:>10}{ref:>12.2e}{'absent':>12}{'':>9}")
                continue
            fast = _time(getattr(_fastpath, name), args, repeats)
            # correctness spot check rides along with the timing
            ref_out = getattr(_reference, name)(*args)
            fast_out = getattr(_fastpath, name)(*args)
            assert np.allclose(ref_out, fast_out, rtol=1e-12, atol=1e-300)
            print(f"{name:<15}{n:>10}{ref:>12.2e}{fast:>12.2e}{ref / fast:>9.2f}")


def solve_comparison():
    results = {}
    for label, force in (("compiled", None), ("numpy", "1")):
        env = dict(os.environ)
        env.pop("PROXACCEL_PURE_PYTHON", None)
        if force is not None:
            env["PROXACCEL_PURE_PYTHON"] = force
        proc = subprocess.run([sys.executable, "-c", _SOLVE_SNIPPET],
                              capture_output=True, text=True, env=env, check=True)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    print("\nfull solves (damped Anderson to 1e-8), wall seconds:")
    print(f"{'problem':<12}{'numpy':>10}{'compiled':>11}{'speedup':>9}")
    for prob in ("lasso", "logistic"):
        ref = results["numpy"][prob]
        fast = results["compiled"][prob]
        assert ref["pg_steps"] == fast["pg_steps"], "backends must take identical paths"
        print(f"{prob:<12}{ref['wall']:>10.3f}{fast['wall']:>11.3f}"
              f"{ref['wall'] / fast['wall']:>9.2f}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1000,100000,1000000",
                        help="comma-separated array lengths")
    parser.add_argument("--repeats", type=int, default=7,
                        help="timing repeats; the minimum is reported")
    parser.add_argument("--no-solve", action="store_true",
                        help="skip the end-to-end solver comparison")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    bench_kernels(sizes, args.repeats)
    if not args.no_solve:
        if _fastpath is None:
            print("\ncompiled backend absent; skipping the solver comparison")
        else:
            solve_comparison()
    return 0


if __name__ == "__main__":
    sys.exit(main())
