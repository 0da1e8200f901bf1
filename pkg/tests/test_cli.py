"""Command line front end, exercised in process through ``cli.main``."""

import json
import textwrap

import numpy as np
import pytest

from proxaccel import cli
from proxaccel import (
    CompletionSimSpec,
    LassoSimSpec,
    QPSimSpec,
    gen_completion_data,
    gen_lasso_data,
    gen_qp,
    load_design,
    load_ratings,
)


def write_config(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


@pytest.fixture
def lasso_yaml(tmp_path):
    return write_config(tmp_path, """\
        problem:
          kind: lasso
          n: 30
          p: 20
          rho: 0.3
          penalty_scale: 0.2
        methods:
          - name: pgd
          - name: daarem
        seeds: [0]
        solver:
          eps_stop: 1.0e-8
          max_iter: 20000
        """)


class TestSolve:
    def test_happy_path(self, lasso_yaml, capsys):
        assert cli.main(["solve", "--config", lasso_yaml]) == 0
        out = capsys.readouterr().out
        assert "method=pgd seed=0 converged=True" in out
        assert "final_objective=" in out
        assert "pg_steps=" in out

    def test_method_and_seed_overrides(self, lasso_yaml, capsys):
        assert cli.main(["solve", "--config", lasso_yaml,
                         "--method", "daarem", "--seed", "5"]) == 0
        out = capsys.readouterr().out
        assert "method=daarem seed=5 converged=True" in out

    def test_out_writes_the_trace(self, lasso_yaml, tmp_path, capsys):
        out_dir = tmp_path / "solve_out"
        assert cli.main(["solve", "--config", lasso_yaml, "--out", str(out_dir)]) == 0
        trace = out_dir / "trace_pgd_0.csv"
        assert trace.exists()
        assert trace.read_text().splitlines()[0] == "iter,objective,resid_norm,pg_steps,step_kind"
        assert f"trace={trace}" in capsys.readouterr().out

    def test_non_converged_exits_one_with_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path, """\
            problem: {kind: lasso, n: 30, p: 20, rho: 0.3}
            methods: [{name: pgd}]
            solver: {max_iter: 1}
            """)
        assert cli.main(["solve", "--config", cfg]) == 1
        last = capsys.readouterr().out.strip().splitlines()[-1]
        assert json.loads(last) == {
            "failures": [{"method": "pgd", "seed": 0, "status": "max_iter"}]}

    def test_unknown_method_label_exits_two(self, lasso_yaml, capsys):
        assert cli.main(["solve", "--config", lasso_yaml, "--method", "sgd"]) == 2
        err = capsys.readouterr().err
        assert "error:" in err and "not in config" in err


class TestBench:
    def test_happy_path_writes_csvs(self, lasso_yaml, tmp_path, capsys):
        out_dir = tmp_path / "bench_out"
        assert cli.main(["bench", "--config", lasso_yaml, "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        assert "pgd: runs=1 converged=1" in out
        assert "daarem: runs=1 converged=1" in out
        assert "best_objective=" in out
        for name in ("trace_pgd_0.csv", "trace_daarem_0.csv", "summary.csv",
                     "runs.csv", "metadata.csv"):
            assert (out_dir / name).exists(), name

    def test_seed_override_restricts_the_sweep(self, lasso_yaml, capsys):
        assert cli.main(["bench", "--config", lasso_yaml, "--seed", "2"]) == 0
        out = capsys.readouterr().out
        assert "pgd: runs=1" in out

    def test_failures_exit_one_with_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path, """\
            problem: {kind: lasso, n: 30, p: 20, rho: 0.3}
            methods: [{name: pgd}, {name: nesterov}]
            solver: {max_iter: 2}
            """)
        assert cli.main(["bench", "--config", cfg]) == 1
        last = capsys.readouterr().out.strip().splitlines()[-1]
        failures = json.loads(last)["failures"]
        assert {f["method"] for f in failures} == {"pgd", "nesterov"}
        assert all(f["status"] == "max_iter" for f in failures)

    def test_bad_config_exits_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "problem: {kind: ridge}\nmethods: [{name: pgd}]\n")
        assert cli.main(["bench", "--config", cfg]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file_exits_two(self, tmp_path, capsys):
        assert cli.main(["bench", "--config", str(tmp_path / "absent.yaml")]) == 2
        assert "error:" in capsys.readouterr().err


class TestPath:
    def test_happy_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path, """\
            problem: {kind: lasso, n: 30, p: 20, rho: 0.3}
            methods: [{name: pgd}]
            path: {num: 3, decay: 0.1}
            """)
        out_dir = tmp_path / "path_out"
        assert cli.main(["path", "--config", cfg, "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        assert "pgd seed=0: penalties=3" in out
        assert "total_pg_steps=" in out
        assert out.count("penalty=") == 3
        assert (out_dir / "path_pgd_0.csv").exists()
        assert (out_dir / "path_summary.csv").exists()

    def test_cold_start_flag_in_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, """\
            problem: {kind: lasso, n: 30, p: 20, rho: 0.3}
            methods: [{name: pgd}]
            path: {num: 3, decay: 0.1, warm: false}
            """)
        assert cli.main(["path", "--config", cfg]) == 0
        assert "all_converged=True" in capsys.readouterr().out

    def test_box_qp_exits_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, """\
            problem: {kind: box_qp, p: 5, cond: 10.0}
            methods: [{name: pgd}]
            path: {num: 3, decay: 0.1}
            """)
        assert cli.main(["path", "--config", cfg]) == 2
        assert "box QP" in capsys.readouterr().err


class TestGen:
    def test_lasso_files_round_trip(self, tmp_path, capsys):
        cfg = write_config(tmp_path, """\
            problem: {kind: lasso, n: 12, p: 7, rho: 0.5}
            methods: [{name: pgd}]
            seeds: [3]
            """)
        out_dir = tmp_path / "data"
        assert cli.main(["gen", "--config", cfg, "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        for name in ("X_3.csv", "y_3.csv", "beta_3.csv"):
            assert (out_dir / name).exists(), name
            assert f"wrote {out_dir / name}" in out
        X, y = load_design(out_dir / "X_3.csv", out_dir / "y_3.csv")
        Xe, ye, be = gen_lasso_data(LassoSimSpec(n=12, p=7, rho=0.5, seed=3))
        # 17 significant digits round trip float64 exactly
        np.testing.assert_array_equal(X, Xe)
        np.testing.assert_array_equal(y, ye)

    def test_multiple_seeds_write_separate_files(self, tmp_path):
        cfg = write_config(tmp_path, """\
            problem: {kind: lasso, n: 5, p: 4}
            methods: [{name: pgd}]
            seeds: [0, 1]
            """)
        out_dir = tmp_path / "data"
        assert cli.main(["gen", "--config", cfg, "--out", str(out_dir)]) == 0
        assert (out_dir / "X_0.csv").exists()
        assert (out_dir / "X_1.csv").exists()

    def test_qp_files(self, tmp_path):
        cfg = write_config(tmp_path, """\
            problem: {kind: box_qp, p: 6, cond: 100.0}
            methods: [{name: pgd}]
            """)
        out_dir = tmp_path / "data"
        assert cli.main(["gen", "--config", cfg, "--out", str(out_dir)]) == 0
        Q = np.loadtxt(out_dir / "Q_0.csv", delimiter=",")
        Qe, qe = gen_qp(QPSimSpec(p=6, cond=100.0, seed=0))
        np.testing.assert_array_equal(Q, Qe)
        q = np.loadtxt(out_dir / "q_0.csv", delimiter=",")
        np.testing.assert_array_equal(q, qe)

    def test_completion_ratings_round_trip(self, tmp_path):
        cfg = write_config(tmp_path, """\
            problem: {kind: completion, n_rows: 8, n_cols: 6, rank: 2, obs_fraction: 0.4}
            methods: [{name: pgd}]
            seeds: [2]
            """)
        out_dir = tmp_path / "data"
        assert cli.main(["gen", "--config", cfg, "--out", str(out_dir)]) == 0
        spec = CompletionSimSpec(n_rows=8, n_cols=6, rank=2, obs_fraction=0.4, seed=2)
        rows, cols, vals, full = gen_completion_data(spec)
        prob = load_ratings(out_dir / "ratings_2.tsv", n_rows=8, n_cols=6)
        np.testing.assert_array_equal(prob.observed_flat, rows * 6 + cols)
        np.testing.assert_array_equal(prob.observed_vals, vals)
        stored = np.loadtxt(out_dir / "full_2.csv", delimiter=",")
        np.testing.assert_array_equal(stored, full)


class TestParser:
    def test_help_lists_all_subcommands(self):
        text = cli.build_parser().format_help()
        for name in ("solve", "bench", "path", "gen"):
            assert name in text

    def test_missing_subcommand_is_a_parse_error(self):
        with pytest.raises(SystemExit):
            cli.main([])

    def test_config_flag_is_required(self):
        with pytest.raises(SystemExit):
            cli.main(["bench"])
