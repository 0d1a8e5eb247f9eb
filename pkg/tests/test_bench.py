"""Benchmark harness: instance generation, aggregation, CSV/plots, CLI."""

import csv
from pathlib import Path

import numpy as np
import pytest

from hessfree.bench import (ExperimentSpec, aggregate, gen_instance,
                            pad_traces, realization_seed, run_experiment)
from hessfree.cli import cli_main
from hessfree.report import (MEDIAN_COLUMNS, emit_csv, emit_plots,
                             quadratic_fit_overlay, write_manifest)
from hessfree.solvers import IterateTrace, SolverConfig
from hessfree.verify import run_checks

SMALL = dict(n=8, num_realizations=2, sigma=1.0, master_seed=7,
             config=SolverConfig(max_iters=8, grad_tol=1e-12))


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(n=0)
    with pytest.raises(ValueError):
        ExperimentSpec(num_realizations=0)
    with pytest.raises(ValueError):
        ExperimentSpec(rate_low=5.0, rate_high=1.0)


def test_realization_seeds_differ():
    a = realization_seed(1, 0).generate_state(4)
    b = realization_seed(1, 1).generate_state(4)
    c = realization_seed(2, 0).generate_state(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gen_instance_deterministic():
    spec = ExperimentSpec(**SMALL)
    x1, c1, s1, _ = gen_instance(spec, 1)
    x2, c2, s2, _ = gen_instance(spec, 1)
    assert np.array_equal(x1.data, x2.data)
    assert np.array_equal(c1.data, c2.data)
    assert np.array_equal(s1.data, s2.data)


def test_gen_instance_contract():
    spec = ExperimentSpec(**SMALL)
    x_true, c, x0, problem = gen_instance(spec, 0)
    assert x_true.data.min() >= spec.rate_low
    assert x_true.data.max() <= spec.rate_high
    assert np.all(x0.data == c.data.mean())
    assert problem.domain_check(x0)
    with pytest.raises(ValueError):
        gen_instance(spec, spec.num_realizations)


def _trace(fs):
    t = IterateTrace()
    for k, f in enumerate(fs):
        t.append(k, f, 1.0 / (k + 1), None, None, False, 0.01 * k)
    return t


def test_pad_traces_right_pads_with_final_value():
    out = pad_traces([[3.0, 2.0], [5.0]], 4)
    assert np.array_equal(out, [[3.0, 2.0, 2.0, 2.0], [5.0, 5.0, 5.0, 5.0]])


def test_aggregate_median_matches_sort_oracle():
    traces = [_trace([9.0, 4.0, 1.0]), _trace([7.0, 6.0]), _trace([5.0])]
    agg = aggregate("gd", "newton", traces, max_iters=10, num_failed=0)
    padded = np.array([[9.0, 4.0, 1.0], [7.0, 6.0, 6.0], [5.0, 5.0, 5.0]])
    oracle = np.sort(padded, axis=0)[1]  # middle of three
    assert np.array_equal(agg.median_f, oracle)


def test_run_experiment_median_of_one_equals_trace():
    spec = ExperimentSpec(n=8, num_realizations=1, sigma=1.0, master_seed=7,
                          solvers=("gd",),
                          config=SolverConfig(max_iters=8, grad_tol=1e-12))
    res = run_experiment(spec)
    trace = res.traces["gd"][0]
    assert np.array_equal(res.per_solver["gd"].median_f, trace.f)


def test_run_experiment_duplicate_solver_entries_agree():
    spec = ExperimentSpec(**SMALL, solvers=("cg-daniel", "cg-fr"))
    res1 = run_experiment(spec)
    res2 = run_experiment(spec)
    for name in spec.solvers:
        assert np.array_equal(res1.per_solver[name].median_f,
                              res2.per_solver[name].median_f)


def test_emit_csv_schema_and_round_trip(tmp_path):
    spec = ExperimentSpec(**SMALL, solvers=("gd",))
    res = run_experiment(spec)
    written = emit_csv(res, tmp_path)
    med = [p for p in written if p.name.startswith("median_")]
    assert len(med) == 1
    with open(med[0], newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == MEDIAN_COLUMNS
    fs = [float(r[1]) for r in rows[1:]]
    assert np.array_equal(fs, res.per_solver["gd"].median_f)
    assert (tmp_path / "manifest.txt").exists()
    assert (tmp_path / "timing_gd_newton.csv").exists()


def test_emit_csv_byte_determinism(tmp_path):
    spec = ExperimentSpec(**SMALL, solvers=("gd", "cg-daniel"))
    d1, d2 = tmp_path / "a", tmp_path / "b"
    emit_csv(run_experiment(spec), d1)
    emit_csv(run_experiment(spec), d2)
    for p1 in sorted(d1.glob("median_*.csv")) + [d1 / "manifest.txt"]:
        p2 = d2 / p1.name
        assert p1.read_bytes() == p2.read_bytes()


def test_emit_csv_empty_result_rejected(tmp_path):
    spec = ExperimentSpec(**SMALL)
    from hessfree.bench import AggregateResult
    empty = AggregateResult(spec, {}, {})
    with pytest.raises(ValueError):
        emit_csv(empty, tmp_path)


def test_manifest_records_spec_fields(tmp_path):
    spec = ExperimentSpec(**SMALL)
    path = write_manifest(spec, tmp_path)
    text = path.read_text()
    assert "n=8" in text
    assert "master_seed=7" in text
    assert "config.max_iters=8" in text
    assert "version=" in text


def test_emit_plots_writes_vector_figures(tmp_path):
    spec = ExperimentSpec(**SMALL, solvers=("gd",))
    res = run_experiment(spec)
    written = emit_plots(res, tmp_path)
    names = {p.name for p in written}
    assert names == {"objective_vs_iteration.pdf", "objective_vs_time.pdf"}
    for p in written:
        assert p.stat().st_size > 0
        assert p.read_bytes()[:5] == b"%PDF-"


def test_quadratic_overlay_gap_small(tmp_path):
    spec = ExperimentSpec(n=32, num_realizations=1, sigma=3.0, master_seed=0)
    path, gap = quadratic_fit_overlay(spec, tmp_path)
    assert path.exists()
    assert gap < 0.02


def test_verify_suite_passes(capsys):
    assert run_checks(n=4, seed=1)
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_cli_verify_subcommand(capsys):
    assert cli_main(["verify"]) == 0


def test_cli_rejects_bad_flags(capsys):
    assert cli_main(["run", "--n", "0"]) == 2
    assert cli_main(["run", "--no-such-flag"]) == 2


def test_cli_small_run_and_determinism(tmp_path, capsys):
    args = ["run", "--n", "8", "--realizations", "2", "--seed", "7",
            "--sigma", "1.0", "--solver", "gd", "--max-iters", "6",
            "--no-plots"]
    d1, d2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    assert cli_main(args + ["--out", d1]) == 0
    assert cli_main(args + ["--out", d2]) == 0
    for p1 in sorted(Path(d1).glob("median_*.csv")):
        assert p1.read_bytes() == (Path(d2) / p1.name).read_bytes()
    out = capsys.readouterr().out
    assert "median iterations to tolerance" in out
