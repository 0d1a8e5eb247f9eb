"""Report emission: median convergence curves as CSV files, a run manifest,
and matplotlib figures rendered alongside the delimited output.

The main CSV files carry only deterministic columns so that identical
specs produce byte-identical files; wall-clock medians go to a sidecar
``timing_*.csv`` since absolute seconds are machine-relative.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402
from .bench import (AggregateResult, ExperimentSpec, gen_instance,  # noqa: E402
                    pad_traces)
from .fields import Field  # noqa: E402
from .objective import QuadraticModel  # noqa: E402
from .solvers import SolverConfig, gradient_descent  # noqa: E402
from . import fields, solvers  # noqa: E402

MEDIAN_COLUMNS = ("iter", "f", "grad_norm", "alpha", "beta", "restart")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def emit_csv(result: AggregateResult, out_dir) -> list[Path]:
    """One median-curve CSV per solver, plus timing sidecars and manifest."""
    if not result.per_solver:
        raise ValueError("empty result: no solvers were run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, agg in result.per_solver.items():
        traces = result.traces[name]
        length = len(agg.median_f)
        med_alpha = np.median(pad_traces(
            [[a if a is not None else 0.0 for a in t.alpha] for t in traces],
            length), axis=0)
        med_beta = np.median(pad_traces(
            [[b if b is not None else 0.0 for b in t.beta] for t in traces],
            length), axis=0)
        med_restart = np.median(pad_traces(
            [[1.0 if r else 0.0 for r in t.restart] for t in traces],
            length), axis=0)
        path = out / f"median_{name}_{agg.step_rule}.csv"
        _write_csv(path, MEDIAN_COLUMNS,
                   zip(range(length), agg.median_f, agg.median_grad_norm,
                       med_alpha, med_beta, med_restart))
        written.append(path)
        tpath = out / f"timing_{name}_{agg.step_rule}.csv"
        _write_csv(tpath, ("iter", "seconds"),
                   zip(range(length), agg.median_seconds))
        written.append(tpath)
    written.append(write_manifest(result.spec, out))
    return written


def write_manifest(spec: ExperimentSpec, out_dir) -> Path:
    """Plain-text key=value record of every resolved spec field."""
    out = Path(out_dir)
    lines = [f"version={__version__}"]
    for key in ("n", "num_realizations", "rate_low", "rate_high", "sigma",
                "master_seed", "output_dir"):
        lines.append(f"{key}={getattr(spec, key)}")
    lines.append(f"solvers={','.join(spec.solvers)}")
    for key, val in sorted(spec.config.__dict__.items()):
        lines.append(f"config.{key}={val}")
    path = out / "manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def emit_plots(result: AggregateResult, out_dir) -> list[Path]:
    """Median log10 objective vs. iteration and vs. seconds, one curve per
    solver, as vector (PDF) figures."""
    if not result.per_solver:
        raise ValueError("empty result: no solvers were run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for xlab, attr, fname in (
            ("iteration", None, "objective_vs_iteration.pdf"),
            ("seconds", "median_seconds", "objective_vs_time.pdf")):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for name, agg in result.per_solver.items():
            fmin = min(a.median_f.min() for a in result.per_solver.values())
            shifted = agg.median_f - fmin + 1e-16
            xs = np.arange(len(agg.median_f)) if attr is None \
                else getattr(agg, attr)
            ax.plot(xs, np.log10(shifted), label=name)
        ax.set_xlabel(xlab)
        ax.set_ylabel("log10(median f - best f)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out / fname
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def quadratic_fit_overlay(spec: ExperimentSpec, out_dir,
                          iterations=(1, 3, 6), realization: int = 0,
                          num_alphas: int = 60) -> tuple[Path, float]:
    """Overlay of the objective along the search direction against its
    local quadratic model at selected gradient-descent iterations.

    Returns the written path and the maximum relative gap between the two
    curves over the plotted step range at the last requested iteration.
    """
    _, _, x0, problem = gen_instance(spec, realization)
    cfg = SolverConfig(max_iters=max(iterations) + 1, grad_tol=0.0)
    # re-run descent capturing the quadratic model at each visited point
    snapshots = {}
    x = x0
    fval = problem.eval(x)
    for k in range(1, max(iterations) + 1):
        g = problem.grad(x)
        s = -g
        if k in iterations:
            snapshots[k] = (x, s)
        x, fval, _ = solvers._take_step(problem, x, s, g, fval, cfg)

    fig, axes = plt.subplots(1, len(iterations),
                             figsize=(4 * len(iterations), 3.2))
    axes = np.atleast_1d(axes)
    max_gap = 0.0
    for ax, k in zip(axes, iterations):
        xk, sk = snapshots[k]
        qm = QuadraticModel.at(problem, xk)
        alpha_star = solvers.newton_step_alpha(problem, xk, sk,
                                               f_at_x=qm.f0)
        alphas = np.linspace(0.0, 2.0 * alpha_star, num_alphas)
        truth = [problem.eval(fields.axpy(float(a), sk, xk)) for a in alphas]
        quad = [qm.value(float(a) * sk) for a in alphas]
        gap = max(abs(t - q) / max(abs(t), 1e-300)
                  for t, q in zip(truth, quad))
        max_gap = gap  # gap at the last (largest) requested iteration
        ax.plot(alphas, truth, label="objective")
        ax.plot(alphas, quad, "--", label="quadratic model")
        ax.axvline(alpha_star, color="gray", lw=0.6)
        ax.set_title(f"iteration {k}")
        ax.set_xlabel("step length")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "quadratic_model_overlay.pdf"
    fig.savefig(path)
    plt.close(fig)
    return path, max_gap
