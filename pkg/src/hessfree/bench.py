"""Benchmark harness: seeded problem generation, solver sweeps over many
noise realizations, and median aggregation of the convergence traces."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .fields import Field
from .operators import GaussianBlur
from .poisson import PoissonDeconvProblem, simulate_counts
from .solvers import IterateTrace, SolverConfig, run_solver

DEFAULT_SOLVERS = ("gd", "cg-daniel", "cg-fr", "cg-pr", "cg-hs", "cg-dy",
                   "cg-hz", "tn")


class ExperimentError(RuntimeError):
    """Too many realizations failed for the medians to be meaningful."""


@dataclass
class ExperimentSpec:
    n: int = 100
    num_realizations: int = 100
    rate_low: float = 1.0
    rate_high: float = 5.0
    sigma: float = 3.0
    master_seed: int = 0
    solvers: tuple = DEFAULT_SOLVERS
    config: SolverConfig = dc_field(default_factory=SolverConfig)
    output_dir: str = "bench_out"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid side must be >= 1")
        if self.num_realizations < 1:
            raise ValueError("need at least one realization")
        if not self.rate_low < self.rate_high:
            raise ValueError("need rate_low < rate_high")


def realization_seed(master_seed: int, r: int):
    """Deterministic, well-mixed per-realization seed."""
    return np.random.SeedSequence([master_seed, r])


def gen_instance(spec: ExperimentSpec, r: int):
    """Seeded instance r: true rates, simulated counts, start point, problem.

    The start point is the constant field at the mean count, which keeps
    the forward image strictly positive and is scale-matched to the data.
    """
    if r >= spec.num_realizations:
        raise ValueError(f"realization index {r} out of range")
    seed = realization_seed(spec.master_seed, r)
    rng = np.random.default_rng(seed)
    blur = GaussianBlur(spec.n, spec.sigma)
    x_true = Field(rng.uniform(spec.rate_low, spec.rate_high,
                               size=(spec.n, spec.n)))
    counts = simulate_counts(x_true, blur, rng)
    x0 = Field(np.full((spec.n, spec.n), counts.data.mean()))
    problem = PoissonDeconvProblem(blur, counts)
    return x_true, counts, x0, problem


@dataclass
class SolverAggregate:
    """Median convergence behavior of one solver over all realizations."""

    solver: str
    step_rule: str
    median_f: np.ndarray
    median_grad_norm: np.ndarray
    median_seconds: np.ndarray
    iters_to_tol: list
    num_failed: int

    @property
    def median_iters_to_tol(self) -> float:
        return float(np.median(self.iters_to_tol))


@dataclass
class AggregateResult:
    spec: ExperimentSpec
    per_solver: dict  # solver name -> SolverAggregate
    traces: dict      # solver name -> list[IterateTrace]


def pad_traces(values: list, length: int) -> np.ndarray:
    """Right-pad each series with its final value and stack row-wise."""
    out = np.empty((len(values), length))
    for i, v in enumerate(values):
        v = np.asarray(v, dtype=np.float64)
        out[i, :len(v)] = v
        out[i, len(v):] = v[-1]
    return out


def aggregate(solver: str, step_rule: str, traces: list[IterateTrace],
              max_iters: int, num_failed: int) -> SolverAggregate:
    length = max(len(t) for t in traces)
    med_f = np.median(pad_traces([t.f for t in traces], length), axis=0)
    med_g = np.median(pad_traces([t.grad_norm for t in traces], length),
                      axis=0)
    med_s = np.median(pad_traces([t.seconds for t in traces], length), axis=0)
    iters = [t.iterations_to_tolerance(max_iters) for t in traces]
    return SolverAggregate(solver, step_rule, med_f, med_g, med_s, iters,
                           num_failed)


def run_experiment(spec: ExperimentSpec,
                   progress: Optional[callable] = None) -> AggregateResult:
    """Run every (solver, realization) pair and aggregate medians.

    A solver is dropped from the result (with an error report) if more than
    5% of its realizations fail.
    """
    per_solver = {}
    all_traces = {}
    for name in spec.solvers:
        traces, failures = [], []
        for r in range(spec.num_realizations):
            _, _, x0, problem = gen_instance(spec, r)
            try:
                _, trace = run_solver(name, problem, x0, spec.config)
                traces.append(trace)
            except Exception as exc:  # recorded, excluded from medians
                failures.append((r, exc))
            if progress is not None:
                progress(name, r)
        if len(traces) < 0.95 * spec.num_realizations:
            raise ExperimentError(
                f"solver {name}: {len(failures)}/{spec.num_realizations} "
                f"realizations failed; first error: {failures[0][1]!r}")
        per_solver[name] = aggregate(name, spec.config.step_rule, traces,
                                     spec.config.max_iters, len(failures))
        all_traces[name] = traces
    return AggregateResult(spec, per_solver, all_traces)
