"""Self-check suite: validates the analytic gradient/Hessian formulas of
the shipped deconvolution problem against independent finite-difference
and polarization oracles on a desk-scale instance."""

from __future__ import annotations

import numpy as np

from . import fields
from .fields import Field
from .objective import (dirder_hess_apply, fd_gradient, hess_dense, polarize)
from .bench import ExperimentSpec, gen_instance


def _rel(err: float, ref: float) -> float:
    return err / max(ref, 1e-300)


def run_checks(n: int = 4, seed: int = 1, sigma: float = 1.0,
               trials: int = 100, report=print) -> bool:
    """Run every oracle check on an n-by-n instance; prints one pass/fail
    line per property and returns overall success."""
    spec = ExperimentSpec(n=n, num_realizations=1, sigma=sigma,
                          master_seed=seed)
    _, _, x0, problem = gen_instance(spec, 0)
    rng = np.random.default_rng(seed + 1)
    shape = (n, n)

    def rand_field():
        return Field(rng.standard_normal(shape))

    x = x0 + 0.05 * rand_field()  # interior point near the data scale
    results = []

    def check(name, value, tol):
        ok = value <= tol
        results.append(ok)
        report(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} "
               f"(tol {tol:.0e})")

    # linear-operator contracts
    adj = max(
        _rel(abs(fields.inner(problem.T.forward(u), v)
                 - fields.inner(u, problem.T.adjoint(v))),
             fields.norm(u) * fields.norm(v))
        for u, v in ((rand_field(), rand_field()) for _ in range(trials)))
    check("adjoint identity <T u, v> = <u, T* v>", adj, 1e-10)

    par = max(
        abs((fields.norm(u + v) ** 2 + fields.norm(u - v) ** 2)
            - 2 * fields.norm(u) ** 2 - 2 * fields.norm(v) ** 2)
        / (fields.norm(u) ** 2 + fields.norm(v) ** 2)
        for u, v in ((rand_field(), rand_field()) for _ in range(trials)))
    check("parallelogram law", par, 1e-12)

    # gradient vs central differences
    g = problem.grad(x)
    g_fd = fd_gradient(problem.eval, x, domain_check=problem.domain_check)
    check("analytic gradient vs finite differences",
          _rel(fields.norm(g - g_fd), fields.norm(g)), 1e-6)

    # Hessian operator vs directional derivative of the gradient
    y = rand_field()
    hy = problem.hess_apply(x, y)
    hy_fd = dirder_hess_apply(problem.grad, x, y,
                              domain_check=problem.domain_check)
    check("Hessian operator vs gradient directional derivative",
          _rel(fields.norm(hy - hy_fd), fields.norm(hy)), 1e-6)

    # bilinear form: symmetry, operator compatibility, self-adjointness
    sym = comp = selfadj = 0.0
    for _ in range(trials):
        u, v = rand_field(), rand_field()
        buv = problem.hess_bilinear(x, u, v)
        sym = max(sym, abs(buv - problem.hess_bilinear(x, v, u))
                  / (1.0 + abs(buv)))
        comp = max(comp, _rel(
            abs(buv - fields.inner(problem.hess_apply(x, u), v)),
            1.0 + abs(buv)))
        selfadj = max(selfadj, _rel(
            abs(fields.inner(problem.hess_apply(x, u), v)
                - fields.inner(u, problem.hess_apply(x, v))),
            1.0 + abs(buv)))
    check("bilinear symmetry B(u,v) = B(v,u)", sym, 1e-10)
    check("operator compatibility B(u,v) = <H u, v>", comp, 1e-10)
    check("self-adjointness <H u, v> = <u, H v>", selfadj, 1e-10)

    # polarization of the Taylor diagonal
    u, v = rand_field(), rand_field()
    pol = polarize(lambda w: problem.hess_bilinear(x, w, w), u, v)
    check("polarization of the quadratic diagonal",
          _rel(abs(pol - problem.hess_bilinear(x, u, v)),
               abs(problem.hess_bilinear(x, u, v))), 1e-9)

    # dense assembly: symmetric and positive semidefinite
    m = hess_dense(problem, x)
    check("dense Hessian symmetry", float(np.abs(m - m.T).max()), 1e-10)
    check("dense Hessian PSD (min eigenvalue >= -1e-10)",
          max(0.0, -float(np.linalg.eigvalsh(m).min())), 1e-10)

    # blur preserves nonnegativity up to round-off
    w = Field(np.abs(rng.standard_normal(shape)))
    check("blur maps nonnegative fields to nonnegative fields",
          max(0.0, -float(problem.T.forward(w).data.min())), 1e-12)

    return all(results)
