"""Second-order solvers driven entirely through the objective-model
contract: gradient descent with the Newton step size, nonlinear conjugate
gradient with a curvature-based beta (plus the classical beta rules), and
a truncated-Newton method whose inner linear solve runs conjugate gradient
on the local quadratic model.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from . import fields
from .fields import Field
from .objective import DomainError, ObjectiveModel
from .poisson import PositivityError

CLASSICAL_BETA_RULES = ("fletcher-reeves", "polak-ribiere",
                        "hestenes-stiefel", "dai-yuan", "hager-zhang")
BETA_RULES = ("daniel",) + CLASSICAL_BETA_RULES + ("none",)
STEP_RULES = ("newton", "grid")

_MAX_HALVINGS = 30


class NonconvexDirection(Exception):
    """Curvature along the search direction is not positive."""


class LineSearchFailed(RuntimeError):
    """No admissible step could be found along the search direction."""


@dataclass
class SolverConfig:
    max_iters: int = 200
    grad_tol: float = 1e-8          # stop when |grad| <= grad_tol * (1+|f|)
    step_rule: str = "newton"
    beta_rule: str = "daniel"
    restart_policy: str = "non-descent"   # "non-descent" | "never"
    restart_every: Optional[int] = None
    inner_iters: int = 12
    inner_tol: float = 1e-10        # relative inner-CG residual target
    ls_points: int = 50
    ls_lo: float = 0.1
    ls_hi: float = 3.3
    curvature_eps: float = 1e-14

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")
        if not (0 < self.ls_lo < self.ls_hi):
            raise ValueError("need 0 < ls_lo < ls_hi")
        if self.ls_points < 2:
            raise ValueError("ls_points must be >= 2")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.beta_rule not in BETA_RULES:
            raise ValueError(f"unknown beta rule {self.beta_rule!r}")
        if self.restart_policy not in ("non-descent", "never"):
            raise ValueError(f"unknown restart policy {self.restart_policy!r}")


CSV_COLUMNS = ("iter", "f", "grad_norm", "alpha", "beta", "restart",
               "seconds")


@dataclass
class IterateTrace:
    """Per-iteration record of a solver run."""

    iters: list = dc_field(default_factory=list)
    f: list = dc_field(default_factory=list)
    grad_norm: list = dc_field(default_factory=list)
    alpha: list = dc_field(default_factory=list)
    beta: list = dc_field(default_factory=list)
    restart: list = dc_field(default_factory=list)
    seconds: list = dc_field(default_factory=list)
    converged: bool = False

    def append(self, k, fval, gnorm, alpha, beta, restart, seconds):
        self.iters.append(k)
        self.f.append(fval)
        self.grad_norm.append(gnorm)
        self.alpha.append(alpha)
        self.beta.append(beta)
        self.restart.append(restart)
        self.seconds.append(seconds)

    def __len__(self):
        return len(self.iters)

    def iterations_to_tolerance(self, max_iters: int) -> int:
        """Iteration count at convergence, or max_iters if censored."""
        return self.iters[-1] if self.converged else max_iters

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in zip(self.iters, self.f, self.grad_norm, self.alpha,
                       self.beta, self.restart, self.seconds):
            w.writerow(_format_row(row))
        return buf.getvalue()


def _format_row(row):
    out = []
    for v in row:
        if v is None:
            out.append("")
        elif isinstance(v, bool):
            out.append("1" if v else "0")
        elif isinstance(v, float):
            out.append(format(v, ".17g"))
        else:
            out.append(str(v))
    return out


def newton_step_alpha(model: ObjectiveModel, x: Field, s: Field,
                      curvature_eps: float = 1e-14,
                      f_at_x: Optional[float] = None) -> float:
    """Exact minimizer of the local quadratic model along s:
    alpha = -<grad, s> / B(s, s).  Raises on nonpositive curvature."""
    curv = model.hess_bilinear(x, s, s)
    if f_at_x is None:
        f_at_x = model.eval(x)
    if curv <= curvature_eps * (1.0 + abs(f_at_x)) * fields.inner(s, s):
        raise NonconvexDirection(f"curvature {curv} along direction")
    return -fields.inner(model.grad(x), s) / curv


def grid_line_search(model: ObjectiveModel, x: Field, s: Field,
                     alpha_ref: float, cfg: SolverConfig) -> float:
    """Best step among ls_points log-spaced multiples of alpha_ref in
    [ls_lo, ls_hi]; grid points outside the objective's domain are skipped.
    """
    if fields.norm(s) == 0.0:
        raise LineSearchFailed("zero search direction")
    if alpha_ref <= 0:
        raise LineSearchFailed(f"nonpositive reference step {alpha_ref}")
    grid = alpha_ref * np.logspace(np.log10(cfg.ls_lo), np.log10(cfg.ls_hi),
                                   cfg.ls_points)
    best_t, best_f = None, np.inf
    for t in grid:
        xt = fields.axpy(float(t), s, x)
        if not model.domain_check(xt):
            continue
        ft = model.eval(xt)
        if ft < best_f:
            best_t, best_f = float(t), ft
    if best_t is None:
        raise LineSearchFailed("no feasible grid point")
    return best_t


def _take_step(model, x, s, g, fval, cfg):
    """Choose a step length along s under the configured rule.

    The Newton step is halved (up to 30 times) while it leaves the domain
    or fails to descend; the grid search is the fallback when curvature is
    nonpositive or the halvings run out.  Returns (x_new, f_new, alpha).
    """
    alpha_ref = None
    try:
        curv = model.hess_bilinear(x, s, s)
        if curv > cfg.curvature_eps * (1.0 + abs(fval)) * fields.inner(s, s):
            alpha_ref = -fields.inner(g, s) / curv
    except PositivityError:
        alpha_ref = None
    if alpha_ref is not None and alpha_ref <= 0:
        alpha_ref = None

    if cfg.step_rule == "newton" and alpha_ref is not None:
        alpha = alpha_ref
        for _ in range(_MAX_HALVINGS):
            x_new = fields.axpy(alpha, s, x)
            if model.domain_check(x_new):
                f_new = model.eval(x_new)
                if f_new <= fval:
                    return x_new, f_new, alpha
            alpha *= 0.5

    alpha = grid_line_search(model, x, s, alpha_ref or 1.0, cfg)
    x_new = fields.axpy(alpha, s, x)
    return x_new, model.eval(x_new), alpha


def _converged(gnorm, fval, cfg):
    return gnorm <= cfg.grad_tol * (1.0 + abs(fval))


def _descend(model: ObjectiveModel, x0: Field, cfg: SolverConfig,
             direction: Callable,
             observer: Callable | None = None) -> tuple[Field, IterateTrace]:
    """Shared outer loop.  ``direction(k, x, g, state)`` returns
    (s, beta, restart_flag, state).  ``observer(k, x, g, s)``, when given,
    is called once per iteration before the step is taken."""
    if not model.domain_check(x0):
        raise DomainError("initial point outside the objective's domain")
    trace = IterateTrace()
    t0 = time.monotonic()
    x = x0
    fval = model.eval(x)
    g = model.grad(x)
    gnorm = fields.norm(g)
    state = None
    for k in range(cfg.max_iters):
        trace.append(k, fval, gnorm, None, None, False,
                     time.monotonic() - t0)
        if _converged(gnorm, fval, cfg):
            trace.converged = True
            return x, trace
        s, beta, restarted, state = direction(k, x, g, state)
        if observer is not None:
            observer(k, x, g, s)
        x, fval, alpha = _take_step(model, x, s, g, fval, cfg)
        g = model.grad(x)
        gnorm = fields.norm(g)
        trace.alpha[-1] = alpha
        trace.beta[-1] = beta
        trace.restart[-1] = restarted
    trace.append(cfg.max_iters, fval, gnorm, None, None, False,
                 time.monotonic() - t0)
    trace.converged = _converged(gnorm, fval, cfg)
    return x, trace


def gradient_descent(model: ObjectiveModel, x0: Field,
                     cfg: SolverConfig,
                     observer: Callable | None = None
                     ) -> tuple[Field, IterateTrace]:
    """Steepest descent with the Newton step size."""

    def direction(k, x, g, state):
        return -g, None, False, None

    return _descend(model, x0, cfg, direction, observer)


def daniel_beta(model: ObjectiveModel, x_next: Field, grad_next: Field,
                s: Field, curvature_eps: float = 1e-14) -> float:
    """Conjugacy-enforcing beta from the current bilinear Hessian:
    beta = B(g+, s) / B(s, s); zero (restart) on nonpositive curvature."""
    denom = model.hess_bilinear(x_next, s, s)
    if denom <= curvature_eps * fields.inner(s, s):
        return 0.0
    return model.hess_bilinear(x_next, grad_next, s) / denom


def classical_beta(rule: str, grad_next: Field, grad_prev: Field,
                   s: Field) -> float:
    """Hessian-free beta rules, standard literature forms.  A vanishing
    denominator yields beta = 0 (restart)."""
    gp = fields.inner(grad_prev, grad_prev)
    gn = fields.inner(grad_next, grad_next)
    y = grad_next - grad_prev
    sy = fields.inner(s, y)
    if rule == "fletcher-reeves":
        num, den = gn, gp
    elif rule == "polak-ribiere":
        num, den = fields.inner(grad_next, y), gp
    elif rule == "hestenes-stiefel":
        num, den = fields.inner(grad_next, y), sy
    elif rule == "dai-yuan":
        num, den = gn, sy
    elif rule == "hager-zhang":
        if sy == 0.0:
            return 0.0
        yy = fields.inner(y, y)
        w = y - (2.0 * yy / sy) * s
        num, den = fields.inner(w, grad_next), sy
    else:
        raise ValueError(f"unknown beta rule {rule!r}")
    if den == 0.0:
        return 0.0
    return num / den


def conjugate_gradient(model: ObjectiveModel, x0: Field,
                       cfg: SolverConfig,
                       observer: Callable | None = None
                       ) -> tuple[Field, IterateTrace]:
    """Nonlinear CG with the configured beta rule and restart policy."""

    def direction(k, x, g, state):
        if state is None:  # first iteration: plain gradient step
            return -g, None, False, {"s": -g, "g": g}
        s_prev, g_prev = state["s"], state["g"]
        restarted = False
        if cfg.beta_rule == "none":
            beta = 0.0
        elif cfg.beta_rule == "daniel":
            beta = daniel_beta(model, x, g, s_prev, cfg.curvature_eps)
        else:
            beta = classical_beta(cfg.beta_rule, g, g_prev, s_prev)
        if cfg.restart_every is not None and k % cfg.restart_every == 0:
            beta, restarted = 0.0, True
        s = fields.axpy(beta, s_prev, -g)
        if (cfg.restart_policy == "non-descent"
                and fields.inner(g, s) >= 0.0):
            s, beta, restarted = -g, 0.0, True
        return s, beta, restarted, {"s": s, "g": g}

    return _descend(model, x0, cfg, direction, observer)


def cg_quadratic(apply_H: Callable[[Field], Field], b: Field,
                 iters: int, tol: float) -> tuple[Field, bool]:
    """Matrix-free CG for H y = b with H symmetric positive semidefinite.

    Stops after ``iters`` steps or when the residual drops below
    ``tol * |b|``.  On detected nonpositive curvature the current iterate
    is returned with the flag set (truncated-Newton convention).
    """
    y = fields.zeros_like(b)
    r = b
    rr = fields.inner(r, r)
    nb = fields.norm(b)
    if nb == 0.0:
        return y, False
    p = r
    for _ in range(iters):
        if np.sqrt(rr) <= tol * nb:
            break
        hp = apply_H(p)
        php = fields.inner(p, hp)
        if php <= 0.0:
            return y, True
        a = rr / php
        y = fields.axpy(a, p, y)
        r = fields.axpy(-a, hp, r)
        rr_new = fields.inner(r, r)
        p = fields.axpy(rr_new / rr, p, r)
        rr = rr_new
    return y, False


def truncated_newton(model: ObjectiveModel, x0: Field,
                     cfg: SolverConfig,
                     observer: Callable | None = None
                     ) -> tuple[Field, IterateTrace]:
    """Outer Newton iteration; the Newton system H s = -g is solved
    approximately by ``inner_iters`` CG steps on the quadratic model."""

    def direction(k, x, g, state):
        s, _neg = cg_quadratic(lambda v: model.hess_apply(x, v), -g,
                               cfg.inner_iters, cfg.inner_tol)
        if fields.norm(s) == 0.0:  # degenerate inner solve
            s = -g
        return s, None, False, None

    return _descend(model, x0, cfg, direction, observer)


SOLVERS = {
    "gd": (gradient_descent, {"beta_rule": "none"}),
    "cg-daniel": (conjugate_gradient,
                  {"beta_rule": "daniel", "restart_policy": "never"}),
    "cg-fr": (conjugate_gradient, {"beta_rule": "fletcher-reeves"}),
    "cg-pr": (conjugate_gradient, {"beta_rule": "polak-ribiere"}),
    "cg-hs": (conjugate_gradient, {"beta_rule": "hestenes-stiefel"}),
    "cg-dy": (conjugate_gradient, {"beta_rule": "dai-yuan"}),
    "cg-hz": (conjugate_gradient, {"beta_rule": "hager-zhang"}),
    "tn": (truncated_newton, {"beta_rule": "none"}),
}


def run_solver(name: str, model: ObjectiveModel, x0: Field,
               cfg: SolverConfig,
               observer: Callable | None = None
               ) -> tuple[Field, IterateTrace]:
    """Run a named solver, overriding cfg's beta/restart with the solver's
    own defaults."""
    try:
        fn, overrides = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}") from None
    params = {**cfg.__dict__, **overrides}
    return fn(model, x0, SolverConfig(**params), observer)
