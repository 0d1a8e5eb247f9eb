"""Matrix-free second-order optimization: gradients, Hessian bilinear
forms and Hessian-operator actions on grid fields, with solvers that use
them for step sizes, conjugate directions and truncated Newton steps."""

__version__ = "0.1.0"

from .fields import (Field, axpy, from_array, from_bytes, hadamard, inner,
                     norm, pointwise, to_bytes, zeros, zeros_like)
from .operators import GaussianBlur, IdentityMap, LinearMap, MatrixMap, blur_make
from .objective import (ObjectiveModel, QuadraticModel, QuadraticObjective,
                        dirder_hess_apply, fd_gradient, hess_dense, polarize,
                        quad_value)
from .poisson import PoissonDeconvProblem, PositivityError, simulate_counts
from .solvers import (IterateTrace, LineSearchFailed, NonconvexDirection,
                      SolverConfig, cg_quadratic, classical_beta,
                      conjugate_gradient, daniel_beta, gradient_descent,
                      grid_line_search, newton_step_alpha, run_solver,
                      truncated_newton)
from .bench import AggregateResult, ExperimentSpec, gen_instance, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
