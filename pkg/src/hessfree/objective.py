"""Objective-model contract: function value, gradient, Hessian as a
bilinear form and as a self-adjoint operator, plus the finite-difference
oracles used to validate hand-derived formulas.

The bilinear form is normalized so that its diagonal equals the full
second-order Taylor term: f(x+y) = f(x) + <grad, y> + 1/2 B(y, y) + o(|y|^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fields
from .fields import DimensionError, Field

DENSE_DIM_CAP = 64

_FD_EPS = float(np.finfo(np.float64).eps) ** (1.0 / 3.0)


class DomainError(ValueError):
    """Evaluation point (or a probe around it) left the objective's domain."""


class ObjectiveModel:
    """Bundle of objective evaluations at a point, all matrix-free.

    Subclasses provide ``eval`` and ``grad`` and at least one of
    ``hess_apply`` / ``hess_bilinear``; the default implementations route
    each through the other (``B(x; y, z) = <H(x) y, z>``).
    """

    def eval(self, x: Field) -> float:
        raise NotImplementedError

    def grad(self, x: Field) -> Field:
        raise NotImplementedError

    def hess_apply(self, x: Field, y: Field) -> Field:
        raise NotImplementedError

    def hess_bilinear(self, x: Field, y: Field, z: Field) -> float:
        return fields.inner(self.hess_apply(x, y), z)

    def domain_check(self, x: Field) -> bool:
        return True


@dataclass(frozen=True)
class QuadraticModel:
    """Second-order Taylor model of an objective around a base point."""

    model: ObjectiveModel
    base_point: Field
    f0: float
    g: Field

    @classmethod
    def at(cls, model: ObjectiveModel, x: Field) -> "QuadraticModel":
        return cls(model, x, model.eval(x), model.grad(x))

    def value(self, y: Field) -> float:
        return (self.f0 + fields.inner(self.g, y)
                + 0.5 * self.model.hess_bilinear(self.base_point, y, y))


def quad_value(m: QuadraticModel, y: Field) -> float:
    return m.value(y)


class QuadraticObjective(ObjectiveModel):
    """f(x) = 1/2 <A x, x> - <b, x> for a symmetric operator A.

    ``apply_A`` maps a field to a field; the Hessian is constant and equal
    to A, which makes this the reference problem for exactness tests.
    """

    def __init__(self, apply_A: Callable[[Field], Field], b: Field):
        self.apply_A = apply_A
        self.b = b

    def eval(self, x: Field) -> float:
        return 0.5 * fields.inner(self.apply_A(x), x) - fields.inner(self.b, x)

    def grad(self, x: Field) -> Field:
        return self.apply_A(x) - self.b

    def hess_apply(self, x: Field, y: Field) -> Field:
        return self.apply_A(y)


def polarize(h_diag: Callable[[Field], float], u: Field, v: Field) -> float:
    """Recover the off-diagonal value of a symmetric bilinear form from its
    diagonal: B(u, v) = (Q(u+v) - Q(u) - Q(v)) / 2."""
    if u.shape != v.shape:
        raise DimensionError(f"shape mismatch: {u.shape} vs {v.shape}")
    return 0.5 * (h_diag(u + v) - h_diag(u) - h_diag(v))


def _probe_basis(x: Field):
    """Orthonormal coordinate basis of the field viewed as a real space.

    For complex fields each entry contributes two probes, one real and one
    imaginary, so the basis has 2n elements.
    """
    flat = np.zeros(x.size, dtype=x.data.dtype)
    units = (1.0, 1.0j) if x.is_complex else (1.0,)
    for j in range(x.size):
        for u in units:
            flat[j] = u
            yield Field(flat.reshape(x.shape).copy())
            flat[j] = 0.0


def fd_gradient(f: Callable[[Field], float], x: Field,
                h: float | None = None,
                domain_check: Callable[[Field], bool] | None = None) -> Field:
    """Central-difference gradient over the coordinate probe basis.

    A probe point outside the domain raises ``DomainError`` instead of
    silently shrinking the step; a failing probe means the problem is
    misconfigured, not that a smaller h is wanted.
    """
    if h is None:
        h = _FD_EPS * (1.0 + fields.norm(x))
    out = np.zeros(x.size, dtype=x.data.dtype)
    for k, e in enumerate(_probe_basis(x)):
        xp = fields.axpy(h, e, x)
        xm = fields.axpy(-h, e, x)
        if domain_check is not None and not (domain_check(xp)
                                             and domain_check(xm)):
            raise DomainError(f"finite-difference probe {k} left the domain")
        d = (f(xp) - f(xm)) / (2.0 * h)
        if x.is_complex:
            j, im = divmod(k, 2)
            out[j] += d * (1.0j if im else 1.0)
        else:
            out[k] = d
    return Field(out.reshape(x.shape))


def dirder_hess_apply(grad: Callable[[Field], Field], x: Field, y: Field,
                      h: float | None = None,
                      domain_check: Callable[[Field], bool] | None = None,
                      ) -> Field:
    """Hessian-operator action via the directional derivative of the
    gradient: (grad(x + h y) - grad(x - h y)) / (2 h)."""
    ny = fields.norm(y)
    if ny == 0.0:
        return fields.zeros_like(y)
    if h is None:
        h = _FD_EPS * (1.0 + fields.norm(x)) / ny
    xp = fields.axpy(h, y, x)
    xm = fields.axpy(-h, y, x)
    if domain_check is not None and not (domain_check(xp)
                                         and domain_check(xm)):
        raise DomainError("directional probe left the domain")
    return (grad(xp) - grad(xm)) * (1.0 / (2.0 * h))


def hess_dense(model: ObjectiveModel, x: Field) -> np.ndarray:
    """Assemble the Hessian as a dense matrix over the coordinate basis.

    Desk-scale oracle only: refuses real dimension above ``DENSE_DIM_CAP``
    (dense assembly is exactly the cost blow-up this library avoids).
    """
    n = x.real_dim
    if n > DENSE_DIM_CAP:
        raise ValueError(
            f"dense Hessian refused for dimension {n} > {DENSE_DIM_CAP}")
    basis = list(_probe_basis(x))
    m = np.empty((n, n))
    for j, ej in enumerate(basis):
        hj = model.hess_apply(x, ej)
        for k, ek in enumerate(basis):
            m[j, k] = fields.inner(hj, ek)
    return m
