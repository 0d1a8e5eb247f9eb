"""Poisson maximum-likelihood deconvolution: negative log-likelihood of
counts observed through a linear forward operator, with analytic gradient,
bilinear Hessian and Hessian operator.

With y = T(x) the objective is  f(x) = sum_g y_g - c_g log(y_g), terms with
c_g = 0 contributing y_g only.  The derived pieces are

    grad f(x)   = T*(1 - c / y)
    B(x; u, v)  = sum_g c_g (T u)_g (T v)_g / y_g^2
    H(x) v      = T*((c / y^2) . T v)

normalized so that B's diagonal equals the second-order Taylor term of f.
"""

from __future__ import annotations

import numpy as np

from . import fields
from .fields import Field
from .objective import ObjectiveModel
from .operators import LinearMap

DEFAULT_FLOOR_EPS = 1e-12


class PositivityError(ValueError):
    """Forward image of the iterate is not positive where counts demand it."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"forward image nonpositive at grid index {index}: {value!r}")


class PoissonDeconvProblem(ObjectiveModel):
    """Negative Poisson log-likelihood through a linear operator."""

    def __init__(self, T: LinearMap, counts: Field,
                 floor_eps: float = DEFAULT_FLOOR_EPS):
        if np.any(counts.data < 0):
            raise ValueError("counts must be nonnegative")
        self.T = T
        self.counts = counts
        self.floor_eps = float(floor_eps)
        self._pos = counts.data > 0
        # memo of the last forward image; the tuple is swapped atomically so
        # concurrent evaluations at distinct points stay consistent
        self._memo = (None, None)

    def _forward(self, x: Field) -> np.ndarray:
        mx, my = self._memo
        if x.data is mx:
            return my
        y = self.T.forward(x).data
        self._memo = (x.data, y)
        return y

    def domain_check(self, x: Field) -> bool:
        y = self._forward(x)
        if np.any(y[self._pos] < self.floor_eps):
            return False
        return not np.any(y <= -self.floor_eps)

    def _forward_checked(self, x: Field) -> np.ndarray:
        y = self._forward(x)
        bad = (y < self.floor_eps) & self._pos
        if not bad.any():
            bad = y <= -self.floor_eps
        if bad.any():
            idx = np.unravel_index(int(np.argmax(bad)), y.shape)
            raise PositivityError(idx, float(y[idx]))
        return y

    def eval(self, x: Field) -> float:
        y = self._forward_checked(x)
        c = self.counts.data
        total = float(y.sum())
        total -= float(np.sum(c[self._pos] * np.log(y[self._pos])))
        return total

    def grad(self, x: Field) -> Field:
        y = self._forward_checked(x)
        c = self.counts.data
        ratio = np.zeros_like(y)
        ratio[self._pos] = c[self._pos] / y[self._pos]
        return self.T.adjoint(Field(1.0 - ratio))

    def _weights(self, y: np.ndarray) -> np.ndarray:
        c = self.counts.data
        w = np.zeros_like(y)
        w[self._pos] = c[self._pos] / y[self._pos] ** 2
        return w

    def hess_bilinear(self, x: Field, u: Field, v: Field) -> float:
        y = self._forward_checked(x)
        tu = self.T.forward(u).data
        tv = self.T.forward(v).data
        return float(np.sum(self._weights(y) * tu * tv))

    def hess_apply(self, x: Field, v: Field) -> Field:
        y = self._forward_checked(x)
        tv = self.T.forward(v).data
        return self.T.adjoint(Field(self._weights(y) * tv))


def simulate_counts(rates: Field, T: LinearMap, seed) -> Field:
    """Draw detector counts from Poisson(T(rates)) with a seeded generator.

    Identical seed gives bit-identical counts; tiny negative forward values
    from FFT round-off are clamped to zero before sampling.
    """
    lam = T.forward(rates).data
    if np.any(lam < -DEFAULT_FLOOR_EPS):
        raise ValueError("negative Poisson rate after forward operator")
    lam = np.clip(lam, 0.0, None)
    rng = np.random.default_rng(seed)
    return Field(rng.poisson(lam).astype(np.float64))
