"""Linear operators on fields: abstract forward/adjoint pairs and the
FFT-based periodic Gaussian blur used by the deconvolution problem."""

from __future__ import annotations

import numpy as np

from .fields import DimensionError, Field


class ParameterError(ValueError):
    """Invalid operator parameter (e.g. nonpositive blur width)."""


class LinearMap:
    """A linear operator between field spaces, applied matrix-free.

    Subclasses implement :meth:`forward` and :meth:`adjoint`; both must be
    additive and homogeneous over real scalars, and satisfy the adjoint
    identity ``inner(T(x), y) == inner(x, T.adjoint(y))``.
    """

    def __init__(self, domain_shape, codomain_shape):
        self.domain_shape = tuple(domain_shape)
        self.codomain_shape = tuple(codomain_shape)

    def forward(self, x: Field) -> Field:
        raise NotImplementedError

    def adjoint(self, y: Field) -> Field:
        raise NotImplementedError

    def __call__(self, x: Field) -> Field:
        return self.forward(x)

    def _check_domain(self, x: Field) -> None:
        if x.shape != self.domain_shape:
            raise DimensionError(
                f"operator domain {self.domain_shape}, got {x.shape}")


class IdentityMap(LinearMap):
    def __init__(self, shape):
        super().__init__(shape, shape)

    def forward(self, x: Field) -> Field:
        self._check_domain(x)
        return x

    adjoint = forward


class MatrixMap(LinearMap):
    """Dense-matrix operator on 1-d real fields; test and desk scale only."""

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ParameterError("matrix must be 2-dimensional")
        super().__init__((m.shape[1],), (m.shape[0],))
        self.matrix = m

    def forward(self, x: Field) -> Field:
        self._check_domain(x)
        return Field(self.matrix @ x.data)

    def adjoint(self, y: Field) -> Field:
        if y.shape != self.codomain_shape:
            raise DimensionError("adjoint argument shape mismatch")
        return Field(self.matrix.T @ y.data)


class GaussianBlur(LinearMap):
    """Periodic convolution with a grid-periodized, mass-one Gaussian kernel.

    The kernel is nonnegative and sums to one, so the blur preserves the
    total mass and maps nonnegative fields into themselves (up to FFT
    round-off).  The kernel is symmetric under reflection, hence the
    operator is self-adjoint; the adjoint is still applied through the
    conjugate frequency response for clarity.
    """

    def __init__(self, n: int, sigma: float):
        if n < 1:
            raise ParameterError(f"grid side must be >= 1, got {n}")
        if sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {sigma}")
        super().__init__((n, n), (n, n))
        self.n = int(n)
        self.sigma = float(sigma)
        self.kernel = _periodized_gaussian(self.n, self.sigma)
        self.frequency_response = np.fft.rfft2(self.kernel)

    def forward(self, x: Field) -> Field:
        self._check_domain(x)
        out = np.fft.irfft2(np.fft.rfft2(x.data) * self.frequency_response,
                            s=(self.n, self.n))
        return Field(out)

    def adjoint(self, y: Field) -> Field:
        self._check_domain(y)
        out = np.fft.irfft2(
            np.fft.rfft2(y.data) * np.conj(self.frequency_response),
            s=(self.n, self.n))
        return Field(out)


def _periodized_gaussian(n: int, sigma: float) -> np.ndarray:
    # circular distance to the origin along each axis
    idx = np.arange(n)
    d = np.minimum(idx, n - idx).astype(np.float64)
    g1 = np.exp(-0.5 * (d / sigma) ** 2)
    kernel = np.outer(g1, g1)
    return kernel / kernel.sum()


def blur_make(n: int, sigma: float) -> GaussianBlur:
    return GaussianBlur(n, sigma)
