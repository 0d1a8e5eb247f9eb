"""Poisson deconvolution model: value, gradient, curvature, domain handling."""

import numpy as np
import pytest

from hessfree import fields
from hessfree.fields import Field
from hessfree.objective import dirder_hess_apply, fd_gradient, hess_dense, polarize
from hessfree.operators import GaussianBlur, IdentityMap
from hessfree.poisson import (PoissonDeconvProblem, PositivityError,
                              simulate_counts)


def _instance(n=4, sigma=1.0, seed=0):
    rng = np.random.default_rng(seed)
    T = GaussianBlur(n, sigma)
    x_true = Field(rng.uniform(1.0, 5.0, size=(n, n)))
    c = simulate_counts(x_true, T, rng)
    prob = PoissonDeconvProblem(T, c)
    x = Field(rng.uniform(1.0, 5.0, size=(n, n)))
    return prob, x, T, c, rng


def test_eval_matches_direct_formula():
    prob, x, T, c, _ = _instance()
    y = T.forward(x).data
    cd = c.data
    expect = np.sum(y) - np.sum(cd[cd > 0] * np.log(y[cd > 0]))
    assert prob.eval(x) == pytest.approx(expect, rel=1e-12)


def test_zero_counts_contribute_linearly():
    # with c identically zero the objective reduces to sum(Tx)
    n = 4
    T = IdentityMap((n, n))
    prob = PoissonDeconvProblem(T, Field(np.zeros((n, n))))
    x = Field(np.full((n, n), 2.0))
    assert prob.eval(x) == pytest.approx(2.0 * n * n, rel=1e-12)


def test_gradient_matches_finite_differences():
    prob, x, _, _, _ = _instance()
    g = prob.grad(x)
    g_fd = fd_gradient(prob.eval, x)
    assert fields.norm(g_fd - g) / fields.norm(g) <= 1e-6


def test_hess_apply_matches_directional_derivative():
    prob, x, _, _, rng = _instance()
    y = Field(rng.standard_normal((4, 4)))
    got = prob.hess_apply(x, y)
    ref = dirder_hess_apply(prob.grad, x, y)
    assert fields.norm(got - ref) / fields.norm(got) <= 1e-6


def test_bilinear_matches_polarization_of_taylor_diagonal():
    prob, x, _, _, rng = _instance()
    u = Field(rng.standard_normal((4, 4)))
    v = Field(rng.standard_normal((4, 4)))
    got = prob.hess_bilinear(x, u, v)
    ref = polarize(lambda w: prob.hess_bilinear(x, w, w), u, v)
    assert got == pytest.approx(ref, rel=1e-9)


def test_bilinear_consistent_with_operator():
    prob, x, _, _, rng = _instance()
    u = Field(rng.standard_normal((4, 4)))
    v = Field(rng.standard_normal((4, 4)))
    lhs = prob.hess_bilinear(x, u, v)
    rhs = fields.inner(prob.hess_apply(x, u), v)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_dense_hessian_symmetric_psd():
    prob, x, _, _, _ = _instance()
    H = hess_dense(prob, x)
    assert np.allclose(H, H.T, atol=1e-10)
    assert np.linalg.eigvalsh(H).min() >= -1e-10


def test_diagonal_is_full_second_order_taylor_term():
    # f(x + t u) = f(x) + t <g, u> + (t^2 / 2) B(u, u) + O(t^3)
    prob, x, _, _, rng = _instance()
    u = Field(rng.standard_normal((4, 4)))
    g = prob.grad(x)
    B = prob.hess_bilinear(x, u, u)
    t = 1e-4
    fp = prob.eval(x + t * u)
    fm = prob.eval(x + (-t) * u)
    second = (fp + fm - 2.0 * prob.eval(x)) / t**2
    assert second == pytest.approx(B, rel=1e-5)
    first = (fp - fm) / (2 * t)
    assert first == pytest.approx(fields.inner(g, u), rel=1e-5)


def test_domain_check_and_positivity_error():
    prob, x, _, _, _ = _instance()
    assert prob.domain_check(x)
    bad = Field(np.full((4, 4), -1.0))
    assert not prob.domain_check(bad)
    with pytest.raises(PositivityError):
        prob.eval(bad)


def test_simulate_counts_deterministic_and_moment():
    n = 16
    rng = np.random.default_rng(9)
    T = GaussianBlur(n, 2.0)
    x_true = Field(rng.uniform(1.0, 5.0, size=(n, n)))
    c1 = simulate_counts(x_true, T, np.random.default_rng(123))
    c2 = simulate_counts(x_true, T, np.random.default_rng(123))
    assert np.array_equal(c1.data, c2.data)
    assert c1.data.min() >= 0.0
    # Poisson moment check: mean of counts near mean of the rates
    rates = T.forward(x_true).data
    sigma_hat = np.sqrt(rates.mean() / rates.size)
    assert abs(c1.data.mean() - rates.mean()) <= 5 * sigma_hat


def test_forward_image_cache_is_transparent():
    prob, x, _, _, rng = _instance()
    f1 = prob.eval(x)
    g1 = prob.grad(x)
    x2 = Field(x.data + 0.5)
    f2 = prob.eval(x2)
    g2 = prob.grad(x2)
    # recompute fresh on a new problem object: caching must not leak state
    prob2, _, _, _, _ = _instance()
    assert prob2.eval(x) == pytest.approx(f1, rel=1e-15)
    assert np.allclose(prob2.grad(x2).data, g2.data, rtol=1e-15)
    assert f2 != pytest.approx(f1, rel=1e-6)
    assert not np.allclose(g1.data, g2.data)
