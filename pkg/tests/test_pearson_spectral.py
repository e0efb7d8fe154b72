import numpy as np
import pytest
from scipy import integrate, special
from ksdiff import pearson_spectral as kps
from ksdiff.exceptions import (
    DomainError,
    KindMismatchError,
    ParameterError,
    SmallTimeWarning,
    TruncationWarning,
)
from ksdiff.fracops import StretchedOrder
from ksdiff.kilbas_saigo import ks_eval

ou = kps.OU(theta=1.0)
cir = kps.CIR(theta=1.0, a=2.0, b=1.5)
jacobi = kps.Jacobi(theta=1.0, a=0.5, b=-0.3)
ord = StretchedOrder(0.5, 0.25)


def test_gauss_orthonormality():
    """Are the Q_n orthonormal under the Gauss rule of each stationary law?"""
    for model in [ou, cir, jacobi]:
        x, w = kps.gauss_rule(model, 16)
        assert np.isclose(np.sum(w), 1)
        assert np.isclose(np.sum(w * x), model.stationary.mean())
        Q = kps.orthonormal_polys(model, 8, x)
        assert np.allclose(Q.T @ (w[:, None] * Q), np.eye(8), atol=1e-10)


def test_quad_orthonormality():
    for model, lo, hi in [(ou, -np.inf, np.inf), (cir, 0, np.inf)]:
        norm, _ = integrate.quad(
            lambda x: float(kps.orthonormal_poly(model, 3, x)) ** 2
            * float(kps.stationary_density(model, x)),
            lo,
            hi,
        )
        cross, _ = integrate.quad(
            lambda x: float(kps.orthonormal_poly(model, 2, x))
            * float(kps.orthonormal_poly(model, 3, x))
            * float(kps.stationary_density(model, x)),
            lo,
            hi,
        )
        assert np.isclose(norm, 1, atol=1e-6)
        assert np.isclose(cross, 0, atol=1e-6)


def test_eigen_equation():
    """Is G Q_n = -lambda_n Q_n for each model?"""
    for model, x in [
        (ou, np.linspace(-2, 2, 9)),
        (cir, np.linspace(0.2, 3, 8)),
        (jacobi, np.linspace(-0.8, 0.8, 9)),
    ]:
        step = 1e-3
        Q, dQ = kps.orthonormal_polys(model, 5, x, derivative=True)
        d2Q = (
            kps.orthonormal_polys(model, 5, x + step)
            - 2 * Q
            + kps.orthonormal_polys(model, 5, x - step)
        ) / step**2
        lam = kps.eigenvalue(model, np.arange(5))
        generator = (
            model.drift(x)[:, None] * dQ + model.diffusion(x)[:, None] * d2Q
        )
        assert np.allclose(generator, -lam * Q, atol=1e-4)


def test_classical_kernels():
    """Does the classical series reproduce the closed-form transition densities?"""
    x = np.linspace(-3, 3, 31)
    assert np.allclose(
        kps.transition_density_classical(ou, x, 1.0, 0.5, N=60),
        kps.transition_density_ou_exact(ou, x, 1.0, 0.5),
        atol=1e-6,
    )
    model = kps.CIR(theta=1.0, a=1.0, b=2.0)
    x = np.linspace(0.2, 5, 25)
    assert np.allclose(
        kps.transition_density_classical(model, x, 1.0, 1.5, N=60),
        kps.transition_density_cir_exact(model, x, 1.0, 1.5),
        atol=1e-6,
    )


def test_stretched_mass():
    x = np.linspace(-14, 14, 8001)
    density = kps.transition_density_stretched(ou, ord, x, 1.0, 0.3, N=40)
    assert np.isclose(integrate.trapezoid(density, x), 1, atol=1e-6)


def test_stretched_cdf():
    """Does the distribution function integrate the density?"""
    x = np.linspace(-0.5, 0.5, 4001)
    density = kps.transition_density_stretched(ou, ord, x, 1.0, 0.3, N=30)
    cdf = kps.transition_cdf_stretched(ou, ord, np.array([-0.5, 0.5]), 1.0, 0.3, N=30)
    assert np.isclose(cdf[1] - cdf[0], integrate.trapezoid(density, x), atol=1e-5)
    tails = kps.transition_cdf_stretched(
        ou, ord, np.array([-12.0, 12.0]), 1.0, 0.3, N=30
    )
    assert np.allclose(tails, [0, 1], atol=1e-8)


def test_reductions():
    """Do the hyperbolic and stretched series reduce to their special cases?"""
    x = np.linspace(-3, 3, 31)
    assert np.allclose(
        kps.transition_density_hyperbolic(ou, ord, 0.0, 1.0, x, 1.0, 0.2, N=40),
        kps.transition_density_stretched(ou, ord, x, 1.0, 0.2, N=40),
        atol=1e-9,
    )
    lam = kps.eigenvalue(ou, np.arange(40))
    closed = kps.stationary_density(ou, x) * np.sum(
        special.erfcx(lam)
        * kps.orthonormal_polys(ou, 40, x)
        * kps.orthonormal_polys(ou, 40, 0.2),
        axis=-1,
    )
    assert np.allclose(
        kps.transition_density_stretched(ou, StretchedOrder(0.5), x, 1.0, 0.2, N=40),
        closed,
        atol=1e-8,
    )


def test_project_initial():
    coeffs = kps.project_initial(ou, lambda x: kps.orthonormal_poly(ou, 2, x), N=5)
    assert np.allclose(coeffs.values, [0, 0, 1, 0, 0], atol=1e-10)
    assert coeffs.reconstruction_error < 1e-8
    assert np.isclose(coeffs.parseval, 1)
    forward = kps.project_initial(
        ou,
        lambda x: kps.stationary_density(ou, x) * kps.orthonormal_poly(ou, 2, x),
        N=5,
        kind="forward",
    )
    assert np.allclose(forward.values, coeffs.values, atol=1e-10)
    with pytest.raises(ParameterError):
        kps.project_initial(ou, lambda x: x, kind="sideways")


def test_conditional_mean():
    """Is E[X_t | X_0 = y] = mu + (y - mu) E(-theta t^beta) for the stretched OU?"""
    model = kps.OU(theta=1.5, mu=0.5, sigma2=2.0)
    coeffs = kps.project_initial(model, lambda x: x, N=4)
    assert np.allclose(coeffs.values, [0.5, np.sqrt(2), 0, 0], atol=1e-10)
    t = np.array([0.0, 0.5, 1.0, 2.0])
    mean = kps.solve_backward_stretched(model, ord, coeffs, t, 1.3)
    decay = np.real(ks_eval(-1.5 * t**ord.beta, ord.ks_params))
    assert np.isclose(mean[0], 1.3)
    assert np.allclose(mean, 0.5 + 0.8 * decay, rtol=1e-8)


def test_solver_errors():
    coeffs = kps.SpectralCoeffs.from_values(ou, [1.0, 0.5])
    assert np.isclose(
        kps.solve_backward_stretched(ou, ord, coeffs, 0.0, 0.4), 1 + 0.5 * 0.4
    )
    with pytest.raises(KindMismatchError):
        kps.solve_forward_stretched(ou, ord, coeffs, 1.0, 0.0)
    with pytest.raises(ParameterError):
        kps.solve_backward_stretched(ou, ord, coeffs, 1.0, 0.0, N=5)
    with pytest.raises(ParameterError):
        kps.solve_backward_stretched(ou, StretchedOrder(0.7, 0.5), coeffs, 1.0, 0.0)
    with pytest.raises(ParameterError):
        kps.SpectralCoeffs.from_values(ou, [])


def test_warnings():
    with pytest.warns(SmallTimeWarning):
        kps.transition_density_stretched(ou, ord, 0.0, 1e-4, 0.2, N=10)
    with pytest.warns(TruncationWarning):
        kps.transition_density_stretched(ou, ord, [0.0, 0.5], 0.01, 0.2, tol=1e-12)


def test_hyperbolic_factor():
    """Is T_0 = 1, T_n(0) = 1 and does T_n approach its envelope?"""
    model = kps.OU(theta=2.0)
    half = StretchedOrder(0.5)
    t = np.array([0.0, 0.5, 2.0])
    assert np.all(kps.hyperbolic_temporal_factor(model, half, 1.0, 2.0, 0, t) == 1)
    assert np.isclose(kps.hyperbolic_temporal_factor(model, half, 1.0, 2.0, 3, 0.0), 1)
    ratio = [
        float(kps.hyperbolic_temporal_factor(model, half, 1.0, 2.0, n, 1.0))
        / float(kps.hyperbolic_envelope(model, half, 1.0, 2.0, n, 1.0))
        for n in [10, 100]
    ]
    assert abs(ratio[1] - 1) < 0.02
    assert abs(ratio[1] - 1) < abs(ratio[0] - 1)


def test_classical_residual():
    """Is the backward residual of E[X_t^2 | y] first order in the time step?"""
    x = np.linspace(-2, 2, 9)
    classical = StretchedOrder(1.0)
    norms = []
    for n in [200, 400]:
        t = np.linspace(0, 1, n + 1)[:, None]
        u = x**2 * np.exp(-2 * t) + 1 - np.exp(-2 * t)
        norms.append(kps.residual_check(u, ou, classical, t.ravel(), x))
    assert norms[0].sup < 0.05
    assert norms[1].sup < 0.6 * norms[0].sup


def test_hyperbolic_residual():
    """Does the telegraph residual of a single mode shrink as the grid is refined?"""
    model = kps.OU(theta=2.0)
    coeffs = kps.SpectralCoeffs.from_values(model, [0.0, 1.0])
    xs = np.linspace(-2, 2, 5)
    origin = kps.orthonormal_poly(model, 1, xs)
    for order, factor in [(StretchedOrder(1.0), 0.6), (ord, 1.0)]:
        norms = []
        for n in [100, 200]:
            t = np.linspace(0, 2, n + 1)
            u = kps.solve_backward_hyperbolic(
                model, order, 1.0, 2.0, coeffs, t[:, None], xs[None, :], t_min=0.0
            )
            residual = kps.residual_check(
                u, model, order, t, xs, A=1.0, B=2.0, origin=origin, t_min=0.1
            )
            norms.append(residual.sup)
        assert norms[1] < factor * norms[0]


def test_domain():
    with pytest.raises(DomainError):
        kps.stationary_density(cir, -1.0)
    with pytest.raises(DomainError):
        kps.orthonormal_polys(jacobi, 3, 2.0)
    with pytest.raises(ParameterError):
        kps.orthonormal_poly(ou, -1, 0.0)
    with pytest.raises(ParameterError):
        kps.OU(theta=-1.0)
    with pytest.raises(ParameterError):
        kps.residual_check(np.zeros((3, 3)), ou, ord, [0, 1, 3], [0, 1, 2])


# test_gauss_orthonormality()
# test_classical_kernels()
# test_hyperbolic_factor()
