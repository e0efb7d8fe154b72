import mpmath as mp
import numpy as np
import pytest
from ksdiff import double_gamma as kdg
from ksdiff.exceptions import DomainError, ParameterError, PoleError, ZeroOfGError


def _wrapped(d):
    d = np.asarray(d, dtype=complex)
    return np.abs(d.real + 1j * np.angle(np.exp(1j * d.imag)))


def test_log_gamma():
    """Does log_gamma agree with the factorial and reject the poles?"""
    assert np.isclose(kdg.log_gamma(5.0), np.log(24))
    assert np.isclose(kdg.log_gamma(0.5 + 0j), 0.5 * np.log(np.pi))
    with pytest.raises(PoleError):
        kdg.log_gamma(-1.0)


def test_digamma_trigamma():
    assert np.isclose(kdg.digamma(1.0), -np.euler_gamma)
    assert np.isclose(kdg.trigamma(1.0), np.pi**2 / 6)
    assert np.isclose(kdg.trigamma(1.0 + 0j), np.pi**2 / 6)


def test_constants_at_tau_1():
    """Do the limits C(1) and D(1) reproduce the Barnes G values?"""
    assert np.isclose(kdg.c_const(1.0), 0.5, rtol=1e-8)
    assert np.isclose(kdg.d_const(1.0), 1 + np.euler_gamma, rtol=1e-8)


def test_normalisation():
    """Is G(1; tau) = 1 for every tau?"""
    for tau in [0.3, 0.5, 0.7, 1.0, 4 / 3, 2.5]:
        assert abs(kdg.log_double_gamma(1.0, tau)) < 1e-9
        assert abs(kdg.log_double_gamma(1.0, tau, method="product")) < 1e-10


def test_product_tail():
    """Does the product keep its tail, so that G(3; 2) = Gamma(1/2) Gamma(1)?"""
    value = np.exp(kdg.log_double_gamma(3.0, 2.0, method="product"))
    assert np.isclose(value, np.sqrt(np.pi), rtol=1e-9)
    z, tau = 1.3, 0.9
    one = kdg.log_double_gamma(z + 1, tau, method="product") - kdg.log_double_gamma(
        z, tau, method="product"
    )
    assert abs(one - kdg.log_gamma(z / tau)) < 1e-9


def test_barnes_G():
    """At tau = 1 the double gamma function is the Barnes G function."""
    for z in [0.5, 3.7, 0.5 + 0.3j, 2.2 - 1j]:
        expected = complex(mp.barnesg(z))
        value = np.exp(kdg.log_double_gamma(z, 1.0, method="product"))
        assert np.isclose(value, expected, rtol=1e-8)
    assert np.isclose(np.exp(kdg.log_double_gamma(5.0, 1.0)).real, 12, rtol=1e-8)


def test_functional_relations():
    re, im = np.meshgrid(np.linspace(0.3, 3, 4), np.linspace(-2, 2, 3))
    z = (re + 1j * im).ravel()
    for tau in [0.7, 1.6]:
        G = kdg.log_double_gamma(z, tau, method="product")
        one = kdg.log_double_gamma(z + 1, tau, method="product") - G
        assert np.all(_wrapped(one - kdg.log_gamma(z / tau)) < 1e-9)
        shift = kdg.log_double_gamma(z + tau, tau, method="product") - G
        expected = (
            (tau - 1) / 2 * np.log(2 * np.pi)
            + (0.5 - z) * np.log(tau)
            + kdg.log_gamma(z)
        )
        assert np.all(_wrapped(shift - expected) < 1e-9)


def test_stirling_matches_product():
    """Do the Stirling and product evaluations agree on the switching annulus?"""
    ring = np.concatenate(
        [r * np.exp(1j * np.linspace(-1.2, 1.2, 5)) for r in (30.0, 45.0, 60.0)]
    )
    for tau in [0.5, 1.0, 2.0]:
        stirling = kdg.stirling_log_G(ring, tau)
        product = kdg.log_double_gamma(ring, tau, method="product")
        assert np.all(_wrapped(stirling - product) < 1e-5)


def test_stirling_coeffs_barnes():
    c = kdg.double_gamma_stirling_coeffs(1.0)
    assert np.isclose(c.a2, 0.5)
    assert np.isclose(c.a1, -1)
    assert np.isclose(c.a0, 5 / 12)
    assert np.isclose(c.b2, -0.75)
    assert np.isclose(c.b1, 1 + 0.5 * np.log(2 * np.pi))
    assert np.isclose(c.c1, -1 / 12)
    assert np.isclose(c.c2, -1 / 240)


def test_auto_switching():
    z = np.array([2.0 + 1j, 40.0 + 5j])
    auto = kdg.log_double_gamma(z, 0.8)
    assert np.isclose(auto[0], kdg.log_double_gamma(z[0], 0.8, method="product"))
    assert np.isclose(auto[1], kdg.stirling_log_G(z[1], 0.8))


def test_ratio_shift():
    z, tau = 0.7 + 0.2j, 0.6
    expected = kdg.log_gamma(z / tau) + kdg.log_gamma((z + 1) / tau)
    assert np.isclose(kdg.double_gamma_ratio_shift(z, 2, tau), expected)
    assert kdg.double_gamma_ratio_shift(z, 0, tau) == 0


def test_errors():
    with pytest.raises(ZeroOfGError):
        kdg.log_double_gamma(-1.0, 1.0)
    with pytest.raises(ZeroOfGError):
        kdg.log_double_gamma(-0.5, 0.5)
    with pytest.raises(DomainError):
        kdg.stirling_log_G(-40.0 + 1j, 1.0)
    with pytest.raises(ParameterError):
        kdg.DoubleGammaCfg(tau=-1.0)
    with pytest.raises(ValueError):
        kdg.log_double_gamma(1.0, 1.0, method="taylor")


# test_log_gamma()
# test_barnes_G()
# test_functional_relations()
# test_stirling_matches_product()
