"""Gamma-family helpers and the double gamma function G(z; tau).

G(z; tau) is the entire function with G(1; tau) = 1 and the functional relations

    G(z + 1; tau) = Gamma(z / tau) G(z; tau),
    G(z + tau; tau) = (2 pi)^((tau - 1) / 2) tau^(1/2 - z) Gamma(z) G(z; tau).

It has zeros at z = -(mu tau + lam) for non-negative integers mu, lam.  Everything
here works with log G on the principal branch; callers exponentiate at the end.
"""

import functools
import logging
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import special

from .exceptions import ConvergenceError, DomainError, PoleError, ZeroOfGError

log = logging.getLogger(__name__)

# Number of Bernoulli corrections in the Euler-Maclaurin tails
_N_BERNOULLI = 6
_BERNOULLI = special.bernoulli(2 * _N_BERNOULLI)
_EM_WEIGHTS = np.array(
    [_BERNOULLI[2 * j] / math.factorial(2 * j) for j in range(1, _N_BERNOULLI + 1)]
)
# Highest power of z kept in the product tail
_TAIL_ORDER = 40


@dataclass(frozen=True)
class DoubleGammaCfg:
    """Settings for evaluating log G(z; tau).

    Parameters
    ----------
    tau : float
        Second period of G, must be positive.
    product_terms : int
        Minimum truncation M of the infinite product.
    limit_terms : int
        Truncation of the limits defining C(tau) and D(tau).
    stirling_threshold : float
        |z| above which the Stirling expansion is used in "auto" mode.
    tol : float
        Absolute tolerance for the product tail and the constants.
    """

    tau: float
    product_terms: int = 200
    limit_terms: int = 10_000
    stirling_threshold: float = 30.0
    tol: float = 1e-10

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be positive, got {}.".format(self.tau))
        if self.product_terms < 1 or self.limit_terms < 1:
            raise DomainError("product_terms and limit_terms must be positive.")
        if not self.stirling_threshold > 0:
            raise DomainError("stirling_threshold must be positive.")
        if not self.tol > 0:
            raise DomainError("tol must be positive.")


@dataclass(frozen=True)
class StirlingCoeffs:
    """Coefficients of the Stirling expansion of log G(z; tau)."""

    a2: float
    a1: float
    a0: float
    b2: float
    b1: float
    b0: float
    c1: float = 0.0
    c2: float = 0.0


def _as_cfg(cfg):
    if isinstance(cfg, DoubleGammaCfg):
        return cfg
    return DoubleGammaCfg(tau=float(cfg))


def _shape_out(out):
    return out if out.ndim else out[()]


def _is_nonpositive_integer(z):
    z = np.asarray(z)
    re = np.real(z)
    return (np.imag(z) == 0) & (re <= 0) & (re == np.round(re))


def log_gamma(z):
    """log Gamma(z), real for positive real input and principal otherwise."""
    z = np.asarray(z)
    if np.any(_is_nonpositive_integer(z)):
        raise PoleError("log_gamma has poles at non-positive integers.")
    if not np.iscomplexobj(z) and np.all(z > 0):
        return _shape_out(special.gammaln(z.astype(float)))
    return _shape_out(special.loggamma(z.astype(complex)))


def digamma(z):
    """The digamma function psi(z)."""
    z = np.asarray(z)
    if np.any(_is_nonpositive_integer(z)):
        raise PoleError("digamma has poles at non-positive integers.")
    return _shape_out(special.psi(z))


_mp_trigamma = np.vectorize(lambda w: complex(mp.psi(1, w)), otypes=[complex])


def trigamma(z):
    """The trigamma function psi'(z)."""
    z = np.asarray(z)
    if np.any(_is_nonpositive_integer(z)):
        raise PoleError("trigamma has poles at non-positive integers.")
    if np.iscomplexobj(z):
        return _shape_out(_mp_trigamma(z))
    return _shape_out(special.polygamma(1, z.astype(float)))


def _c_partial(tau, m):
    k = np.arange(1, m) * tau
    head = math.fsum(special.psi(k)) + 0.5 * special.psi(m * tau)
    value = head - (special.gammaln(m * tau) - 0.5 * np.log(2 * np.pi)) / tau
    orders = np.arange(1, 2 * _N_BERNOULLI, 2)
    corr = _EM_WEIGHTS * tau**orders * special.polygamma(orders, m * tau)
    return value - math.fsum(corr)


def _d_partial(tau, m):
    k = np.arange(1, m) * tau
    head = math.fsum(special.polygamma(1, k)) + 0.5 * special.polygamma(1, m * tau)
    value = head - special.psi(m * tau) / tau
    orders = np.arange(1, 2 * _N_BERNOULLI, 2)
    corr = _EM_WEIGHTS * tau**orders * special.polygamma(orders + 1, m * tau)
    return value - math.fsum(corr)


def _limit(partial, name, tau, cfg):
    m = cfg.limit_terms
    coarse = partial(tau, m)
    fine = partial(tau, 2 * m)
    if abs(fine - coarse) > 10 * cfg.tol:
        raise ConvergenceError(
            "{}({}) changed by {:.3g} when doubling limit_terms.".format(
                name, tau, abs(fine - coarse)
            )
        )
    return fine


@functools.lru_cache(maxsize=256)
def _c_cached(tau, cfg):
    return _limit(_c_partial, "C", tau, cfg)


@functools.lru_cache(maxsize=256)
def _d_cached(tau, cfg):
    return _limit(_d_partial, "D", tau, cfg)


def c_const(tau, cfg=None):
    """The constant C(tau) entering the linear coefficient of the product formula.

    C(tau) is the limit as m grows of

        sum_{k<m} psi(k tau) + psi(m tau) / 2 - log(Gamma(m tau) / sqrt(2 pi)) / tau,

    evaluated with an Euler-Maclaurin correction at ``m`` and ``2 m`` terms.
    """
    if not tau > 0:
        raise DomainError("tau must be positive, got {}.".format(tau))
    cfg = DoubleGammaCfg(tau=tau) if cfg is None else cfg
    return _c_cached(float(tau), cfg)


def d_const(tau, cfg=None):
    """The constant D(tau) entering the quadratic coefficient of the product formula.

    D(tau) is the limit of sum_{k<m} psi'(k tau) + psi'(m tau) / 2 - psi(m tau) / tau.
    """
    if not tau > 0:
        raise DomainError("tau must be positive, got {}.".format(tau))
    cfg = DoubleGammaCfg(tau=tau) if cfg is None else cfg
    return _d_cached(float(tau), cfg)


def _check_zeros(z, tau):
    z = np.asarray(z, dtype=complex)
    real_axis = (z.imag == 0) & (z.real <= 0)
    if not np.any(real_axis):
        return
    for x in -z.real[real_axis]:
        mu = np.arange(0, int(np.floor(x / tau)) + 1)
        lam = x - mu * tau
        if np.any(np.abs(lam - np.round(lam)) <= 1e-12 * max(1.0, x)):
            raise ZeroOfGError(
                "z = {} is a zero of G(z; {}), log G is undefined.".format(-x, tau)
            )


@functools.lru_cache(maxsize=64)
def _tail_sums(tau, M):
    """Euler-Maclaurin sums S_n = sum_{m > M} psi^(n)(m tau) for n = 2..order."""
    x = M * tau
    n = np.arange(2, _TAIL_ORDER)
    S = -special.polygamma(n - 1, x) / tau - 0.5 * special.polygamma(n, x)
    for j, weight in enumerate(_EM_WEIGHTS, start=1):
        S = S - weight * tau ** (2 * j - 1) * special.polygamma(n + 2 * j - 1, x)
    return S


@functools.lru_cache(maxsize=64)
def _head_constants(tau, M):
    mt = np.arange(1, M + 1) * tau
    return special.gammaln(mt), special.psi(mt), special.polygamma(1, mt)


def _wrap_imag(w):
    return w.real + 1j * (np.pi - np.mod(np.pi - w.imag, 2 * np.pi))


def _log_G_product(z, cfg):
    tau = cfg.tau
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zmax = np.max(np.abs(z)) if z.size else 0.0
    M = max(cfg.product_terms, int(np.ceil(4 * zmax / tau)))
    C = c_const(tau, DoubleGammaCfg(tau=tau, limit_terms=cfg.limit_terms, tol=cfg.tol))
    D = d_const(tau, DoubleGammaCfg(tau=tau, limit_terms=cfg.limit_terms, tol=cfg.tol))
    a_tilde = tau / 2 * np.log(2 * np.pi * tau) + 0.5 * np.log(tau) - tau * C
    b_tilde = -tau * np.log(tau) - tau**2 * D
    out = (
        -np.log(tau)
        - special.loggamma(z)
        + a_tilde * z / tau
        + b_tilde * z**2 / (2 * tau**2)
    )
    lg, psi, psi1 = _head_constants(tau, M)
    mt = np.arange(1, M + 1) * tau
    chunk = 256
    for start in range(0, M, chunk):
        stop = min(start + chunk, M)
        zz = z[:, None]
        terms = (
            lg[start:stop]
            - special.loggamma(zz + mt[start:stop])
            + zz * psi[start:stop]
            + zz**2 * psi1[start:stop] / 2
        )
        out = out + terms.sum(axis=1)
    # Tail over m > M as a power series in z
    S = _tail_sums(tau, M)
    power = z**3 / 6
    tail = np.zeros_like(z)
    last = power
    for k in range(3, _TAIL_ORDER + 1):
        last = power * S[k - 3]
        tail = tail - last
        power = power * z / (k + 1)
    if np.any(np.abs(last) > cfg.tol):
        raise ConvergenceError(
            "Product tail did not converge for |z| = {:.3g}, tau = {}.".format(
                zmax, tau
            )
        )
    out = out + tail
    log.debug("log G product with M=%d terms at tau=%g", M, tau)
    return _wrap_imag(out)


@functools.lru_cache(maxsize=256)
def double_gamma_stirling_coeffs(tau):
    """Stirling expansion coefficients of log G(z; tau)."""
    tau = float(tau)
    a2 = 1 / (2 * tau)
    a1 = -(1 + 1 / tau) / 2
    a0 = tau / 12 + 0.25 + 1 / (12 * tau)
    b2 = -(1.5 + np.log(tau)) / (2 * tau)
    b1 = 0.5 * ((1 + 1 / tau) * (1 + np.log(tau)) + np.log(2 * np.pi))
    log_G_half = log_double_gamma(0.5, DoubleGammaCfg(tau=tau), method="product").real
    log_G_tau = log_double_gamma(
        tau, DoubleGammaCfg(tau=2 * tau), method="product"
    ).real
    b0 = (
        2 * log_G_half
        + log_G_tau
        - (1 + tau) / 2 * np.log(2 * np.pi)
        - a0 * np.log(tau**3 / 2)
        - np.log(2)
    ) / 3
    c1 = -(1 + tau) / 24
    c2 = 1 / (720 * tau) - tau / 144 + tau**3 / 720
    return StirlingCoeffs(a2=a2, a1=a1, a0=a0, b2=b2, b1=b1, b0=float(b0), c1=c1, c2=c2)


def stirling_log_G(z, tau):
    """Stirling expansion of log G(z; tau) for large |z| with Re z > 0.

    (a2 z^2 + a1 z + a0) log z + b2 z^2 + b1 z + b0 + c1 / z + c2 / z^2,
    with a remainder of order |z|^-3.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise DomainError("The Stirling expansion of G needs Re z > 0.")
    c = double_gamma_stirling_coeffs(float(tau))
    value = (
        (c.a2 * z**2 + c.a1 * z + c.a0) * np.log(z)
        + c.b2 * z**2
        + c.b1 * z
        + c.b0
        + c.c1 / z
        + c.c2 / z**2
    )
    return _shape_out(_wrap_imag(value))


def log_double_gamma(z, cfg, method="auto"):
    """Principal log G(z; tau).

    Parameters
    ----------
    z : complex or array_like
        Argument(s); must avoid the zeros -(mu tau + lam).
    cfg : DoubleGammaCfg or float
        Settings, or just tau for the default settings.
    method : str
        "product", "stirling" or "auto".  In "auto" the Stirling expansion is
        used where |z| > cfg.stirling_threshold and Re z > 0.

    Returns
    -------
    complex or ndarray
        log G(z; tau) with imaginary part wrapped to (-pi, pi].
    """
    cfg = _as_cfg(cfg)
    z = np.asarray(z, dtype=complex)
    _check_zeros(z, cfg.tau)
    if method == "product":
        return _shape_out(_log_G_product(z, cfg).reshape(z.shape))
    if method == "stirling":
        return stirling_log_G(z, cfg.tau)
    if method != "auto":
        raise ValueError("method must be 'auto', 'product' or 'stirling'.")
    out = np.empty(z.shape, dtype=complex)
    large = (np.abs(z) > cfg.stirling_threshold) & (z.real > 0)
    if np.any(large):
        out[large] = stirling_log_G(z[large], cfg.tau)
    if np.any(~large):
        out[~large] = _log_G_product(z[~large], cfg)
    return _shape_out(out)


def double_gamma_ratio_shift(z, k, tau):
    """log[G(z + k; tau) / G(z; tau)] = sum_{j<k} log Gamma((z + j) / tau)."""
    if k < 0:
        raise ValueError("k must be non-negative.")
    z = np.asarray(z)
    out = np.zeros(z.shape, dtype=complex if np.iscomplexobj(z) else float)
    for j in range(k):
        out = out + log_gamma((z + j) / tau)
    return _shape_out(np.asarray(out))
