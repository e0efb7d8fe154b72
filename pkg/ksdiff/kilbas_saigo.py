"""The Kilbas-Saigo function E_{a,m,l}(z).

    E_{a,m,l}(z) = sum_n c_n z^n,  c_0 = 1,
    c_n = prod_{k<n} Gamma(1 + a(km + l)) / Gamma(1 + a(km + l + 1)).

Three evaluation regimes are available and chosen by `ks_eval`: the power series,
a Mellin-Barnes contour integral for E(-z) with Re z > 0, and the large-|z|
expansion obtained by closing that contour to the right.
"""

import functools
import logging
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
import pandas as pd
from scipy import integrate, special

from .double_gamma import DoubleGammaCfg, double_gamma_ratio_shift, log_double_gamma
from .exceptions import (
    CoefficientOverflowError,
    ConvergenceError,
    DomainError,
    ParameterError,
    UnsupportedRegionError,
    ZeroOfGError,
)

log = logging.getLogger(__name__)

_LOG_MAX = np.log(np.finfo(float).max)
_EPS = np.finfo(float).eps
_MAX_DIGITS = 1000


@dataclass(frozen=True)
class KSParams:
    """Parameters (a, m, l) of E_{a,m,l}."""

    a: float
    m: float
    l: float

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise ParameterError(
                "KS parameter a must satisfy 0 < a <= 1, got {}.".format(self.a)
            )
        if not self.m > 0:
            raise ParameterError(
                "KS parameter m must satisfy m > 0, got {}.".format(self.m)
            )
        if not self.l > -1 / self.a:
            raise ParameterError(
                "KS parameter l must satisfy l > -1/a = {:.6g}, got {}.".format(
                    -1 / self.a, self.l
                )
            )

    @classmethod
    def stretched(cls, alpha, gamma):
        """Parameters of the eigenfunction of the stretched Caputo operator."""
        return cls(a=alpha, m=1 + gamma / alpha, l=gamma / alpha)

    @property
    def tau(self):
        return 1 / (self.a * self.m)

    @property
    def phi(self):
        return (1 + self.a * self.l) * self.tau

    @property
    def admits_mellin_barnes(self):
        """Whether l > m - 1/a, i.e. phi > 1."""
        return self.phi > 1

    @property
    def is_exponential(self):
        return self.a == 1 and self.m == 1 and self.l == 0


@dataclass(frozen=True)
class MBContourCfg:
    """Contour settings for the Mellin-Barnes integral.

    ``c`` defaults to half of min(1, phi + a tau) and ``half_height`` is chosen
    automatically from the exponential decay rate when left as None.
    """

    c: float = None
    half_height: float = None
    n_nodes: int = 4001
    tol: float = 1e-10

    def __post_init__(self):
        if self.n_nodes < 3:
            raise ParameterError("n_nodes must be at least 3.")
        if self.half_height is not None and not self.half_height > 0:
            raise ParameterError("half_height must be positive.")
        if not self.tol > 0:
            raise ParameterError("tol must be positive.")


@dataclass(frozen=True)
class AsymptoticOrder:
    delta: float
    leading_coeff: float


@dataclass(frozen=True)
class KSEvalCfg:
    """Regime switching for `ks_eval`.

    Parameters
    ----------
    series_radius : float
        |z| up to which the power series may be used.
    asymptotic_radius : float
        |z| beyond which the asymptotic expansion is tried.
    max_series_loss : float
        Largest log10 of the peak series term accepted before preferring
        the Mellin-Barnes integral.
    tol : float
        Absolute tolerance.
    """

    series_radius: float = 20.0
    asymptotic_radius: float = 1e3
    max_series_loss: float = 3.0
    tol: float = 1e-10
    contour: MBContourCfg = field(default_factory=MBContourCfg)


def _shape_out(out):
    return out if out.ndim else out[()]


@functools.lru_cache(maxsize=128)
def _log_coeffs(p, n):
    k = np.arange(max(n - 1, 0))
    x = 1 + p.a * (k * p.m + p.l)
    steps = special.gammaln(x) - special.gammaln(x + p.a)
    out = np.concatenate([[0.0], np.cumsum(steps)])
    out = out[:n]
    out.setflags(write=False)
    return out


def ks_log_coeffs(n, p):
    """log c_0, ..., log c_{n-1}."""
    return _log_coeffs(p, int(n)).copy()


def ks_coeff(n, p):
    """The coefficient c_n, assembled in log space from double gamma ratios."""
    if n < 0:
        raise ValueError("n must be non-negative.")
    log_c = double_gamma_ratio_shift(p.phi, n, p.tau) - double_gamma_ratio_shift(
        p.phi + p.a * p.tau, n, p.tau
    )
    log_c = float(np.real(log_c))
    if log_c > _LOG_MAX:
        raise CoefficientOverflowError(
            "log c_{} = {:.6g} cannot be exponentiated.".format(n, log_c)
        )
    return math.exp(log_c)


def _series_mp(z, p, n_terms, dps):
    with mp.workdps(dps):
        a, m, l = mp.mpf(p.a), mp.mpf(p.m), mp.mpf(p.l)
        zz = mp.mpc(z.real, z.imag)
        total = mp.mpc(0)
        term = mp.mpc(1)
        for k in range(n_terms):
            total += term
            x = 1 + a * (k * m + l)
            term *= zz * mp.exp(mp.loggamma(x) - mp.loggamma(x + a))
        return complex(total)


def _series_one(z, p, tol, max_terms):
    if z == 0:
        return 1 + 0j, 0.0
    log_c = _log_coeffs(p, max_terms)
    n = np.arange(max_terms)
    log_mag = log_c + n * np.log(abs(z))
    peak = int(np.argmax(log_mag))
    small = log_mag[peak + 1 :] < np.log(tol)
    pairs = np.flatnonzero(small[:-1] & small[1:])
    if not pairs.size:
        raise ConvergenceError(
            "KS series at |z| = {:.6g} needs more than {} terms.".format(
                abs(z), max_terms
            )
        )
    stop = peak + 1 + int(pairs[0]) + 2
    log_total = special.logsumexp(log_mag[:stop])
    truncation = math.exp(log_mag[stop - 1])
    if np.log(4 * _EPS) + log_total > np.log(tol):
        digits = int(np.ceil((log_total - np.log(tol)) / np.log(10))) + 10
        if digits > _MAX_DIGITS:
            raise ConvergenceError(
                "KS series at |z| = {:.6g} cancels {} digits; at most {} are "
                "allowed.".format(abs(z), digits, _MAX_DIGITS)
            )
        log.debug("KS series at z=%s: %d terms in %d-digit arithmetic", z, stop, digits)
        return _series_mp(z, p, stop, max(digits, 20)), truncation
    rounding = 4 * _EPS * math.exp(log_total)
    if z.imag == 0:
        terms = np.exp(log_c[:stop] + n[:stop] * np.log(abs(z.real)))
        if z.real < 0:
            terms[1::2] = -terms[1::2]
        return complex(math.fsum(terms)), truncation + rounding
    terms = np.exp(log_c[:stop] + n[:stop] * np.log(z))
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return value, truncation + rounding


def _series(z, p, tol, max_terms):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    err = np.empty(z.shape)
    for idx, zi in np.ndenumerate(z):
        out[idx], err[idx] = _series_one(complex(zi), p, tol, max_terms)
    return out, err


def ks_series(z, p, tol=1e-12, max_terms=10_000):
    """E_{a,m,l}(z) by its power series.

    Summation stops at the first two consecutive terms below ``tol`` past the
    largest term.  When rounding in double precision would exceed ``tol`` the
    same partial sum is taken in extended precision, sized from the log of the
    sum of magnitudes.  More than ``_MAX_DIGITS`` digits raises
    `ConvergenceError`.
    """
    out, _ = _series(z, p, tol, max_terms)
    return _shape_out(out)


def _log_sin_pi(s):
    sign = np.where(s.imag >= 0, 1.0, -1.0)
    w = np.exp(2j * np.pi * sign * s)
    return np.log(0.5j * sign) - 1j * np.pi * sign * s + np.log1p(-w)


def _log_G_ratio(p, w):
    """log G(w; tau) - log G(w + a tau; tau)."""
    shift = p.a * p.tau
    k = round(shift)
    if k >= 1 and abs(shift - k) < 1e-12:
        return -double_gamma_ratio_shift(w, int(k), p.tau)
    cfg = DoubleGammaCfg(tau=p.tau)
    return log_double_gamma(w, cfg, method="product") - log_double_gamma(
        w + shift, cfg, method="product"
    )


@functools.lru_cache(maxsize=32)
def _mb_prefactor(p):
    return float(np.exp(-np.real(_log_G_ratio(p, np.asarray(p.phi, dtype=complex)))))


@functools.lru_cache(maxsize=32)
def _mb_kernel(p, c, H, n_nodes):
    eta = np.linspace(-H, H, n_nodes)
    s = c + 1j * eta
    weights = np.full(n_nodes, 2 * H / (n_nodes - 1))
    weights[[0, -1]] /= 2
    log_k = np.log(np.pi) - _log_sin_pi(s) + _log_G_ratio(p, p.phi - s)
    log_k = log_k + np.log(weights)
    log.debug("MB kernel for %s with H=%g on %d nodes", p, H, n_nodes)
    s.setflags(write=False)
    log_k.setflags(write=False)
    return s, log_k


def _mb_abscissa(p, cfg):
    eps = min(1.0, p.phi + p.a * p.tau)
    c = eps / 2 if cfg.c is None else cfg.c
    if not 0 < c < eps:
        raise ParameterError(
            "Contour abscissa must satisfy 0 < c < {:.6g}, got {}.".format(eps, c)
        )
    return c


def _mb(z, p, cfg):
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if not p.admits_mellin_barnes:
        raise DomainError(
            "Mellin-Barnes needs l > m - 1/a (phi > 1), got phi = {:.6g}.".format(
                p.phi
            )
        )
    if np.any(z.real <= 0):
        raise DomainError("The Mellin-Barnes representation of E(-z) needs Re z > 0.")
    c = _mb_abscissa(p, cfg)
    rate = np.pi * (1 - p.a / 2) - np.max(np.abs(np.angle(z)))
    log_z = np.log(z)
    prefactor = _mb_prefactor(p) / (2 * np.pi)
    fixed = cfg.half_height is not None
    H = cfg.half_height if fixed else 2 * np.ceil((np.log(1 / cfg.tol) + 5) / rate / 2)
    while True:
        n_nodes = max(cfg.n_nodes, int(np.ceil(2 * H / 0.02)) + 1)
        s, log_k = _mb_kernel(p, c, float(H), n_nodes)
        end_weight = np.log(H / (n_nodes - 1))
        ends = log_k[[0, -1]] - end_weight
        log_ends = ends[None, :] - s[[0, -1]][None, :] * log_z[:, None]
        tail = prefactor * np.exp(log_ends.real).sum(axis=1) / rate
        if np.all(tail <= cfg.tol / 10):
            break
        if fixed or H > 200:
            raise ConvergenceError(
                "Mellin-Barnes tail {:.3g} exceeds tol at H = {:g}.".format(
                    tail.max(), H
                )
            )
        H = 1.5 * H
    out = np.empty(z.shape, dtype=complex)
    chunk = 128
    for start in range(0, z.size, chunk):
        lz = log_z[start : start + chunk, None]
        terms = np.exp(log_k[None, :] - s[None, :] * lz)
        out[start : start + chunk] = terms.sum(axis=1)
    return prefactor * out, tail


def ks_mellin_barnes(z, p, cfg=None):
    """E_{a,m,l}(-z) for Re z > 0 by trapezoidal Mellin-Barnes quadrature.

    Parameters
    ----------
    z : complex or array_like
        Argument(s) with positive real part; note the sign convention.
    p : KSParams
        Must satisfy l > m - 1/a.
    cfg : MBContourCfg, optional
        Contour abscissa, half height, node count and tolerance.

    Returns
    -------
    complex or ndarray
        E_{a,m,l}(-z).
    """
    cfg = MBContourCfg() if cfg is None else cfg
    z = np.asarray(z, dtype=complex)
    out, _ = _mb(z, p, cfg)
    return _shape_out(out.reshape(z.shape))


def _regularized_gamma(x):
    """Gamma(x), or its residue factor and a pole count at non-positive integers."""
    n = round(-x)
    if x <= 0 and abs(x + n) < 1e-12:
        return (-1) ** n / math.factorial(n), 1
    return special.gamma(x), 0


def _integer_pole_coeff(p, k):
    value = float((-1) ** (k + 1))
    poles = 0
    for j in range(1, k + 1):
        num, num_pole = _regularized_gamma(1 + p.a * (p.l - j * p.m + 1))
        den, den_pole = _regularized_gamma(1 + p.a * (p.l - j * p.m))
        value *= num / den
        poles += num_pole - den_pole
    if poles > 0:
        return None
    return 0.0 if poles < 0 else value


@functools.lru_cache(maxsize=128)
def _asymptotic_terms(p):
    """Terms of E(-z) ~ sum coeff z^(-exponent), plus the next exponent."""
    s0 = p.phi + p.a * p.tau
    terms = []
    k = 1
    while k < s0 - 1e-12:
        coeff = _integer_pole_coeff(p, k)
        if coeff is None:
            return tuple(terms), float(k)
        terms.append((float(k), coeff))
        k += 1
    if abs(s0 - round(s0)) <= 1e-12:
        return tuple(terms), s0
    try:
        g = np.exp(log_double_gamma(-p.a * p.tau, DoubleGammaCfg(tau=p.tau))).real
    except ZeroOfGError:
        g = 0.0
    coeff = p.tau * _mb_prefactor(p) * np.pi / np.sin(np.pi * s0) * g
    terms.append((s0, float(coeff)))
    return tuple(terms), min(float(k), s0 + min(p.tau, 1.0))


def _asymptotic(z, p, n_terms=None):
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise DomainError("The asymptotic expansion of E(-z) needs Re z > 0.")
    if not p.admits_mellin_barnes:
        raise DomainError("The asymptotic expansion needs l > m - 1/a (phi > 1).")
    terms, following = _asymptotic_terms(p)
    if n_terms is not None and n_terms < len(terms):
        following = terms[n_terms][0]
        terms = terms[:n_terms]
    log_z = np.log(z)
    value = np.zeros(z.shape, dtype=complex)
    for exponent, coeff in terms:
        value = value + coeff * np.exp(-exponent * log_z)
    scale = max([1.0] + [abs(c) for _, c in terms])
    error = scale * np.abs(z) ** (-following)
    return value, error


def ks_asymptotic(z, p, n_terms=1):
    """Large-|z| expansion of E_{a,m,l}(-z) for Re z > 0.

    The leading term is Gamma(1 + a(l - m + 1)) / Gamma(1 + a(l - m)) / z.  With
    ``n_terms`` > 1 further residues are added in order of increasing exponent,
    up to the pole at s = phi + a tau and never across a double pole.

    Returns
    -------
    value : complex or ndarray
        The truncated expansion.
    order : AsymptoticOrder
        Error exponent delta of the one-term expansion and its coefficient.
    """
    value, _ = _asymptotic(z, p, n_terms)
    s0 = p.phi + p.a * p.tau
    shift = p.a * (p.l - p.m)
    r1 = special.gamma(1 + shift + p.a) * special.rgamma(1 + shift)
    order = AsymptoticOrder(delta=(1 + min(s0, 2.0)) / 2, leading_coeff=float(r1))
    return _shape_out(value), order


def series_peak_log10(p, r, max_terms=10_000):
    """log10 of the largest power series term at |z| = r.

    Infinite when the terms still grow at ``max_terms``.
    """
    log_mag = _log_coeffs(p, max_terms) + np.arange(max_terms) * np.log(r)
    peak = int(np.argmax(log_mag))
    if peak == max_terms - 1:
        return np.inf
    return log_mag[peak] / np.log(10)


def _dispatch(z, p, cfg):
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    lower = flat.imag < 0
    w = np.where(lower, np.conj(flat), flat)
    values = np.empty(w.shape, dtype=complex)
    errors = np.zeros(w.shape)
    regimes = np.empty(w.shape, dtype=object)
    if p.is_exponential:
        values[:] = np.exp(w)
        errors[:] = _EPS * np.abs(values)
        regimes[:] = "exponential"
    else:
        radius = np.abs(w)
        mb_ok = p.admits_mellin_barnes & ((-w).real > 0)
        for i, zi in enumerate(w):
            r = radius[i]
            if r == 0:
                regimes[i] = "series"
            elif mb_ok[i] and r > cfg.asymptotic_radius:
                _, err = _asymptotic(-zi, p)
                regimes[i] = "asymptotic" if err <= cfg.tol else "mellin-barnes"
            elif r <= cfg.series_radius and (
                not mb_ok[i] or series_peak_log10(p, r) <= cfg.max_series_loss
            ):
                regimes[i] = "series"
            elif mb_ok[i]:
                regimes[i] = "mellin-barnes"
            elif r <= cfg.series_radius:
                regimes[i] = "series"
            else:
                raise UnsupportedRegionError(
                    "No KS regime covers z = {}: |z| > {} with Re(-z) <= 0 "
                    "or phi <= 1.".format(complex(zi), cfg.series_radius)
                )
        for name in ("series", "mellin-barnes", "asymptotic"):
            sel = regimes == name
            if not np.any(sel):
                continue
            if name == "series":
                values[sel], errors[sel] = _series(w[sel], p, cfg.tol, 10_000)
            elif name == "mellin-barnes":
                contour = cfg.contour
                if contour.tol != cfg.tol:
                    contour = MBContourCfg(
                        c=contour.c,
                        half_height=contour.half_height,
                        n_nodes=contour.n_nodes,
                        tol=cfg.tol,
                    )
                values[sel], errors[sel] = _mb(-w[sel], p, contour)
            else:
                values[sel], errors[sel] = _asymptotic(-w[sel], p)
            log.debug("KS regime %s for %d points", name, sel.sum())
    values[w.imag == 0] = values[w.imag == 0].real
    values = np.where(lower, np.conj(values), values)
    return values.reshape(z.shape), regimes.reshape(z.shape), errors.reshape(z.shape)


def ks_eval(z, p, tol=None, cfg=None):
    """Evaluate E_{a,m,l}(z) anywhere it is supported.

    The power series is used for |z| up to ``cfg.series_radius`` unless its
    terms grow so large that cancellation would cost accuracy; the
    Mellin-Barnes integral covers Re(-z) > 0 beyond that, and the asymptotic
    expansion takes over for |z| > ``cfg.asymptotic_radius`` once its next-term
    estimate is within ``tol``.  Values satisfy E(conj z) = conj E(z) exactly.
    """
    cfg = KSEvalCfg() if cfg is None else cfg
    if tol is not None:
        cfg = KSEvalCfg(
            series_radius=cfg.series_radius,
            asymptotic_radius=cfg.asymptotic_radius,
            max_series_loss=cfg.max_series_loss,
            tol=tol,
            contour=cfg.contour,
        )
    values, _, _ = _dispatch(z, p, cfg)
    return _shape_out(values)


def ks_eval_table(z, p, cfg=None):
    """Evaluate E_{a,m,l}(z) and tabulate the regime and error estimate per point."""
    cfg = KSEvalCfg() if cfg is None else cfg
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    values, regimes, errors = _dispatch(z, p, cfg)
    return pd.DataFrame(
        {
            "re_z": z.real,
            "im_z": z.imag,
            "re_E": values.real,
            "im_E": values.imag,
            "regime": regimes,
            "est_error": errors,
        }
    )


def ks_bounds(x, a, m):
    """Lower and upper bounds of E_{a,m,m-1}(-x) for x >= 0.

    At a = 1 the lower bound degenerates to the indicator of x = 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("ks_bounds needs x >= 0.")
    if not 0 <= a <= 1:
        raise DomainError("ks_bounds needs 0 <= a <= 1, got {}.".format(a))
    if not m > 0:
        raise DomainError("ks_bounds needs m > 0, got {}.".format(m))
    if a == 1:
        lower = np.where(x == 0, 1.0, 0.0)
    else:
        lower = 1 / (1 + special.gamma(1 - a) * x)
    upper = 1 / (1 + special.gamma(1 + a * (m - 1)) * special.rgamma(1 + a * m) * x)
    return _shape_out(np.asarray(lower)), _shape_out(np.asarray(upper))


def mellin_barnes_constant():
    """Integral of sqrt((1 + 4 eta^2 / 9)(1 + 4 eta^2) / cosh(pi eta)) over R."""

    def integrand(eta):
        sech = 2 * np.exp(-np.pi * eta) / (1 + np.exp(-2 * np.pi * eta))
        return np.sqrt((1 + 4 * eta**2 / 9) * (1 + 4 * eta**2) * sech)

    half, _ = integrate.quad(integrand, 0, np.inf, epsabs=1e-12, epsrel=1e-12)
    return 2 * half
