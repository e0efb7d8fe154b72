"""The stretched Caputo operator D^(alpha,gamma) = t^(-gamma) C D^alpha."""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import (
    ConvergenceError,
    DegenerateRootsError,
    GridWarning,
    ParameterError,
)
from .kilbas_saigo import KSParams, ks_eval

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StretchedOrder:
    """Order (alpha, gamma) of the stretched Caputo operator.

    alpha = 1 with gamma = 0 is the classical first derivative.
    """

    alpha: float
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ParameterError(
                "alpha must satisfy 0 < alpha <= 1, got {}.".format(self.alpha)
            )
        if not self.gamma >= 0:
            raise ParameterError(
                "gamma must satisfy gamma >= 0, got {}.".format(self.gamma)
            )

    @property
    def beta(self):
        """Total time exponent alpha + gamma."""
        return self.alpha + self.gamma

    @property
    def ks_params(self):
        return KSParams.stretched(self.alpha, self.gamma)

    @property
    def is_classical(self):
        return self.alpha == 1 and self.gamma == 0

    def check_solver(self):
        """Raise unless 0 < alpha + gamma <= 1, as the spectral solvers require."""
        if self.beta > 1:
            raise ParameterError(
                "Solvers need alpha + gamma <= 1, got {:.6g}.".format(self.beta)
            )
        return self


@dataclass(frozen=True)
class TelegraphCoeffs:
    """Coefficients of A D^2 f + B D f + lam f = 0."""

    A: float
    B: float
    lam: float

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ParameterError("A and B must be non-negative.")
        if self.A == 0 and self.B == 0:
            raise ParameterError("A and B must not both be zero.")
        if self.lam < 0:
            raise ParameterError("lam must be non-negative.")

    @property
    def a(self):
        return self.B / self.A

    @property
    def b(self):
        return self.lam / self.A


@dataclass(frozen=True)
class RootsAndWeights:
    a_star: complex
    b_star: complex
    K1: complex
    K2: complex


def power_rule(beta, ord):
    """D^(alpha,gamma) t^beta = coeff * t^exponent."""
    if beta < 0:
        raise ParameterError("power_rule needs beta >= 0.")
    if beta == 0:
        return 0.0, 0.0
    coeff = special.gamma(beta + 1) * special.rgamma(beta - ord.alpha + 1)
    return float(coeff), beta - ord.alpha - ord.gamma


def log_bracket_factorials(n, ord):
    """log [k!] for k = 0, ..., n."""
    k = np.arange(1, n + 1) * ord.beta
    steps = special.gammaln(k + 1) - special.gammaln(k - ord.alpha + 1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def bracket_factorial(n, ord):
    """[n!] = prod_{k=1}^{n} Gamma(beta k + 1) / Gamma(beta k - alpha + 1)."""
    if n < 0:
        raise ParameterError("n must be non-negative.")
    return float(np.exp(log_bracket_factorials(n, ord)[n]))


def _l1_weights(n, alpha):
    if alpha == 1:
        w = np.zeros(n)
        w[0] = 1.0
        return w
    k = np.arange(n, dtype=float)
    return ((k + 1) ** (1 - alpha) - k ** (1 - alpha)) / special.gamma(2 - alpha)


def _l1(samples, ord, h, origin):
    n = samples.shape[0]
    df = np.diff(samples, axis=0)
    w = _l1_weights(n - 1, ord.alpha)
    out = np.empty_like(samples, dtype=float)
    conv = np.apply_along_axis(lambda col: np.convolve(w, col)[: n - 1], 0, df)
    t = np.arange(1, n) * h
    scale = h ** (-ord.alpha) * t ** (-ord.gamma)
    out[1:] = conv * scale.reshape((-1,) + (1,) * (samples.ndim - 1))
    out[0] = 2 * out[1] - out[2] if origin is None else origin
    return out


def apply_stretched_caputo(samples, ord, h, axis=0, origin=None, tol=None):
    """L1 discretization of D^(alpha,gamma) on the uniform grid t_j = j h.

    Parameters
    ----------
    samples : array_like
        Function values at t_0 = 0, t_1 = h, ... along ``axis``.
    ord : StretchedOrder
        The operator order.
    h : float
        Grid step.
    axis : int
        Time axis of ``samples``.
    origin : float or array_like, optional
        Value assigned at t = 0; linear extrapolation from t_1, t_2 if None.
    tol : float, optional
        If given, the result is compared with the same scheme on the grid of
        step 2h and a GridWarning is issued when they differ by more than tol.

    Returns
    -------
    ndarray
        D^(alpha,gamma) f at the grid nodes.
    """
    samples = np.moveaxis(np.asarray(samples, dtype=float), axis, 0)
    if samples.shape[0] < 3:
        raise ParameterError("apply_stretched_caputo needs at least 3 grid nodes.")
    if not h > 0:
        raise ParameterError("Grid step h must be positive.")
    out = _l1(samples, ord, h, origin)
    if tol is not None and samples.shape[0] >= 5:
        coarse = _l1(samples[::2], ord, 2 * h, origin)
        estimate = np.max(np.abs(out[2::2][: coarse.shape[0] - 1] - coarse[1:]))
        if estimate > tol:
            warnings.warn(
                "Grid step {:.3g} gives error {:.3g} above tol {:.3g}.".format(
                    h, estimate, tol
                ),
                GridWarning,
            )
    return np.moveaxis(out, 0, axis)


def first_order_solution(kappa, ord, t):
    """Solution of D^(alpha,gamma) f = -kappa f with f(0) = 1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be non-negative.")
    z = -kappa * t**ord.beta
    return np.real(ks_eval(z, ord.ks_params))


def fibonacci_U(n, a, b, method="sum"):
    """The bivariate Fibonacci polynomial U_n(-a, -b).

    U_0 = 0, U_1 = 1 and U_{n+1} = -a U_n - b U_{n-1}.  ``method`` selects the
    binomial sum, the closed form through the roots of x^2 + a x + b, or the
    recurrence itself.
    """
    if n < 0:
        raise ParameterError("n must be non-negative.")
    if n == 0:
        return 0.0
    if method == "sum":
        terms = [
            special.comb(n - 1 - j, j, exact=True) * (-a) ** (n - 1 - 2 * j) * (-b) ** j
            for j in range((n - 1) // 2 + 1)
        ]
        return math.fsum(terms)
    if method == "recurrence":
        prev, cur = 0.0, 1.0
        for _ in range(n - 1):
            prev, cur = cur, -a * cur - b * prev
        return cur
    if method == "closed":
        root = np.sqrt(complex((a / 2) ** 2 - b))
        a_star, b_star = -a / 2 + root, -a / 2 - root
        if root == 0:
            return float(np.real(n * a_star ** (n - 1)))
        return float(np.real((a_star**n - b_star**n) / (a_star - b_star)))
    raise ValueError("method must be 'sum', 'closed' or 'recurrence'.")


def telegraph_roots(c):
    """Roots a*, b* of x^2 + a x + b and weights K1, K2 with K1 + K2 = 1."""
    if c.A == 0:
        raise ParameterError(
            "telegraph_roots needs A > 0; with A = 0 the equation is first order."
        )
    a, b = c.a, c.b
    disc = (a / 2) ** 2 - b
    if abs(disc) <= 1e-14 * max(1.0, (a / 2) ** 2):
        raise DegenerateRootsError(
            "Double root a* = b* = {:.6g} for (A, B, lam) = ({}, {}, {}).".format(
                -a / 2, c.A, c.B, c.lam
            )
        )
    root = np.sqrt(complex(disc))
    a_star = -a / 2 + root
    b_star = -a / 2 - root
    K1 = (a_star - b) / (a_star * (a_star - b_star))
    K2 = (b - b_star) / (b_star * (a_star - b_star))
    return RootsAndWeights(
        a_star=complex(a_star), b_star=complex(b_star), K1=complex(K1), K2=complex(K2)
    )


def second_order_solution(c, ord, t):
    """Solution of A D^2 f + B D f + lam f = 0 with f_0 = 1, f_1 = 1/[1!]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be non-negative.")
    if c.A == 0:
        return first_order_solution(c.lam / c.B, ord, t)
    rw = telegraph_roots(c)
    tb = t**ord.beta
    p = ord.ks_params
    value = rw.K1 * ks_eval(rw.a_star * tb, p) + rw.K2 * ks_eval(rw.b_star * tb, p)
    residue = np.max(np.abs(np.imag(value)) / np.maximum(1.0, np.abs(value)))
    if residue > 1e-10:
        raise ConvergenceError(
            "Second-order solution has imaginary residue {:.3g}.".format(residue)
        )
    return np.real(value)


def telegraph_series(c, ord, t, tol=1e-14, max_terms=5000):
    """`second_order_solution` summed as sum_n S_n t^(beta n) / [n!].

    S_0 = 1 and S_n = U_n(-a,-b) - b U_{n-1}(-a,-b) for n >= 1.  Summation
    stops once two consecutive terms fall below ``tol`` relative to the partial
    sum and raises `ConvergenceError` if that takes more than ``max_terms``.
    """
    if c.A == 0:
        raise ParameterError("telegraph_series needs A > 0.")
    t = np.asarray(t, dtype=float)
    a, b = c.a, c.b
    with np.errstate(divide="ignore"):
        log_t = np.log(t)
    total = np.ones(t.shape)
    # U_{n-1}, U_n carried with a common log scale
    u_prev, u, scale = 0.0, 1.0, 0.0
    log_fact = 0.0
    quiet = 0
    for n in range(1, max_terms):
        log_fact += special.gammaln(ord.beta * n + 1) - special.gammaln(
            ord.beta * n - ord.alpha + 1
        )
        S = u - b * u_prev
        term = S * np.exp(scale + ord.beta * n * log_t - log_fact)
        total = total + term
        small = np.all(np.abs(term) <= tol * np.maximum(1.0, np.abs(total)))
        quiet = quiet + 1 if small else 0
        if quiet == 2:
            log.debug("telegraph series converged after %d terms", n + 1)
            return total if total.ndim else total[()]
        u_prev, u = u, -a * u - b * u_prev
        size = abs(u)
        if size > 1e100:
            u_prev, u, scale = u_prev / size, u / size, scale + math.log(size)
    raise ConvergenceError(
        "telegraph series did not reach tol = {:g} in {} terms.".format(tol, max_terms)
    )
