"""Spectral series for the transition densities and Cauchy problems."""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..exceptions import (
    KindMismatchError,
    ParameterError,
    QuadratureError,
    SmallTimeWarning,
    TruncationWarning,
)
from ..fracops import StretchedOrder, TelegraphCoeffs, telegraph_roots
from ..kilbas_saigo import ks_eval
from .models import N_MAX, gauss_rule, orthonormal_polys, stationary_density

log = logging.getLogger(__name__)

CLASSICAL = StretchedOrder(1.0, 0.0)
N_DEFAULT = 100
T_MIN = 1e-3


def _check_kind(kind):
    if kind not in ("backward", "forward"):
        raise ParameterError(
            "kind must be 'backward' or 'forward', got {!r}.".format(kind)
        )


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Coefficients a_n of an initial condition in the eigenbasis.

    ``kind`` is "backward" for a_n = int h Q_n m dx and "forward" for
    a_n = int h Q_n dx.
    """

    values: np.ndarray
    kind: str
    model: object
    reconstruction_error: float
    parseval: float

    @property
    def N(self):
        return self.values.size

    @classmethod
    def from_values(cls, model, values, kind="backward"):
        """Coefficients given directly, with no reconstruction to check."""
        _check_kind(kind)
        values = np.asarray(values, dtype=float).ravel()
        if not values.size:
            raise ParameterError("At least one coefficient is needed.")
        return cls(
            values=values,
            kind=kind,
            model=model,
            reconstruction_error=0.0,
            parseval=float(np.sum(values**2)),
        )


def _initial_values(h, x):
    if callable(h):
        return np.asarray(h(x), dtype=float) * np.ones_like(x)
    grid, samples = h
    order = np.argsort(grid)
    return np.interp(x, np.asarray(grid)[order], np.asarray(samples)[order])


def project_initial(model, h, N=N_DEFAULT, kind="backward", n_nodes=None, n_check=101):
    """Project an initial condition h onto Q_0, ..., Q_{N-1}.

    Parameters
    ----------
    model : PearsonModel
        The diffusion.
    h : callable or (grid, values)
        Initial condition, as a function or as samples for linear interpolation.
    N : int
        Number of coefficients.
    kind : str
        "backward" or "forward".
    n_nodes : int, optional
        Gauss nodes, default 2 N.
    n_check : int
        Size of the grid of stationary quantiles on which the reconstruction
        error is measured.

    Returns
    -------
    SpectralCoeffs
    """
    _check_kind(kind)
    x, w = gauss_rule(model, n_nodes or 2 * N)
    values = _initial_values(h, x)
    if kind == "forward":
        values = values / stationary_density(model, x)
    Q = orthonormal_polys(model, N, x)
    coeffs = Q.T @ (w * values)
    if not np.all(np.isfinite(coeffs)):
        raise QuadratureError("Projection of the initial condition is not finite.")
    check = model.stationary.ppf(np.linspace(0.01, 0.99, n_check))
    recon = orthonormal_polys(model, N, check) @ coeffs
    if kind == "forward":
        recon = recon * stationary_density(model, check)
    error = float(np.max(np.abs(recon - _initial_values(h, check))))
    log.debug(
        "Projected %s initial condition on %d modes, error %.3g", kind, N, error
    )
    return SpectralCoeffs(
        values=coeffs,
        kind=kind,
        model=model,
        reconstruction_error=error,
        parseval=float(np.sum(coeffs**2)),
    )


def _stretched_factors(model, ord, t, N):
    lam = model.eigenvalue(np.arange(N))
    if ord.is_classical:
        return np.exp(-np.multiply.outer(t, lam))
    z = -np.multiply.outer(t**ord.beta, lam)
    return np.real(ks_eval(z, ord.ks_params))


def _hyperbolic_factors(model, ord, A, B, t, N):
    lam = model.eigenvalue(np.arange(N))
    tb = t**ord.beta
    out = np.ones(t.shape + (N,))
    if N == 1:
        return out
    if A == 0:
        z = -np.multiply.outer(tb, lam[1:] / B)
        if ord.is_classical:
            out[..., 1:] = np.exp(z)
        else:
            out[..., 1:] = np.real(ks_eval(z, ord.ks_params))
        return out
    roots = [telegraph_roots(TelegraphCoeffs(A, B, lam_n)) for lam_n in lam[1:]]
    a_star = np.array([r.a_star for r in roots])
    b_star = np.array([r.b_star for r in roots])
    K1 = np.array([r.K1 for r in roots])
    K2 = np.array([r.K2 for r in roots])
    z = np.concatenate(
        [np.multiply.outer(tb, a_star), np.multiply.outer(tb, b_star)], axis=-1
    )
    E = np.exp(z) if ord.is_classical else ks_eval(z, ord.ks_params)
    value = K1 * E[..., : N - 1] + K2 * E[..., N - 1 :]
    out[..., 1:] = np.real(value)
    return out


def _envelope(model, ord, t, n, A=None, B=None):
    lam = float(model.eigenvalue(n))
    if A is not None:
        return abs(hyperbolic_envelope(model, ord, A, B, n, t))
    if ord.is_classical:
        return np.exp(-lam * t)
    return special.rgamma(1 - ord.alpha) / (lam * t**ord.beta)


def _truncation(model, ord, t, N, tol, A=None, B=None):
    """N if fixed, else grown from N_DEFAULT until the envelope is below tol."""
    if N is not None and tol is None:
        return N
    N = N_DEFAULT if N is None else N
    if tol is None:
        return N
    t_worst = float(np.min(t)) if np.size(t) else 1.0
    while _envelope(model, ord, t_worst, N, A, B) > tol and N < N_MAX:
        N = min(N + 50, N_MAX)
    bound = _envelope(model, ord, t_worst, N, A, B)
    if bound > tol:
        warnings.warn(
            "Series tail envelope {:.3g} at N = {} exceeds tol {:.3g}.".format(
                bound, N, tol
            ),
            TruncationWarning,
        )
    log.debug("Series truncated at N=%d with tail envelope %.3g", N, bound)
    return N


def _check_time(t, t_min, allow_zero=False):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or (not allow_zero and np.any(t == 0)):
        raise ParameterError(
            "t must be {}.".format("non-negative" if allow_zero else "positive")
        )
    small = (t > 0) & (t < t_min)
    if np.any(small):
        warnings.warn(
            "Series evaluated at t = {:.3g} below t_min = {:.3g}.".format(
                float(np.min(t[small])), t_min
            ),
            SmallTimeWarning,
        )
    return t


def _broadcast(*arrays):
    return np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in arrays))


def _factors_on(factor_fn, t, N):
    t_unique, inverse = np.unique(t, return_inverse=True)
    return factor_fn(t_unique, N)[inverse.reshape(t.shape)]


def _density(model, factor_fn, x, t, y, N):
    x, t, y = _broadcast(x, t, y)
    factors = _factors_on(factor_fn, t, N)
    Qx = orthonormal_polys(model, N, x)
    Qy = orthonormal_polys(model, N, y)
    return stationary_density(model, x) * np.sum(factors * Qx * Qy, axis=-1)


def transition_density_classical(model, x, t, y, N=None, tol=None):
    """Transition density m(x) sum_n exp(-lambda_n t) Q_n(x) Q_n(y)."""
    t = _check_time(t, 0.0)
    N = _truncation(model, CLASSICAL, t, N, tol)

    def factors(tt, n):
        return _stretched_factors(model, CLASSICAL, tt, n)

    return _density(model, factors, x, t, y, N)


def transition_density_stretched(model, ord, x, t, y, N=None, tol=None, t_min=T_MIN):
    """Transition density with temporal factors E(-lambda_n t^(alpha+gamma))."""
    ord.check_solver()
    t = _check_time(t, t_min)
    N = _truncation(model, ord, t, N, tol)

    def factors(tt, n):
        return _stretched_factors(model, ord, tt, n)

    return _density(model, factors, x, t, y, N)


def transition_cdf_stretched(model, ord, x, t, y, N=None, tol=None, t_min=T_MIN):
    """Distribution function P(X_t <= x | X_0 = y) of the stretched diffusion.

    Uses int_lo^x Q_n m = -D(x) m(x) Q_n'(x) / lambda_n for n >= 1.
    """
    ord.check_solver()
    t = _check_time(t, t_min)
    N = _truncation(model, ord, t, N, tol)
    x, t, y = _broadcast(x, t, y)

    def factors(tt, n):
        return _stretched_factors(model, ord, tt, n)

    weights = _factors_on(factors, t, N)
    _, dQx = orthonormal_polys(model, N, x, derivative=True)
    Qy = orthonormal_polys(model, N, y)
    lam = model.eigenvalue(np.arange(1, N))
    flux = model.diffusion(x) * stationary_density(model, x)
    integrals = -flux[..., None] * dQx[..., 1:] / lam
    tail = np.sum(weights[..., 1:] * Qy[..., 1:] * integrals, axis=-1)
    return model.stationary.cdf(x) + tail


def _solution(model, factor_fn, coeffs, t, points, N, kind):
    if coeffs.kind != kind:
        raise KindMismatchError(
            "A {} solver needs {} coefficients, got {}.".format(
                kind, kind, coeffs.kind
            )
        )
    N = coeffs.N if N is None else N
    if N > coeffs.N:
        raise ParameterError(
            "N = {} exceeds the {} available coefficients.".format(N, coeffs.N)
        )
    t, points = _broadcast(t, points)
    factors = _factors_on(factor_fn, t, N)
    Q = orthonormal_polys(model, N, points)
    value = np.sum(factors * coeffs.values[:N] * Q, axis=-1)
    if kind == "forward":
        value = value * stationary_density(model, points)
    return value


def solve_backward_stretched(model, ord, coeffs, t, y, N=None, t_min=T_MIN):
    """sum_n a_n E(-lambda_n t^(alpha+gamma)) Q_n(y) for backward coefficients."""
    ord.check_solver()
    t = _check_time(t, t_min, allow_zero=True)

    def factors(tt, n):
        return _stretched_factors(model, ord, tt, n)

    return _solution(model, factors, coeffs, t, y, N, "backward")


def solve_forward_stretched(model, ord, coeffs, t, x, N=None, t_min=T_MIN):
    """m(x) sum_n a_n E(-lambda_n t^(alpha+gamma)) Q_n(x) for forward coefficients."""
    ord.check_solver()
    t = _check_time(t, t_min, allow_zero=True)

    def factors(tt, n):
        return _stretched_factors(model, ord, tt, n)

    return _solution(model, factors, coeffs, t, x, N, "forward")


def hyperbolic_temporal_factor(model, ord, A, B, n, t):
    """Temporal factor T_n(t) of the hyperbolic problem A D^2 u + B D u = G u.

    T_0 = 1; for n >= 1 the factor solves A D^2 T + B D T + lambda_n T = 0
    with the unit initial conditions of `second_order_solution`.
    """
    ord.check_solver()
    t = _check_time(t, 0.0, allow_zero=True)
    return _hyperbolic_factors(model, ord, A, B, t, n + 1)[..., n]


def hyperbolic_envelope(model, ord, A, B, n, t):
    """Large-n behaviour of T_n(t).

    (A + B) / (Gamma(1 - alpha) lambda_n t^beta)
      + A Gamma(1 - beta)
        / (Gamma(1 - alpha) Gamma(1 - alpha - beta) lambda_n t^(2 beta))
    """
    lam = model.eigenvalue(n)
    t = np.asarray(t, dtype=float)
    beta = ord.beta
    first = (A + B) * special.rgamma(1 - ord.alpha) / (lam * t**beta)
    if beta >= 1:
        return first
    second = (
        A
        * special.gamma(1 - beta)
        * special.rgamma(1 - ord.alpha)
        * special.rgamma(1 - ord.alpha - beta)
        / (lam * t ** (2 * beta))
    )
    return first + second


def transition_density_hyperbolic(
    model, ord, A, B, x, t, y, N=None, tol=None, t_min=T_MIN
):
    """Transition density with hyperbolic temporal factors T_n(t)."""
    ord.check_solver()
    t = _check_time(t, t_min)
    N = _truncation(model, ord, t, N, tol, A, B)

    def factors(tt, n):
        return _hyperbolic_factors(model, ord, A, B, tt, n)

    return _density(model, factors, x, t, y, N)


def solve_backward_hyperbolic(model, ord, A, B, coeffs, t, y, N=None, t_min=T_MIN):
    """sum_n a_n T_n(t) Q_n(y) for backward coefficients."""
    ord.check_solver()
    t = _check_time(t, t_min, allow_zero=True)

    def factors(tt, n):
        return _hyperbolic_factors(model, ord, A, B, tt, n)

    return _solution(model, factors, coeffs, t, y, N, "backward")


def solve_forward_hyperbolic(model, ord, A, B, coeffs, t, x, N=None, t_min=T_MIN):
    """m(x) sum_n a_n T_n(t) Q_n(x) for forward coefficients."""
    ord.check_solver()
    t = _check_time(t, t_min, allow_zero=True)

    def factors(tt, n):
        return _hyperbolic_factors(model, ord, A, B, tt, n)

    return _solution(model, factors, coeffs, t, x, N, "forward")
