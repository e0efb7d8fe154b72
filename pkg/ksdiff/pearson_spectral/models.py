"""Pearson diffusions with purely discrete spectrum: OU, CIR and Jacobi.

Each model supplies its generator coefficients, stationary law, eigenvalues and
orthonormal eigenpolynomials Q_n.  The polynomials are evaluated through the
three-term recurrence of their orthonormal Jacobi matrix in a standardized
variable u, which also gives Gauss rules by the Golub-Welsch method.
"""

import functools
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from ..exceptions import CoefficientOverflowError, DomainError, ParameterError

log = logging.getLogger(__name__)

# Largest polynomial degree evaluated by default
N_MAX = 200


@dataclass(frozen=True)
class PearsonModel:
    """Base class for the Pearson models; ``theta`` is the mean-reversion rate."""

    theta: float

    kind = ""
    state_space = (-np.inf, np.inf)

    def __post_init__(self):
        if not self.theta > 0:
            raise ParameterError("theta must be positive, got {}.".format(self.theta))

    def check_state(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.state_space
        if np.any((x < lo) | (x > hi)) or np.any(np.isnan(x)):
            raise DomainError(
                "{} state space is [{}, {}]; got values outside it.".format(
                    self.kind, lo, hi
                )
            )
        return x

    def eigenvalue(self, n):
        return self.theta * np.asarray(n, dtype=float)

    def recurrence(self, n):
        """Diagonal (n entries) and off-diagonal (n - 1) of the Jacobi matrix in u."""
        raise NotImplementedError

    def to_u(self, x):
        return x

    def from_u(self, u):
        return u

    du_dx = 1.0
    alternating_sign = False


@dataclass(frozen=True)
class OU(PearsonModel):
    """Ornstein-Uhlenbeck: dX = -theta (X - mu) dt + sqrt(2 theta sigma2) dW."""

    mu: float = 0.0
    sigma2: float = 1.0

    kind = "ou"

    def __post_init__(self):
        super().__post_init__()
        if not self.sigma2 > 0:
            raise ParameterError(
                "OU sigma2 must be positive, got {}.".format(self.sigma2)
            )

    @property
    def sigma(self):
        return np.sqrt(self.sigma2)

    @property
    def stationary(self):
        return stats.norm(loc=self.mu, scale=self.sigma)

    def drift(self, x):
        return -self.theta * (np.asarray(x) - self.mu)

    def diffusion(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.theta * self.sigma2)

    def recurrence(self, n):
        return np.zeros(n), np.sqrt(np.arange(1, n, dtype=float))

    def to_u(self, x):
        return (np.asarray(x) - self.mu) / self.sigma

    def from_u(self, u):
        return self.mu + self.sigma * np.asarray(u)

    @property
    def du_dx(self):
        return 1 / self.sigma


@dataclass(frozen=True)
class CIR(PearsonModel):
    """Cox-Ingersoll-Ross: dX = -theta (X - b/a) dt + sqrt(2 theta X / a) dW.

    The stationary law is gamma with shape b and rate a.
    """

    a: float = 1.0
    b: float = 1.0

    kind = "cir"
    state_space = (0.0, np.inf)
    alternating_sign = True

    def __post_init__(self):
        super().__post_init__()
        if not (self.a > 0 and self.b > 0):
            raise ParameterError(
                "CIR a and b must be positive, got {}, {}.".format(self.a, self.b)
            )

    @property
    def stationary(self):
        return stats.gamma(self.b, scale=1 / self.a)

    def drift(self, x):
        return -self.theta * (np.asarray(x) - self.b / self.a)

    def diffusion(self, x):
        return self.theta * np.asarray(x, dtype=float) / self.a

    def recurrence(self, n):
        k = np.arange(n, dtype=float)
        return 2 * k + self.b, np.sqrt(k[1:] * (k[1:] + self.b - 1))

    def to_u(self, x):
        return self.a * np.asarray(x)

    def from_u(self, u):
        return np.asarray(u) / self.a

    @property
    def du_dx(self):
        return self.a


@dataclass(frozen=True)
class Jacobi(PearsonModel):
    """Jacobi diffusion on (-1, 1) with stationary density ~ (1-x)^a (1+x)^b."""

    a: float = 0.0
    b: float = 0.0

    kind = "jacobi"
    state_space = (-1.0, 1.0)

    def __post_init__(self):
        super().__post_init__()
        if not (self.a > -1 and self.b > -1):
            raise ParameterError(
                "Jacobi a and b must exceed -1, got {}, {}.".format(self.a, self.b)
            )

    @property
    def stationary(self):
        return stats.beta(self.b + 1, self.a + 1, loc=-1, scale=2)

    def drift(self, x):
        s = self.a + self.b + 2
        return -self.theta * (np.asarray(x) - (self.b - self.a) / s)

    def diffusion(self, x):
        x = np.asarray(x, dtype=float)
        return self.theta * (1 - x**2) / (self.a + self.b + 2)

    def eigenvalue(self, n):
        n = np.asarray(n, dtype=float)
        return self.theta * n * (n + self.a + self.b + 1) / (self.a + self.b + 2)

    def recurrence(self, n):
        a, b = self.a, self.b
        k = np.arange(n, dtype=float)
        s = 2 * k + a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            diag = (b**2 - a**2) / (s * (s + 2))
            off = 4 * k * (k + a) * (k + b) * (k + a + b) / (s**2 * (s + 1) * (s - 1))
        diag[0] = (b - a) / (a + b + 2)
        if n > 1:
            off[1] = 4 * (1 + a) * (1 + b) / ((a + b + 2) ** 2 * (a + b + 3))
        return diag, np.sqrt(off[1:])


def stationary_density(model, x):
    """Stationary density m(x) of the model."""
    x = model.check_state(x)
    return model.stationary.pdf(x)


def eigenvalue(model, n):
    """Eigenvalue lambda_n of minus the generator."""
    if np.any(np.asarray(n) < 0):
        raise ParameterError("n must be non-negative.")
    return model.eigenvalue(n)


def orthonormal_polys(model, N, x, derivative=False):
    """Q_0(x), ..., Q_{N-1}(x) stacked along a new last axis.

    With ``derivative`` the x-derivatives are returned as a second array.
    """
    x = model.check_state(x)
    u = model.to_u(x)
    diag, off = model.recurrence(N + 1)
    Q = np.empty(x.shape + (N,))
    dQ = np.empty(x.shape + (N,)) if derivative else None
    Q[..., 0] = 1.0
    prev, cur = np.zeros_like(u), np.ones_like(u)
    dprev, dcur = np.zeros_like(u), np.zeros_like(u)
    if derivative:
        dQ[..., 0] = 0.0
    for n in range(N - 1):
        back = off[n - 1] if n > 0 else 0.0
        nxt = ((u - diag[n]) * cur - back * prev) / off[n]
        if derivative:
            dnxt = ((u - diag[n]) * dcur + cur - back * dprev) / off[n]
            dprev, dcur = dcur, dnxt
            dQ[..., n + 1] = dnxt
        prev, cur = cur, nxt
        Q[..., n + 1] = nxt
    if not np.all(np.isfinite(Q)):
        raise CoefficientOverflowError(
            "Orthonormal polynomials overflowed below degree {}.".format(N)
        )
    if model.alternating_sign:
        sign = (-1.0) ** np.arange(N)
        Q = Q * sign
        if derivative:
            dQ = dQ * sign
    if derivative:
        return Q, dQ * model.du_dx
    return Q


def orthonormal_poly(model, n, x):
    """Q_n(x), normalized so that the integral of Q_n^2 against m is 1."""
    if n < 0:
        raise ParameterError("n must be non-negative.")
    return orthonormal_polys(model, n + 1, x)[..., n]


@functools.lru_cache(maxsize=64)
def _gauss_rule(model, n_nodes):
    diag, off = model.recurrence(n_nodes)
    nodes, vectors = linalg.eigh_tridiagonal(diag, off)
    weights = vectors[0] ** 2
    x = model.from_u(nodes)
    lo, hi = model.state_space
    x = np.clip(x, lo, hi)
    x.setflags(write=False)
    weights.setflags(write=False)
    return x, weights


def gauss_rule(model, n_nodes):
    """Nodes and weights of the n_nodes-point Gauss rule for the stationary law.

    The weights sum to one; the rule integrates polynomials of degree up to
    2 n_nodes - 1 exactly against m(x) dx.
    """
    x, w = _gauss_rule(model, int(n_nodes))
    return x.copy(), w.copy()


def transition_density_ou_exact(model, x, t, y):
    """Closed-form OU transition density."""
    mean = model.mu + (np.asarray(y) - model.mu) * np.exp(-model.theta * t)
    var = model.sigma2 * (1 - np.exp(-2 * model.theta * t))
    return stats.norm.pdf(x, loc=mean, scale=np.sqrt(var))


def transition_density_cir_exact(model, x, t, y):
    """Closed-form CIR transition density, a scaled noncentral chi-square."""
    decay = np.exp(-model.theta * t)
    c = model.a / (1 - decay)
    nc = 2 * c * np.asarray(y) * decay
    return 2 * c * stats.ncx2.pdf(2 * c * np.asarray(x), 2 * model.b, nc)
