"""Monte Carlo for the random time change Z and the time-changed Pearson diffusions.

Z is the integral over s >= 0 of (1 - sigma_s)_+^gamma, with sigma an alpha-stable
subordinator, and E exp(-lam t^(alpha+gamma) Z) is the Kilbas-Saigo function
E_{alpha, 1+gamma/alpha, gamma/alpha}(-lam t^(alpha+gamma)).  Z can also be drawn
as an infinite product of independent beta variables.

Paths are simulated in fixed blocks of ``MCConfig.block_size``; block b draws from
the Philox stream keyed by (seed, b, stream), with stream 0 for Z and stream 1
for the diffusion, so results do not depend on the number of workers.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import ParameterError, ReflectionError, StepBudgetError
from .fracops import StretchedOrder
from .pearson_spectral.models import CIR, OU, Jacobi
from .pearson_spectral.series import (
    CLASSICAL,
    solve_backward_hyperbolic,
    solve_forward_hyperbolic,
)

log = logging.getLogger(__name__)

_CHUNK = 2048
_Z_STREAM, _X_STREAM = 0, 1
SUBORDINATOR = "subordinator-integral"
BETA_PRODUCT = "beta-product"


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo settings.

    Parameters
    ----------
    n_paths : int
        Number of independent draws.
    dt : float, optional
        Subordinator grid step; defaults to 1e-4 / Gamma(1 + alpha).
    seed : int
        Root seed of the Philox streams.
    n_beta_factors : int
        Beta factors kept in the product representation of Z.
    n_workers : int
        Worker processes used over blocks.
    block_size : int
        Paths per random stream.
    max_steps : int
        Step budget per subordinator path.
    jacobi_step : float
        Euler-Maruyama step for the Jacobi diffusion.
    """

    n_paths: int = 10_000
    dt: float = None
    seed: int = 0
    n_beta_factors: int = 200
    n_workers: int = 1
    block_size: int = 1024
    max_steps: int = 10**8
    jacobi_step: float = 1e-4

    def __post_init__(self):
        if self.n_paths < 1:
            raise ParameterError("n_paths must be at least 1.")
        if self.dt is not None and not self.dt > 0:
            raise ParameterError("dt must be positive.")
        if self.seed < 0:
            raise ParameterError("seed must be a non-negative integer.")
        if self.n_beta_factors < 1 or self.n_workers < 1 or self.block_size < 1:
            raise ParameterError(
                "n_beta_factors, n_workers and block_size must be positive."
            )

    def step(self, alpha):
        return 1e-4 / special.gamma(1 + alpha) if self.dt is None else self.dt


@dataclass(frozen=True, eq=False)
class TimeChangeSample:
    """Draws of Z with their provenance."""

    z: np.ndarray
    method: str
    alpha: float
    gamma: float

    @property
    def beta(self):
        return self.alpha + self.gamma

    def time_change(self, t):
        """Z_t = t^(alpha+gamma) Z."""
        return t**self.beta * self.z


@dataclass(frozen=True)
class EstimateWithError:
    mean: float
    stderr: float
    n: int

    def agrees_with(self, value, k=3.0):
        """Whether value lies within k standard errors of the mean."""
        return abs(self.mean - value) <= k * self.stderr


def _check_alpha(alpha, gamma):
    if not 0 < alpha < 1:
        raise ParameterError("alpha must satisfy 0 < alpha < 1, got {}.".format(alpha))
    if not gamma >= 0:
        raise ParameterError("gamma must be non-negative, got {}.".format(gamma))


def block_rng(seed, block, stream):
    """Generator for one block of paths and one stream."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block, stream)))
    )


def sample_stable_increment(alpha, dt, rng, size=None):
    """Positive alpha-stable increments over a step dt.

    Kanter's representation: with U uniform on (0, pi) and W standard
    exponential, dt^(1/alpha) (A(U) / W)^((1 - alpha) / alpha) has Laplace
    transform exp(-dt lam^alpha), where
    A(u) = sin(alpha u)^(alpha / (1 - alpha)) sin((1 - alpha) u)
           / sin(u)^(1 / (1 - alpha)).
    """
    if not 0 < alpha < 1:
        raise ParameterError("alpha must satisfy 0 < alpha < 1, got {}.".format(alpha))
    u = rng.uniform(0, np.pi, size)
    w = rng.standard_exponential(size)
    A = (
        np.sin(alpha * u) ** (alpha / (1 - alpha))
        * np.sin((1 - alpha) * u)
        / np.sin(u) ** (1 / (1 - alpha))
    )
    return dt ** (1 / alpha) * (A / w) ** ((1 - alpha) / alpha)


def _z_subordinator(alpha, gammas, dt, n, rng, max_steps):
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    sigma = np.zeros(n)
    z = np.zeros((gammas.size, n))
    alive = np.ones(n, dtype=bool)
    steps = 0
    while alive.any():
        if steps >= max_steps:
            raise StepBudgetError(
                "{} paths did not pass level 1 within {} steps of dt = {:.3g}.".format(
                    alive.sum(), max_steps, dt
                )
            )
        idx = np.flatnonzero(alive)
        chunk = min(_CHUNK, max_steps - steps)
        inc = sample_stable_increment(alpha, dt, rng, size=(idx.size, chunk))
        path = sigma[idx, None] + np.cumsum(inc, axis=1)
        left = np.concatenate([sigma[idx, None], path[:, :-1]], axis=1)
        below = left < 1
        gap = np.clip(1 - left, 0, None)
        for i, g in enumerate(gammas):
            z[i, idx] += dt * np.where(below, gap**g, 0.0).sum(axis=1)
        sigma[idx] = path[:, -1]
        alive[idx] = sigma[idx] < 1
        steps += chunk
    return z


def _beta_tail_correction(alpha, gamma, N):
    beta = alpha + gamma
    n = np.arange(N, 64 * N, dtype=float)
    p = 1 + n / beta
    q = (1 - alpha) / beta
    log_f = np.log(gamma + n + 1) - np.log(alpha + gamma + n)
    return np.sum(log_f + special.psi(p) - special.psi(p + q))


def _z_beta(alpha, gamma, N, n, rng):
    beta = alpha + gamma
    k = np.arange(N, dtype=float)
    p = 1 + k / beta
    q = (1 - alpha) / beta
    log_f = np.log(gamma + k + 1) - np.log(alpha + gamma + k)
    draws = rng.beta(p, q, size=(n, N))
    log_z = (
        special.gammaln(gamma + 1)
        - special.gammaln(alpha + gamma + 1)
        + log_f.sum()
        + np.log(draws).sum(axis=1)
        + _beta_tail_correction(alpha, gamma, N)
    )
    return np.exp(log_z)


def _z_draws(alpha, gamma, cfg, method, rng, n):
    if method == SUBORDINATOR:
        return _z_subordinator(alpha, gamma, cfg.step(alpha), n, rng, cfg.max_steps)[0]
    if method == BETA_PRODUCT:
        return _z_beta(alpha, gamma, cfg.n_beta_factors, n, rng)
    raise ParameterError("Unknown Z sampler {!r}.".format(method))


def _method_name(method):
    return {"subordinator": SUBORDINATOR, "beta": BETA_PRODUCT}.get(method, method)


def sample_Z(alpha, gamma, cfg=None, rng=None, size=None):
    """Draw Z by simulating the subordinator until it passes level 1.

    The integral is the left-endpoint sum of (1 - sigma)^gamma dt, which is
    exact after passage.  The random input consumed does not depend on gamma,
    so draws from equal generators are coupled monotonically in gamma.
    """
    _check_alpha(alpha, gamma)
    cfg = MCConfig() if cfg is None else cfg
    rng = block_rng(cfg.seed, 0, _Z_STREAM) if rng is None else rng
    z = _z_draws(alpha, gamma, cfg, SUBORDINATOR, rng, 1 if size is None else size)
    return TimeChangeSample(
        z=z[0] if size is None else z, method=SUBORDINATOR, alpha=alpha, gamma=gamma
    )


def sample_Z_beta_product(alpha, gamma, cfg=None, rng=None, size=None):
    """Draw Z from the truncated product of beta variables.

    Z = Gamma(gamma + 1) / Gamma(alpha + gamma + 1)
        * prod_n (gamma + n + 1) / (alpha + gamma + n) * B_n,
    B_n ~ Beta(1 + n / (alpha + gamma), (1 - alpha) / (alpha + gamma)); the
    factors beyond ``cfg.n_beta_factors`` are replaced by their mean log.
    """
    _check_alpha(alpha, gamma)
    cfg = MCConfig() if cfg is None else cfg
    rng = block_rng(cfg.seed, 0, _Z_STREAM) if rng is None else rng
    z = _z_draws(alpha, gamma, cfg, BETA_PRODUCT, rng, 1 if size is None else size)
    return TimeChangeSample(
        z=z[0] if size is None else z, method=BETA_PRODUCT, alpha=alpha, gamma=gamma
    )


def _blocks(cfg):
    starts = range(0, cfg.n_paths, cfg.block_size)
    return [
        (b, min(cfg.block_size, cfg.n_paths - start))
        for b, start in enumerate(starts)
    ]


def _run_blocks(worker, tasks, n_workers):
    if n_workers == 1:
        return list(map(worker, tasks))
    with ProcessPoolExecutor(max_workers=n_workers) as executor:
        return list(executor.map(worker, tasks))


def _z_block(task):
    alpha, gamma, cfg, method, block, n = task
    return _z_draws(alpha, gamma, cfg, method, block_rng(cfg.seed, block, _Z_STREAM), n)


def draw_Z(alpha, gamma, cfg=None, method="subordinator"):
    """cfg.n_paths draws of Z over the block streams of cfg.seed."""
    _check_alpha(alpha, gamma)
    cfg = MCConfig() if cfg is None else cfg
    method = _method_name(method)
    tasks = [(alpha, gamma, cfg, method, b, n) for b, n in _blocks(cfg)]
    log.debug("Drawing %d Z values by %s in %d blocks", cfg.n_paths, method, len(tasks))
    return np.concatenate(_run_blocks(_z_block, tasks, cfg.n_workers))


def _estimate(values):
    values = np.asarray(values, dtype=float)
    n = values.size
    stderr = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return EstimateWithError(mean=float(np.mean(values)), stderr=stderr, n=n)


def mc_laplace_transform(alpha, gamma, lam, t, cfg=None, method="subordinator"):
    """Monte Carlo estimate of E exp(-lam t^(alpha+gamma) Z)."""
    if lam < 0:
        raise ParameterError("lam must be non-negative.")
    cfg = MCConfig() if cfg is None else cfg
    if lam == 0:
        return EstimateWithError(mean=1.0, stderr=0.0, n=cfg.n_paths)
    z = draw_Z(alpha, gamma, cfg, method)
    return _estimate(np.exp(-lam * t ** (alpha + gamma) * z))


def _jacobi_paths(model, x0, tau, rng, step):
    x = np.full(tau.shape, float(x0))
    lam1 = float(model.eigenvalue(1))
    mixed = tau > np.log(1e12) / lam1
    if np.any(mixed):
        x[mixed] = model.stationary.rvs(size=mixed.sum(), random_state=rng)
    todo = ~mixed & (tau > 0)
    n_steps = np.where(todo, np.ceil(tau / step), 0).astype(int)
    delta = np.where(todo, tau / np.maximum(n_steps, 1), 0.0)
    for k in range(int(n_steps.max()) if n_steps.size else 0):
        active = n_steps > k
        xa, da = x[active], delta[active]
        noise = rng.standard_normal(xa.size)
        spread = np.sqrt(np.clip(2 * model.diffusion(xa) * da, 0, None))
        xa = xa + model.drift(xa) * da + spread * noise
        for _ in range(10):
            outside = np.abs(xa) > 1
            if not outside.any():
                break
            xa = np.where(xa > 1, 2 - xa, np.where(xa < -1, -2 - xa, xa))
        else:
            if np.any(np.abs(xa) > 1):
                raise ReflectionError(
                    "Jacobi path left [-1, 1] after repeated reflection."
                )
        x[active] = xa
    return x


def _pearson_transition(model, x0, tau, rng, cfg):
    """Exact (OU, CIR) or Euler-Maruyama (Jacobi) draws of X_tau given X_0 = x0."""
    still = tau == 0
    if isinstance(model, OU):
        decay = np.exp(-model.theta * tau)
        mean = model.mu + (x0 - model.mu) * decay
        sd = np.sqrt(model.sigma2 * (1 - decay**2))
        x = mean + sd * rng.standard_normal(tau.shape)
    elif isinstance(model, CIR):
        decay = np.exp(-model.theta * np.where(still, 1.0, tau))
        c = model.a / (1 - decay)
        x = rng.noncentral_chisquare(2 * model.b, 2 * c * x0 * decay) / (2 * c)
    elif isinstance(model, Jacobi):
        x = _jacobi_paths(model, x0, tau, rng, cfg.jacobi_step)
    else:
        raise ParameterError("Unsupported model {!r}.".format(model))
    return np.where(still, x0, x)


def _pearson_block(task):
    model, alpha, gamma, method, t, x0, cfg, block, n = task
    z = _z_draws(alpha, gamma, cfg, method, block_rng(cfg.seed, block, _Z_STREAM), n)
    tau = t ** (alpha + gamma) * z
    rng = block_rng(cfg.seed, block, _X_STREAM)
    return z, _pearson_transition(model, x0, tau, rng, cfg)


def sample_time_changed_pearson(
    model, ord, t, x0, cfg=None, method="subordinator", return_z=False
):
    """cfg.n_paths draws of X(t^(alpha+gamma) Z) started at x0, X independent of Z.

    With ``return_z`` the draws of Z behind each path are returned first.
    """
    x0 = float(model.check_state(x0))
    if t < 0:
        raise ParameterError("t must be non-negative.")
    cfg = MCConfig() if cfg is None else cfg
    _check_alpha(ord.alpha, ord.gamma)
    method = _method_name(method)
    tasks = [
        (model, ord.alpha, ord.gamma, method, t, x0, cfg, b, n) for b, n in _blocks(cfg)
    ]
    z, x = zip(*_run_blocks(_pearson_block, tasks, cfg.n_workers))
    x = np.concatenate(x)
    return (np.concatenate(z), x) if return_z else x


def hyperbolic_subordination_estimate(
    model, ord, A, B, coeffs, t, y, cfg=None, method="subordinator"
):
    """Monte Carlo mean of the classical hyperbolic solution at t^(alpha+gamma) Z.

    The classical solution uses the exponential temporal factors of the
    alpha = 1, gamma = 0 problem; its average over Z estimates the stretched
    hyperbolic solution at (t, y).
    """
    cfg = MCConfig() if cfg is None else cfg
    ord = StretchedOrder(ord.alpha, ord.gamma).check_solver()
    z = draw_Z(ord.alpha, ord.gamma, cfg, method)
    s = t**ord.beta * z
    if coeffs.kind == "backward":
        solve = solve_backward_hyperbolic
    else:
        solve = solve_forward_hyperbolic
    values = solve(model, CLASSICAL, A, B, coeffs, s, y, t_min=0.0)
    return _estimate(values)
