"""Finite-difference residuals of the stretched and hyperbolic Cauchy problems."""

import warnings
from dataclasses import dataclass

import numpy as np

from ..exceptions import GridWarning, ParameterError
from ..fracops import apply_stretched_caputo


@dataclass(frozen=True)
class ResidualNorms:
    sup: float
    l2: float


def _uniform_step(grid, name):
    grid = np.asarray(grid, dtype=float)
    steps = np.diff(grid)
    if grid.size < 3 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ParameterError(
            "{} grid must be uniform with at least 3 nodes.".format(name)
        )
    return grid, steps[0]


def residual_check(
    u,
    model,
    ord,
    t,
    x,
    A=None,
    B=None,
    direction="backward",
    origin=None,
    t_min=0.0,
    tol=None,
):
    """Residual of a sampled solution u[i, j] = u(t_i, x_j).

    With A None the equation is D u = G u, otherwise A D(D u) + B D u = G u,
    where D is the L1-discretized stretched Caputo operator in t and G the
    generator (``direction`` "backward") or its adjoint ("forward") by
    central differences in x.  ``origin`` is the value of D u at t = 0 used
    when composing D with itself.  The residual is taken on interior x nodes
    and time nodes with t >= max(t_min, t_1).
    """
    if direction not in ("backward", "forward"):
        raise ParameterError("direction must be 'backward' or 'forward'.")
    t, h = _uniform_step(t, "Time")
    if t[0] != 0:
        raise ParameterError("Time grid must start at t = 0.")
    x, dx = _uniform_step(x, "Space")
    u = np.asarray(u, dtype=float)
    if u.shape != (t.size, x.size):
        raise ParameterError("u must have shape (len(t), len(x)).")
    Du = apply_stretched_caputo(u, ord, h, axis=0, origin=origin)
    if A is None:
        lhs = Du
    else:
        lhs = A * apply_stretched_caputo(Du, ord, h, axis=0) + B * Du
    xi = x[1:-1]
    if direction == "backward":
        ux = (u[:, 2:] - u[:, :-2]) / (2 * dx)
        uxx = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]) / dx**2
        rhs = model.drift(xi) * ux + model.diffusion(xi) * uxx
    else:
        flux = model.drift(x) * u
        spread = model.diffusion(x) * u
        rhs = -(flux[:, 2:] - flux[:, :-2]) / (2 * dx) + (
            spread[:, 2:] - 2 * spread[:, 1:-1] + spread[:, :-2]
        ) / dx**2
    keep = t >= max(t_min, t[1])
    R = (lhs[:, 1:-1] - rhs)[keep]
    norms = ResidualNorms(
        sup=float(np.max(np.abs(R))), l2=float(np.sqrt(h * dx * np.sum(R**2)))
    )
    if tol is not None and norms.sup > tol:
        warnings.warn(
            "Residual {:.3g} exceeds tol {:.3g}.".format(norms.sup, tol),
            GridWarning,
        )
    return norms
