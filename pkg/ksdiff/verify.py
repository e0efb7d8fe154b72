"""Cross-checks between the analytic, numerical and Monte Carlo layers.

Also builds the reproduction tables.

Each suite returns a dict ``{"suite", "passed", "checks"}`` where every check is
``{"name", "passed", "value", "target", "tolerance"}``.
"""

import logging

import numpy as np
import pandas as pd
from scipy import special, stats
from scipy.integrate import trapezoid

from . import stochastic_sim as sim
from .double_gamma import DoubleGammaCfg, log_double_gamma, log_gamma
from .exceptions import ParameterError
from .fracops import StretchedOrder, apply_stretched_caputo, first_order_solution
from .kilbas_saigo import (
    KSParams,
    MBContourCfg,
    ks_asymptotic,
    ks_bounds,
    ks_eval,
    ks_mellin_barnes,
    ks_series,
    mellin_barnes_constant,
    series_peak_log10,
)
from .pearson_spectral import (
    CIR,
    OU,
    hyperbolic_envelope,
    hyperbolic_temporal_factor,
    orthonormal_poly,
    orthonormal_polys,
    project_initial,
    residual_check,
    solve_backward_hyperbolic,
    stationary_density,
    transition_density_classical,
    transition_density_hyperbolic,
    transition_density_ou_exact,
    transition_density_stretched,
)

log = logging.getLogger(__name__)

MB_CONSTANT = 3.93953

# log10 of the largest series term the representation check will sum
SERIES_REACH = 100.0

# Parameter triples (a, m, l) with l > m - 1/a
MB_TRIPLES = [
    (0.5, 1.0, 0.0),
    (0.5, 1.5, 0.5),
    (0.7, 1.0, 0.5),
    (0.3, 2.0, 1.5),
    (0.9, 1.2, 0.3),
]

MC_POINTS = [
    # alpha, gamma, lam, t
    (0.5, 0.25, 1.0, 1.0),
    (0.5, 0.0, 1.0, 1.0),
    (0.6, 0.0, 1.0, 1.0),
    (0.5, 0.25, 2.0, 1.0),
    (0.3, 0.2, 1.0, 0.5),
    (0.7, 0.1, 0.5, 2.0),
]

BETA_LAW_PAIRS = [
    (0.3, 0.0),
    (0.5, 0.0),
    (0.7, 0.0),
    (0.3, 0.25),
    (0.5, 0.25),
    (0.7, 0.15),
]


def mc_defaults(n_paths=100_000, dt=1e-3, seed=0, n_workers=1):
    return sim.MCConfig(n_paths=n_paths, dt=dt, seed=seed, n_workers=n_workers)


def _check(name, value, target, tolerance, passed=None):
    if passed is None:
        passed = abs(value - target) <= tolerance
    return {
        "name": name,
        "passed": bool(passed),
        "value": float(value),
        "target": float(target),
        "tolerance": float(tolerance),
    }


def _wrapped(d):
    """|d| with the imaginary part of a log difference reduced modulo 2 pi."""
    d = np.asarray(d, dtype=complex)
    return np.abs(d.real + 1j * np.angle(np.exp(1j * d.imag)))


def _suite_ks_bounds(mc):
    checks = []
    x = np.linspace(0, 50, 100)
    for a in (0.25, 0.5, 0.75):
        for m in (0.5, 1.0, 2.0):
            value = np.real(ks_eval(-x, KSParams(a, m, m - 1)))
            lower, upper = ks_bounds(x, a, m)
            violations = np.sum(value < lower - 1e-9) + np.sum(value > upper + 1e-9)
            checks.append(_check("bounds a={} m={}".format(a, m), violations, 0, 0))
    return checks


def _suite_mb_constant(mc):
    value = mellin_barnes_constant()
    return [_check("mellin-barnes constant", value, MB_CONSTANT, 1e-4)]


def _suite_ks_representations(mc):
    r = np.geomspace(1, 50, 10)
    theta = np.pi * np.array([-0.25, -0.125, 0, 0.125, 0.25])
    checks = []
    for triple in MB_TRIPLES:
        p = KSParams(*triple)
        reach = r[[series_peak_log10(p, ri) <= SERIES_REACH for ri in r]]
        z = np.multiply.outer(reach, np.exp(1j * theta)).ravel()
        series = ks_series(-z, p, tol=1e-14)
        barnes = ks_mellin_barnes(z, p, MBContourCfg(tol=1e-13))
        rel = np.max(np.abs(series - barnes) / np.abs(barnes))
        name = "series vs mellin-barnes {} up to |z|={:.3g}".format(triple, reach[-1])
        checks.append(_check(name, rel, 0, 1e-7))
    return checks


def _asymptotic_ratio(p, z):
    value = ks_mellin_barnes(z, p, MBContourCfg(tol=1e-14))
    _, order = ks_asymptotic(z, p)
    return value * z / order.leading_coeff, order


def _suite_ks_asymptotic(mc):
    r = np.geomspace(1e2, 1e5, 7)
    checks = []
    for triple in MB_TRIPLES[:2]:
        p = KSParams(*triple)
        for arg in (0.0, np.pi / 4, -np.pi / 4):
            ratio, order = _asymptotic_ratio(p, r * np.exp(1j * arg))
            slope = -np.polyfit(np.log(r), np.log(np.abs(ratio - 1)), 1)[0]
            target = order.delta - 1 - 0.1
            checks.append(
                _check(
                    "ratio decay {} arg={:.3f}".format(triple, arg),
                    slope,
                    target,
                    0,
                    passed=slope >= target,
                )
            )
    return checks


def _suite_double_gamma(mc):
    checks = []
    re, im = np.meshgrid(np.linspace(0.3, 4, 6), np.linspace(-3, 3, 5))
    z = (re + 1j * im).ravel()
    for tau in (0.5, 1.0, 4 / 3, 2.0):
        cfg = DoubleGammaCfg(tau=tau)
        G = log_double_gamma(z, cfg, method="product")
        one = log_double_gamma(z + 1, cfg, method="product") - G - log_gamma(z / tau)
        log_factor = (
            (tau - 1) / 2 * np.log(2 * np.pi) + (0.5 - z) * np.log(tau) + log_gamma(z)
        )
        shift = log_double_gamma(z + tau, cfg, method="product") - G - log_factor
        label = "tau={:.4g}".format(tau)
        checks.append(_check("relation I " + label, _wrapped(one).max(), 0, 1e-9))
        checks.append(_check("relation II " + label, _wrapped(shift).max(), 0, 1e-9))
        ring = 35 * np.exp(1j * np.linspace(-1.2, 1.2, 9))
        diff = log_double_gamma(ring, cfg, method="stirling") - log_double_gamma(
            ring, cfg, method="product"
        )
        phase = np.angle(np.exp(1j * diff.imag))
        rel = np.max(np.abs(np.expm1(diff.real + 1j * phase)))
        checks.append(_check("stirling vs product " + label, rel, 0, 1e-5))
    return checks


def _suite_eigenfunction(mc):
    checks = []
    for alpha, gamma in ((0.5, 0.0), (0.5, 0.25), (0.3, 0.5)):
        ord = StretchedOrder(alpha, gamma)
        errors = []
        for n in (100, 400, 1600):
            t = np.linspace(0, 2, n + 1)
            f = first_order_solution(1.0, ord, t)
            residual = apply_stretched_caputo(f, ord, 2 / n) + f
            common = slice(None, None, n // 100)
            keep = t[common] >= 0.1
            errors.append(np.max(np.abs(residual[common][keep])))
        rate = np.log(errors[-2] / errors[-1]) / np.log(4)
        target = min(2 - alpha, 1 + ord.beta) - 0.2
        checks.append(
            _check(
                "refinement rate alpha={} gamma={}".format(alpha, gamma),
                rate,
                target,
                0,
                passed=rate >= target,
            )
        )
    return checks


def _suite_spectral(mc):
    checks = []
    ou = OU(theta=1.0)
    cir = CIR(theta=1.0, a=1.0, b=2.0)
    x = np.linspace(-3, 3, 61)
    gap = np.max(
        np.abs(
            transition_density_classical(ou, x, 1.0, 0.5, N=60)
            - transition_density_ou_exact(ou, x, 1.0, 0.5)
        )
    )
    checks.append(_check("classical OU kernel", gap, 0, 1e-6))
    ord = StretchedOrder(0.5, 0.25)
    for model, grid, y in (
        (ou, np.linspace(-14, 14, 8001), 0.3),
        (cir, np.linspace(0, 60, 60001), 1.5),
    ):
        mass = trapezoid(transition_density_stretched(model, ord, grid, 1.0, y), grid)
        checks.append(_check("stretched {} mass".format(model.kind), mass, 1, 1e-6))
    # hyperbolic single mode under time refinement
    model = OU(theta=2.0)
    coeffs = project_initial(model, lambda z: orthonormal_poly(model, 1, z), N=2)
    xs = np.linspace(-2, 2, 5)
    origin = orthonormal_poly(model, 1, xs)
    for order, factor in ((StretchedOrder(1.0), 0.6), (ord, 1.0)):
        norms = []
        for n in (100, 200):
            t = np.linspace(0, 2, n + 1)
            u = solve_backward_hyperbolic(
                model, order, 1.0, 2.0, coeffs, t[:, None], xs[None, :], t_min=0.0
            )
            residual = residual_check(
                u, model, order, t, xs, A=1.0, B=2.0, origin=origin, t_min=0.1
            )
            norms.append(residual.sup)
        ratio = norms[1] / norms[0]
        checks.append(
            _check(
                "hyperbolic residual refinement beta={:g}".format(order.beta),
                ratio,
                0,
                factor,
                passed=ratio < factor,
            )
        )
    # reductions
    xr = np.linspace(-3, 3, 31)
    gap = np.max(
        np.abs(
            transition_density_hyperbolic(ou, ord, 0.0, 1.0, xr, 1.0, 0.2, N=40)
            - transition_density_stretched(ou, ord, xr, 1.0, 0.2, N=40)
        )
    )
    checks.append(_check("hyperbolic A=0 B=1 equals stretched", gap, 0, 1e-9))
    half = StretchedOrder(0.5, 0.0)
    lam = ou.eigenvalue(np.arange(40))
    modes = orthonormal_polys(ou, 40, xr) * orthonormal_polys(ou, 40, 0.2)
    closed = stationary_density(ou, xr) * np.sum(special.erfcx(lam) * modes, axis=-1)
    density = transition_density_stretched(ou, half, xr, 1.0, 0.2, N=40)
    gap = np.max(np.abs(density - closed))
    checks.append(_check("stretched gamma=0 equals Mittag-Leffler", gap, 0, 1e-8))
    # approach to the stationary law like t^-(alpha + gamma)
    for model, grid, y in ((ou, x, 0.5), (cir, np.linspace(0.05, 8, 60), 1.5)):
        times = np.array([10.0, 1e2, 1e3, 1e4])
        stationary = stationary_density(model, grid)
        scaled = []
        for t in times:
            density = transition_density_stretched(model, ord, grid, t, y)
            scaled.append(np.max(np.abs(density - stationary)) * t**ord.beta)
        spread = max(scaled) / min(scaled)
        checks.append(
            _check(
                "{} stationary approach".format(model.kind),
                spread,
                1,
                2,
                passed=spread <= 3,
            )
        )
    return checks


def _suite_mc_laplace(mc):
    checks = []
    for alpha, gamma, lam, t in MC_POINTS:
        z = -lam * t ** (alpha + gamma)
        target = float(np.real(ks_eval(z, KSParams.stretched(alpha, gamma))))
        est = sim.mc_laplace_transform(alpha, gamma, lam, t, mc)
        checks.append(
            _check(
                "laplace alpha={} gamma={} lam={} t={}".format(alpha, gamma, lam, t),
                est.mean,
                target,
                3 * est.stderr,
            )
        )
    return checks


def _suite_beta_law(mc):
    cfg = sim.MCConfig(
        n_paths=min(mc.n_paths, 10_000),
        dt=mc.dt,
        seed=mc.seed,
        n_workers=mc.n_workers,
    )
    checks = []
    for alpha, gamma in BETA_LAW_PAIRS:
        left = sim.draw_Z(alpha, gamma, cfg, "subordinator")
        right = sim.draw_Z(alpha, gamma, cfg, "beta")
        pvalue = stats.ks_2samp(left, right).pvalue
        checks.append(
            _check(
                "two-sample KS alpha={} gamma={}".format(alpha, gamma),
                pvalue,
                0.01,
                0,
                passed=pvalue > 0.01,
            )
        )
    return checks


def _suite_subordination(mc):
    model = OU(theta=2.0)
    ord = StretchedOrder(0.5, 0.25)
    coeffs = project_initial(model, lambda z: orthonormal_poly(model, 1, z), N=2)
    target = float(solve_backward_hyperbolic(model, ord, 1.0, 2.0, coeffs, 1.0, 0.5))
    est = sim.hyperbolic_subordination_estimate(
        model, ord, 1.0, 2.0, coeffs, 1.0, 0.5, mc
    )
    return [_check("hyperbolic subordination OU", est.mean, target, 3 * est.stderr)]


SUITES = {
    "ks-bounds": _suite_ks_bounds,
    "mb-constant": _suite_mb_constant,
    "ks-representations": _suite_ks_representations,
    "ks-asymptotic": _suite_ks_asymptotic,
    "double-gamma": _suite_double_gamma,
    "eigenfunction": _suite_eigenfunction,
    "spectral": _suite_spectral,
    "mc-laplace": _suite_mc_laplace,
    "beta-law": _suite_beta_law,
    "subordination": _suite_subordination,
}


def run_suite(name, mc=None):
    """Run one verification suite.

    Parameters
    ----------
    name : str
        One of ``SUITES``.
    mc : MCConfig, optional
        Monte Carlo settings for the simulation suites; `mc_defaults()` if None.

    Returns
    -------
    dict
        ``{"suite": name, "passed": bool, "checks": [...]}``.
    """
    if name not in SUITES:
        raise ParameterError(
            "Unknown suite {!r}; choose from {}.".format(name, ", ".join(SUITES))
        )
    mc = mc_defaults() if mc is None else mc
    checks = SUITES[name](mc)
    passed = all(c["passed"] for c in checks)
    log.debug("Suite %s: %d checks, passed=%s", name, len(checks), passed)
    return {"suite": name, "passed": passed, "checks": checks}


def bounds_table():
    rows = []
    x = np.array([0, 0.5, 1, 2, 5, 10, 20, 50], dtype=float)
    for a in (0.25, 0.5, 0.75):
        for m in (0.5, 1.0, 2.0):
            lower, upper = ks_bounds(x, a, m)
            value = np.real(ks_eval(-x, KSParams(a, m, m - 1)))
            rows.append(
                pd.DataFrame(
                    {
                        "a": a,
                        "m": m,
                        "x": x,
                        "lower": lower,
                        "value": value,
                        "upper": upper,
                    }
                )
            )
    return pd.concat(rows, ignore_index=True)


def asymptotic_ratio_table():
    rows = []
    r = 10.0 ** np.arange(1, 6)
    for a, m, l in MB_TRIPLES[:3]:
        p = KSParams(a, m, l)
        for arg in (0.0, np.pi / 4, -np.pi / 4):
            ratio, _ = _asymptotic_ratio(p, r * np.exp(1j * arg))
            rows.append(
                pd.DataFrame(
                    {
                        "a": a,
                        "m": m,
                        "l": l,
                        "abs_z": r,
                        "arg_z": arg,
                        "re_ratio": ratio.real,
                        "im_ratio": ratio.imag,
                    }
                )
            )
    return pd.concat(rows, ignore_index=True)


def hyperbolic_ratio_table(t=1.0):
    model = OU(theta=2.0)
    ord = StretchedOrder(0.5, 0.0)
    n = np.array([1, 2, 5, 10, 20, 50, 100])
    factor = np.array(
        [float(hyperbolic_temporal_factor(model, ord, 1.0, 2.0, k, t)) for k in n]
    )
    envelope = np.array(
        [float(hyperbolic_envelope(model, ord, 1.0, 2.0, k, t)) for k in n]
    )
    return pd.DataFrame(
        {"n": n, "T_n": factor, "envelope": envelope, "ratio": factor / envelope}
    )


TABLES = {
    "bounds": bounds_table,
    "asymptotic-ratio": asymptotic_ratio_table,
    "hyperbolic-ratio": hyperbolic_ratio_table,
}


def make_table(name):
    """One of the reproduction tables as a DataFrame."""
    if name not in TABLES:
        raise ParameterError(
            "Unknown table {!r}; choose from {}.".format(name, ", ".join(TABLES))
        )
    return TABLES[name]()
