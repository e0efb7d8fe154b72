"""Command-line interface.

    ksdiff <command> [options]

Commands write a table (CSV or JSON) to ``--output`` or standard output.  Every
output starts with a header recording the command line, seed, library version
and tolerances.  Exit codes: 0 success, 2 usage or parameter error, 3 numerical
failure, 4 verification failure.
"""

import argparse
import json
import logging
import os
import shlex
import sys
from importlib import resources

import jsonschema
import numpy as np
import pandas as pd

from . import stochastic_sim as sim
from . import verify
from .double_gamma import DoubleGammaCfg, log_double_gamma
from .exceptions import KsdiffError, ParameterError
from .fracops import (
    StretchedOrder,
    apply_stretched_caputo,
    first_order_solution,
    power_rule,
)
from .kilbas_saigo import KSEvalCfg, KSParams, ks_eval_table
from .meta import __version__
from .pearson_spectral import (
    CIR,
    OU,
    Jacobi,
    SpectralCoeffs,
    orthonormal_poly,
    project_initial,
    solve_backward_hyperbolic,
    solve_backward_stretched,
    solve_forward_hyperbolic,
    solve_forward_stretched,
    stationary_density,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

# Options that must be set by a flag or the config file
REQUIRED = {
    "ks-eval": ["a", "m", "l"],
    "dgamma": ["tau", "z"],
    "caputo": ["alpha"],
    "solve": ["model", "alpha", "t", "x"],
    "simulate": ["model", "alpha", "t", "x0"],
}


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError("not a complex number: {!r}".format(text))


def _common(parser, default_format="csv"):
    parser.add_argument("-o", "--output", default="-", help="output file, - for stdout")
    parser.add_argument("--format", choices=["csv", "json"], default=default_format)
    parser.add_argument("--config", help="file of key = value lines merged under flags")
    parser.add_argument(
        "--seed", type=int, help="random seed (else $KSDIFF_SEED, else 0)"
    )
    parser.add_argument("--tol", type=float, help="absolute tolerance")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def _model_flags(parser):
    parser.add_argument("--model", choices=["ou", "cir", "jacobi"])
    parser.add_argument("--theta", type=float, default=1.0, help="mean-reversion rate")
    parser.add_argument("--mu", type=float, default=0.0, help="OU mean")
    parser.add_argument(
        "--sigma2", type=float, default=1.0, help="OU stationary variance"
    )
    parser.add_argument("--shape-a", type=float, help="CIR rate a / Jacobi exponent a")
    parser.add_argument("--shape-b", type=float, help="CIR shape b / Jacobi exponent b")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--gamma", type=float, default=0.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ksdiff",
        description="Kilbas-Saigo functions and stretched Pearson diffusions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("ks-eval", help="evaluate E_{a,m,l}(z)")
    _common(p)
    p.add_argument("--a", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--x", type=float, nargs="+", help="real points")
    p.add_argument("--z", type=_complex, nargs="+", help="complex points, e.g. -3+2j")
    p.add_argument("--zmin", type=float)
    p.add_argument("--zmax", type=float)
    p.add_argument("--n", type=int, default=101, help="real grid size")

    p = sub.add_parser("dgamma", help="evaluate log G(z; tau)")
    _common(p)
    p.add_argument("--tau", type=float)
    p.add_argument("--z", type=_complex, nargs="+")
    p.add_argument("--method", choices=["auto", "product", "stirling"], default="auto")

    p = sub.add_parser("caputo", help="apply the discretized stretched Caputo operator")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--T", type=float, default=1.0, help="grid end")
    p.add_argument("--n", type=int, default=1001, help="grid nodes")
    p.add_argument(
        "--function",
        default="ks:1",
        help="const, power:BETA or ks:KAPPA (eigenfunction)",
    )

    p = sub.add_parser("solve", help="spectral solution of a Cauchy problem")
    _common(p)
    _model_flags(p)
    p.add_argument("--kind", choices=["stretched", "hyperbolic"], default="stretched")
    p.add_argument("--direction", choices=["backward", "forward"], default="backward")
    p.add_argument("--A", type=float, default=1.0, help="weight of D^2 (hyperbolic)")
    p.add_argument("--B", type=float, default=1.0, help="weight of D (hyperbolic)")
    p.add_argument("--N", type=int, default=100, help="number of modes")
    p.add_argument("--coeffs", type=float, nargs="+", help="coefficients a_0, a_1, ...")
    p.add_argument(
        "--initial", default="stationary", help="stationary, mode-K or identity"
    )
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--x", type=float, nargs="+", help="y for backward, x for forward")

    p = sub.add_parser("simulate", help="Monte Carlo paths of the time change")
    _common(p)
    _model_flags(p)
    p.add_argument("--t", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--dt", type=float, help="subordinator step")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--beta-factors", type=int, default=200)
    p.add_argument(
        "--sampler", choices=["subordinator", "beta"], default="subordinator"
    )

    p = sub.add_parser("verify", help="run verification suites")
    _common(p, default_format="json")
    p.add_argument("--suite", choices=["all"] + list(verify.SUITES), default="all")
    p.add_argument("--paths", type=int, default=100_000, help="Monte Carlo paths")
    p.add_argument("--dt", type=float, default=1e-3, help="subordinator step")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("tables", help="reproduction tables")
    _common(p)
    p.add_argument("--table", choices=list(verify.TABLES), default="bounds")
    return parser


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def read_config(path):
    """key = value lines; blank lines and # comments are skipped."""
    values = {}
    with open(path) as f:
        for number, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(
                    "{}:{}: expected key = value.".format(path, number)
                )
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def _convert(action, value):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        return value.lower() in ("1", "true", "yes", "on")
    convert = action.type or str
    if action.nargs in ("+", "*"):
        return [convert(v) for v in value.replace(",", " ").split()]
    value = convert(value)
    if action.choices is not None and value not in action.choices:
        raise ParameterError(
            "{} must be one of {}.".format(action.dest, list(action.choices))
        )
    return value


def parse_args(argv):
    """Parse argv with the config file, if any, merged under explicit flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    command = _subparsers(parser)[args.command]
    if args.config:
        config = read_config(args.config)
        actions = {a.dest: a for a in command._actions}
        unknown = sorted(set(config) - set(actions))
        if unknown:
            command.error("unknown config keys: {}".format(", ".join(unknown)))
        command.set_defaults(**{k: _convert(actions[k], v) for k, v in config.items()})
        args = parser.parse_args(argv)
    missing = [k for k in REQUIRED.get(args.command, []) if getattr(args, k) is None]
    if missing:
        flags = ", ".join("--" + k for k in missing)
        command.error("missing required options: {}".format(flags))
    if args.seed is None:
        args.seed = int(os.environ.get("KSDIFF_SEED", 0))
    return args


def _header(args, argv, **tolerances):
    return {
        "command": " ".join(["ksdiff"] + [shlex.quote(a) for a in argv]),
        "seed": int(args.seed),
        "version": __version__,
        "tolerances": {"tol": args.tol, **tolerances},
    }


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError("{!r} is not JSON serializable".format(obj))


def load_schema():
    text = resources.files("ksdiff").joinpath("schemas/output.schema.json").read_text()
    return json.loads(text)


def render(header, table=None, report=None, fmt="csv"):
    """Text of one output: a DataFrame ``table`` or a verification ``report``."""
    if fmt == "json":
        doc = {"header": header}
        if table is not None:
            doc["columns"] = [str(c) for c in table.columns]
            doc["rows"] = table.to_dict(orient="records")
        else:
            doc.update(report)
        doc = json.loads(json.dumps(doc, default=_json_default))
        jsonschema.validate(instance=doc, schema=load_schema())
        return json.dumps(doc, indent=2) + "\n"
    if table is None:
        table = pd.DataFrame(report["checks"])
    lines = ["# {}: {}".format(k, json.dumps(v)) for k, v in header.items()]
    return "\n".join(lines) + "\n" + table.to_csv(index=False, float_format="%.17g")


def _write(text, path):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as f:
            f.write(text)


def _model(args):
    if args.model == "ou":
        return OU(theta=args.theta, mu=args.mu, sigma2=args.sigma2)
    shape = {}
    if args.shape_a is not None:
        shape["a"] = args.shape_a
    if args.shape_b is not None:
        shape["b"] = args.shape_b
    if args.model == "cir":
        return CIR(theta=args.theta, **shape)
    return Jacobi(theta=args.theta, **shape)


def cmd_ks_eval(args, argv):
    p = KSParams(args.a, args.m, args.l)
    if args.z is not None:
        z = np.array(args.z, dtype=complex)
    elif args.x is not None:
        z = np.array(args.x, dtype=complex)
    elif args.zmin is not None and args.zmax is not None:
        z = np.linspace(args.zmin, args.zmax, args.n).astype(complex)
    else:
        raise ParameterError("Give points by --x, --z or --zmin/--zmax/--n.")
    cfg = KSEvalCfg() if args.tol is None else KSEvalCfg(tol=args.tol)
    table = ks_eval_table(z, p, cfg)
    return _header(args, argv, ks_tol=cfg.tol), table


def cmd_dgamma(args, argv):
    cfg = DoubleGammaCfg(tau=args.tau)
    if args.tol is not None:
        cfg = DoubleGammaCfg(tau=args.tau, tol=args.tol)
    z = np.array(args.z, dtype=complex)
    value = np.atleast_1d(log_double_gamma(z, cfg, method=args.method))
    table = pd.DataFrame(
        {"re_z": z.real, "im_z": z.imag, "re_logG": value.real, "im_logG": value.imag}
    )
    return _header(args, argv, dgamma_tol=cfg.tol), table


def cmd_caputo(args, argv):
    ord = StretchedOrder(args.alpha, args.gamma)
    t = np.linspace(0, args.T, args.n)
    h = t[1] - t[0]
    name, _, value = args.function.partition(":")
    if name == "const":
        f, exact = np.ones_like(t), np.zeros_like(t)
    elif name == "power":
        coeff, exponent = power_rule(float(value), ord)
        f = t ** float(value)
        with np.errstate(divide="ignore"):
            exact = coeff * t**exponent if coeff else np.zeros_like(t)
    elif name == "ks":
        kappa = float(value or 1)
        f = first_order_solution(kappa, ord, t)
        exact = -kappa * f
    else:
        raise ParameterError("--function must be const, power:BETA or ks:KAPPA.")
    derivative = apply_stretched_caputo(f, ord, h, tol=args.tol)
    table = pd.DataFrame({"t": t, "f": f, "D_f": derivative, "exact": exact})
    return _header(args, argv, h=h), table


def _initial_coeffs(args, model):
    if args.coeffs is not None:
        return SpectralCoeffs.from_values(model, args.coeffs, kind=args.direction)
    forward = args.direction == "forward"
    if args.initial == "stationary":
        if forward:
            h = lambda x: stationary_density(model, x)
        else:
            h = np.ones_like
    elif args.initial.startswith("mode-"):
        k = int(args.initial[5:])
        if forward:
            h = lambda x: stationary_density(model, x) * orthonormal_poly(model, k, x)
        else:
            h = lambda x: orthonormal_poly(model, k, x)
    elif args.initial == "identity":
        if forward:
            raise ParameterError("The identity initial condition is backward only.")
        h = lambda x: x
    else:
        raise ParameterError("--initial must be stationary, mode-K or identity.")
    return project_initial(model, h, N=args.N, kind=args.direction)


def cmd_solve(args, argv):
    model = _model(args)
    ord = StretchedOrder(args.alpha, args.gamma).check_solver()
    coeffs = _initial_coeffs(args, model)
    t, x = np.meshgrid(np.array(args.t), np.array(args.x), indexing="ij")
    N = min(args.N, coeffs.N)
    backward = args.direction == "backward"
    if args.kind == "stretched":
        solve = solve_backward_stretched if backward else solve_forward_stretched
        u = solve(model, ord, coeffs, t, x, N=N)
    else:
        solve = solve_backward_hyperbolic if backward else solve_forward_hyperbolic
        u = solve(model, ord, args.A, args.B, coeffs, t, x, N=N)
    table = pd.DataFrame({"t": t.ravel(), "x": x.ravel(), "u": np.ravel(u)})
    header = _header(
        args, argv, N=N, reconstruction_error=coeffs.reconstruction_error
    )
    return header, table


def cmd_simulate(args, argv):
    model = _model(args)
    ord = StretchedOrder(args.alpha, args.gamma)
    cfg = sim.MCConfig(
        n_paths=args.paths,
        dt=args.dt,
        seed=args.seed,
        n_beta_factors=args.beta_factors,
        n_workers=args.workers,
    )
    z, x = sim.sample_time_changed_pearson(
        model, ord, args.t, args.x0, cfg, method=args.sampler, return_z=True
    )
    table = pd.DataFrame({"path": np.arange(z.size), "z": z, "x": x})
    header = _header(
        args, argv, dt=cfg.step(ord.alpha), n_paths=cfg.n_paths, sampler=args.sampler
    )
    return header, table


def cmd_verify(args, argv):
    mc = verify.mc_defaults(
        n_paths=args.paths, dt=args.dt, seed=args.seed, n_workers=args.workers
    )
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    checks = []
    for name in names:
        result = verify.run_suite(name, mc)
        checks.extend(dict(c, suite=name) for c in result["checks"])
    report = {
        "suite": args.suite,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }
    return _header(args, argv, dt=mc.dt, n_paths=mc.n_paths), report


def cmd_tables(args, argv):
    return _header(args, argv), verify.make_table(args.table)


COMMANDS = {
    "ks-eval": cmd_ks_eval,
    "dgamma": cmd_dgamma,
    "caputo": cmd_caputo,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "tables": cmd_tables,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return e.code
    except (ParameterError, OSError) as e:
        print("ksdiff: error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        logging.basicConfig(
            level=logging.DEBUG, format="%(name)s %(levelname)s %(message)s"
        )
    try:
        header, result = COMMANDS[args.command](args, argv)
    except ParameterError as e:
        print("ksdiff: error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE
    except (KsdiffError, ArithmeticError, OverflowError) as e:
        print("ksdiff: numerical failure: {}".format(e), file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "verify":
        _write(render(header, report=result, fmt=args.format), args.output)
        return EXIT_OK if result["passed"] else EXIT_VERIFY
    _write(render(header, table=result, fmt=args.format), args.output)
    log.debug("Wrote %d rows to %s", len(result), args.output)
    return EXIT_OK
