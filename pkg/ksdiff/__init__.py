"""Kilbas-Saigo functions, stretched Caputo operators and Pearson diffusions."""

import textwrap
from . import (
    cli,
    double_gamma,
    exceptions,
    fracops,
    kilbas_saigo,
    meta,
    pearson_spectral,
    stochastic_sim,
    verify,
)
from .meta import __author__, __version__
from .double_gamma import DoubleGammaCfg, log_double_gamma
from .kilbas_saigo import KSParams, ks_eval, ks_bounds
from .fracops import StretchedOrder, TelegraphCoeffs, apply_stretched_caputo
from .pearson_spectral import OU, CIR, Jacobi, project_initial
from .stochastic_sim import MCConfig, mc_laplace_transform


def hello():
    greeting = textwrap.dedent(
        r"""
        k  Kilbas-Saigo functions,
        s  stretched Caputo operators
        d  and non-local Pearson diffusions
        i  
        f  Version {}
        f  
        """.format(
            __version__
        )
    )
    print(greeting)
