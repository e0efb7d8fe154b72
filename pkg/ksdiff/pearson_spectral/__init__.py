"""
ksdiff.pearson_spectral
=======================

Spectral solutions for classical, stretched and hyperbolic Pearson diffusions.

Code examples assume that the import convention has been followed:

  >>> import ksdiff.pearson_spectral as kps

The following subfunctions are then available.

Models
------

    OU
    CIR
    Jacobi
    stationary_density
    eigenvalue
    orthonormal_poly
    orthonormal_polys
    gauss_rule

Initial conditions
------------------

    project_initial
    SpectralCoeffs

Transition densities
--------------------

    transition_density_classical
    transition_density_stretched
    transition_density_hyperbolic
    transition_cdf_stretched
    transition_density_ou_exact
    transition_density_cir_exact

Cauchy problems
---------------

    solve_backward_stretched
    solve_forward_stretched
    solve_backward_hyperbolic
    solve_forward_hyperbolic
    hyperbolic_temporal_factor
    hyperbolic_envelope
    residual_check
"""

from .models import (
    CIR,
    OU,
    Jacobi,
    PearsonModel,
    eigenvalue,
    gauss_rule,
    orthonormal_poly,
    orthonormal_polys,
    stationary_density,
    transition_density_cir_exact,
    transition_density_ou_exact,
)
from .series import (
    SpectralCoeffs,
    hyperbolic_envelope,
    hyperbolic_temporal_factor,
    project_initial,
    solve_backward_hyperbolic,
    solve_backward_stretched,
    solve_forward_hyperbolic,
    solve_forward_stretched,
    transition_cdf_stretched,
    transition_density_classical,
    transition_density_hyperbolic,
    transition_density_stretched,
)
from .residual import ResidualNorms, residual_check
from . import models, residual, series
