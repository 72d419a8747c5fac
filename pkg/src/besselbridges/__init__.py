"""Bessel bridges at desk scale: closed-form laws, renormalized pairings,
integration-by-parts verification routes, exact bridge sampling, and the
regularized critical-dimension dynamics."""

from .backend import backend_name
from .laws import (Dimension, ExpFunctional, besq_bridge_marginal,
                   besq_transition, bessel_transition, bridge_expectation,
                   bridge_marginal, conditional_laplace, sigma_eval,
                   weighted_first_moment)
from .measures import BumpH, FiniteMeasure, PolyH
from .ode import solve, solve_phi
from .renorm import (ScalarTestFunction, exp_decay, gaussian, pair_mu,
                     poly_gaussian, renorm_gamma_integral, taylor_remainder)
from .sampler import (BridgePath, RngStream, additivity_check, mc_expectation,
                      sample_besq_bridge, sample_bessel_bridge,
                      sin_squared_grid, uniform_grid)

__all__ = [
    "backend_name",
    "Dimension", "ExpFunctional", "besq_bridge_marginal", "besq_transition",
    "bessel_transition", "bridge_expectation", "bridge_marginal",
    "conditional_laplace", "sigma_eval", "weighted_first_moment",
    "BumpH", "FiniteMeasure", "PolyH",
    "solve", "solve_phi",
    "ScalarTestFunction", "exp_decay", "gaussian", "pair_mu", "poly_gaussian",
    "renorm_gamma_integral", "taylor_remainder",
    "BridgePath", "RngStream", "additivity_check", "mc_expectation",
    "sample_besq_bridge", "sample_bessel_bridge", "sin_squared_grid",
    "uniform_grid",
]

__version__ = "0.1.0"
