"""Coarse Ricci curvature of Markov chains on finite metric spaces.

Computes curvature via exact L1 optimal transport and verifies its
quantitative consequences: spectral gap, Bonnet-Myers diameter bounds,
variance and Gaussian concentration, log-Sobolev inequalities via the
lambda-range gradient, and exponential concentration.
"""

from .bounds import (
    average_l2_bonnet_myers,
    bonnet_myers,
    commutation_check,
    exponential_concentration,
    finite_time_variance,
    gaussian_concentration,
    log_sobolev_check,
    range_gradient,
    spectral_report,
    variance_bound,
)
from .chain import (
    Chain,
    LocalStats,
    averaging,
    build_chain,
    invariant_distribution,
    lipschitz_constant,
    local_stats,
    max_var_lipschitz,
    n_step,
    push_forward,
)
from .curvature import (
    CurvatureReport,
    contraction_check,
    kappa,
    kappa_decomposition,
    kappa_global,
)
from .errors import CoricciError
from .gallery import PresetSpec, discretize_rates, generate, superpose, tensorize
from .metric import FiniteMetricSpace, build_space, is_epsilon_geodesic
from .transport import BACKEND, CouplingPlan, Distribution, DualPotential, w1

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Chain",
    "CouplingPlan",
    "CoricciError",
    "CurvatureReport",
    "Distribution",
    "DualPotential",
    "FiniteMetricSpace",
    "LocalStats",
    "PresetSpec",
    "average_l2_bonnet_myers",
    "averaging",
    "bonnet_myers",
    "build_chain",
    "build_space",
    "commutation_check",
    "contraction_check",
    "discretize_rates",
    "exponential_concentration",
    "finite_time_variance",
    "gaussian_concentration",
    "generate",
    "invariant_distribution",
    "is_epsilon_geodesic",
    "kappa",
    "kappa_decomposition",
    "kappa_global",
    "lipschitz_constant",
    "local_stats",
    "log_sobolev_check",
    "max_var_lipschitz",
    "n_step",
    "push_forward",
    "range_gradient",
    "spectral_report",
    "superpose",
    "tensorize",
    "variance_bound",
    "w1",
]
