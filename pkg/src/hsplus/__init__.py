"""Horseshoe and horseshoe+ shrinkage priors for sparse normal means.

Submodules
----------
priors           densities on the lambda, kappa and theta scales, bounds, expansions
kappa_posterior  single-observation posterior of the shrinkage weight by quadrature
mcmc             Gibbs sampler with compiled and numpy kernels
multitest        half-threshold rule, Bayes oracle, Benjamini-Hochberg, scoring
experiments      simulation harnesses
ingest           t-statistics to z-scores and effect-size reports
"""

from ._backend import active as active_backend
from .exceptions import (
    DegenerateOracle,
    DomainError,
    HsPlusError,
    PoleAtOrigin,
    ToleranceNotMet,
    UnsupportedConfiguration,
)
from .kappa_posterior import KappaPosterior
from .mcmc import McmcConfig, TauPolicy, run_gibbs
from .priors import Family, PriorSpec

__version__ = "0.1.0"

__all__ = [
    "DegenerateOracle",
    "DomainError",
    "Family",
    "HsPlusError",
    "KappaPosterior",
    "McmcConfig",
    "PoleAtOrigin",
    "PriorSpec",
    "TauPolicy",
    "ToleranceNotMet",
    "UnsupportedConfiguration",
    "active_backend",
    "run_gibbs",
    "__version__",
]
