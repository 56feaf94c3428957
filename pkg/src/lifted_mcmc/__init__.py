"""Directional MCMC samplers and their exact finite-state verifier.

Three single-step samplers over a shared directional-neighbourhood interface
(plain Metropolis-Hastings, its reversible directional variant, and the
non-reversible lifted sampler), exact dense-kernel construction and
certificates on finite instances, a 2-d Ising target with Barker flip
weights, the continuous gradient-skewed Barker proposal and guided walk on
the real line, batch-means variance estimation, and a config-driven
experiment CLI.
"""

from .balancing import BARKER, METROPOLIS, BalancingFunction, barker_phi, check_balancing_properties, metropolis_phi
from .kernels import DirectionalProposal, LiftedState, StepOutcome, lifted_step, mh_step, rev_step

__version__ = "0.1.0"

__all__ = [
    "BARKER",
    "METROPOLIS",
    "BalancingFunction",
    "barker_phi",
    "metropolis_phi",
    "check_balancing_properties",
    "DirectionalProposal",
    "LiftedState",
    "StepOutcome",
    "mh_step",
    "rev_step",
    "lifted_step",
    "__version__",
]
