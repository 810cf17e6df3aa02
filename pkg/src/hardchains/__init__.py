"""Hard instances for finding stationary points with first-order methods.

Subpackages by role:

* :mod:`hardchains.upsilon` - the scalar non-convexity and its constants
* :mod:`hardchains.instances` - chain functions with exact oracles
* :mod:`hardchains.scaling` - planners that fit a chain to a smoothness class
* :mod:`hardchains.optimizers` - GD, AGD, prox-AGD and the run loop
* :mod:`hardchains.verifiers` - numeric certificates
* :mod:`hardchains.harness` - sweeps, suites and the command line
"""

from .instances import (
    ChainParams,
    ConvexChain,
    DistanceBoundedInstance,
    GeometricChain,
    GeometricChainParams,
    NonconvexChain,
    ScaledInstance,
    instance_from_dict,
)
from .optimizers import IterateTrace, gradient_descent, prox_agd, run_until_stationary
from .scaling import ProblemClassSpec, ScalingPlan, SmoothnessConstants, plan_for_family
from .upsilon import UpsilonParams, upsilon_deriv, upsilon_value
from .verifiers import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "ChainParams",
    "ConvexChain",
    "DistanceBoundedInstance",
    "GeometricChain",
    "GeometricChainParams",
    "NonconvexChain",
    "ScaledInstance",
    "instance_from_dict",
    "IterateTrace",
    "gradient_descent",
    "prox_agd",
    "run_until_stationary",
    "ProblemClassSpec",
    "ScalingPlan",
    "SmoothnessConstants",
    "plan_for_family",
    "UpsilonParams",
    "upsilon_deriv",
    "upsilon_value",
    "VerificationReport",
]
