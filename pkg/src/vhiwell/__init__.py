"""Solvers and Tykhonov well-posedness diagnostics for finite-dimensional
variational-hemivariational inequalities."""

__version__ = "0.1.0"

from .clarke import (LipschitzFunctional, check_calculus_properties,
                     clarke_dd_oracle, estimate_alpha_j, zero_functional)
from .problem import (BiFunctional, ConstraintSet, OperatorA, VhiProblem,
                      box_set, gap, smallness_margin, whole_space,
                      zero_bifunctional)
from .space import SpaceDescriptor, inner, norm, project_interval_box
from .wellposed import (ApproxSequence, CandidateStream, DirectionSampler,
                        OmegaEstimate, SweepResult, certify_error, diam_sweep,
                        make_approx_sequence, omega_diameter, omega_member,
                        residual)

__all__ = [
    "__version__",
    "SpaceDescriptor", "inner", "norm", "project_interval_box",
    "LipschitzFunctional", "clarke_dd_oracle", "check_calculus_properties",
    "estimate_alpha_j", "zero_functional",
    "ConstraintSet", "OperatorA", "BiFunctional", "VhiProblem", "gap",
    "smallness_margin", "whole_space", "box_set", "zero_bifunctional",
    "residual", "omega_member", "omega_diameter", "diam_sweep",
    "make_approx_sequence", "certify_error", "OmegaEstimate",
    "ApproxSequence", "SweepResult", "DirectionSampler", "CandidateStream",
]
