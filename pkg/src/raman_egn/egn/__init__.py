"""Closed-form EGN model of nonlinear interference under SRS, integrated by Monte Carlo."""

from .integrands import KINDS, TermLayout, integrand, prefactor, term_layout
from .link import (MU_KERNELS, LinkFunctionContext, QuadratureError, evaluate_link_function, geometric_factor,
                   link_function, link_function_identical, mu_span, phase_mismatch)
from .model import ChannelNli, NliModel, NliOptions, NliReport, nli_power, nli_report, with_seed
from .montecarlo import McResult, McSettings, mc_integrate, mc_integrate_box
from .triplets import BOUNDS, CLASSES, GROUPS, Triplet, classify_triplet, enumerate_triplets, in_triplet_set

__all__ = [
    "BOUNDS", "CLASSES", "GROUPS", "KINDS", "MU_KERNELS", "ChannelNli", "LinkFunctionContext", "McResult",
    "McSettings", "NliModel", "NliOptions", "NliReport", "QuadratureError", "TermLayout", "Triplet",
    "classify_triplet", "enumerate_triplets", "evaluate_link_function", "geometric_factor", "in_triplet_set",
    "integrand", "link_function", "link_function_identical", "mc_integrate", "mc_integrate_box", "mu_span",
    "nli_power", "nli_report", "phase_mismatch", "prefactor", "term_layout", "with_seed",
]
