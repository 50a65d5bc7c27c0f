"""Sturm-Liouville problems on the two-interval time scale T = [0, a1] U [a2, l].

Forward solver (shooting across the gap), interior spectral data, inversion
of the potential from eigenvalues plus interior ratios, and checks.
"""
from .domain import (
    Grid,
    Potential,
    ProblemSpec,
    TimeScaleDomain,
    evaluate_potential,
    forward_jump,
    make_domain,
    spec_from_dict,
    zero_problem,
)
from .forward import (
    SearchOptions,
    SolutionTrace,
    SpectralData,
    asymptotic_char,
    asymptotic_eigen_guess,
    asymptotic_phi,
    characteristic,
    closed_form_char_zero_potential,
    eigenfunction,
    eigenvalues,
    extract_data,
    shoot,
)
from .inverse import FixedData, InverseConfig, ReconstructionReport, reconstruct, residual, uniqueness_gap
from .volterra import phi_via_integral_equation

__all__ = [
    "FixedData", "Grid", "InverseConfig", "Potential", "ProblemSpec", "ReconstructionReport",
    "SearchOptions", "SolutionTrace", "SpectralData", "TimeScaleDomain", "asymptotic_char",
    "asymptotic_eigen_guess", "asymptotic_phi", "characteristic",
    "closed_form_char_zero_potential", "eigenfunction", "eigenvalues", "evaluate_potential",
    "extract_data", "forward_jump", "make_domain", "phi_via_integral_equation", "reconstruct",
    "residual", "shoot", "spec_from_dict", "uniqueness_gap", "zero_problem",
]
