"""Weighted kernels on model cyclic-quotient geometries.

Exact and certified-float evaluation of section-space kernels on two exactly
solvable models (the flat Gaussian quotient of C^n and the quotient football
of the projective line), the weight sequences that smooth their periodicity,
large-k expansion fitting, local averaged-kernel checks, and the weighted
section-count identity.  See the individual modules for the mathematics.
"""

__version__ = "0.1.0"

from .bergman import (
    INFINITY,
    HomogeneousWeight,
    KernelValue,
    TruncationError,
    bergman_value,
    bergman_value_closed_flat,
    bergman_value_series,
    weighted_bergman,
    weighted_bergman_gamma,
)
from .coeffs import (
    UNCONSTRAINED,
    CoefficientSequence,
    MomentConditionReport,
    SmoothnessSpec,
    canonical_sequence,
    root_order_at_unity,
    satisfies_condition,
)
from .expansion import (
    EXACT,
    ExpansionFit,
    PeriodProbe,
    PredictedCoefficients,
    fit_expansion,
    periodicity_probe,
    predicted_coefficients,
    remainder_slope,
)
from .localkernel import (
    DecayCheck,
    QuadratureError,
    averaged_kernel,
    averaged_kernel_double,
    decay_check,
    local_pairing,
    verify_reproducing,
)
from .models import (
    FlatCyclicModel,
    FootballModel,
    SectionBasis,
    geometric_degrees,
    h0,
    model_from_json_dict,
    model_to_json_dict,
    scalar_curvature,
    section_basis,
)
from .riemannroch import RRReport, predicted_a0_a1, rr_check, weighted_hilbert

__all__ = [
    "__version__",
    "INFINITY",
    "UNCONSTRAINED",
    "EXACT",
    "CoefficientSequence",
    "SmoothnessSpec",
    "MomentConditionReport",
    "canonical_sequence",
    "satisfies_condition",
    "root_order_at_unity",
    "FlatCyclicModel",
    "FootballModel",
    "SectionBasis",
    "section_basis",
    "h0",
    "scalar_curvature",
    "geometric_degrees",
    "model_to_json_dict",
    "model_from_json_dict",
    "KernelValue",
    "HomogeneousWeight",
    "TruncationError",
    "bergman_value",
    "bergman_value_closed_flat",
    "bergman_value_series",
    "weighted_bergman",
    "weighted_bergman_gamma",
    "DecayCheck",
    "QuadratureError",
    "averaged_kernel",
    "averaged_kernel_double",
    "local_pairing",
    "verify_reproducing",
    "decay_check",
    "ExpansionFit",
    "PredictedCoefficients",
    "PeriodProbe",
    "fit_expansion",
    "predicted_coefficients",
    "remainder_slope",
    "periodicity_probe",
    "RRReport",
    "weighted_hilbert",
    "predicted_a0_a1",
    "rr_check",
]
