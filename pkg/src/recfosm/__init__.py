"""Moment propagation through reciprocal substitution (recFOSM).

FOSM, SOFM and Monte Carlo estimators of the mean and standard deviation
of a model output, plus the reciprocal variant that expands the model in
z = 1/x instead of x.
"""

from .beam import BeamParams, tip_deflection, tip_deflection_model
from .distributions import Distribution, Family, MomentSet, from_mean_cov
from .errors import (
    ConfigurationError,
    DivisionDomainError,
    EstimatorUndefinedError,
    InputFileError,
    NumericError,
    ParameterDomainError,
    QuadratureError,
    RecfosmError,
    UnsupportedSupportError,
    ValidationError,
)
from .inputs import RandomInput
from .propagation import MomentEstimate, ObjectiveModel, estimate, fosm, monte_carlo, rec_fosm, sofm
from .reciprocal import (
    ReciprocalMoments,
    Source,
    empirical_reciprocal_moments,
    reciprocal_analytic,
    reciprocal_moments,
    reciprocal_moments_for,
    reciprocal_moments_quadrature,
    reciprocal_pdf,
)

__version__ = "0.1.0"
