"""Large deviations of empirical means of subexponential variables.

Scaled free energies, their Legendre transforms, a numerical check of
second-order essential smoothness, subexponential tilting and rare-event
estimators built on it.
"""

from .assumptions import AssumptionReport, CheckConfig, check, refined_condition
from .convex import (
    asymptotic_slope,
    inverse_lambda_prime,
    legendre,
    legendre_second,
    rate_function,
)
from .errors import (
    ConvergenceFailure,
    DomainError,
    GenericSamplerFailure,
    QuadratureFailure,
    UndefinedAtZero,
    UnsupportedTail,
)
from .estimators import (
    EstimatorResult,
    EventSpec,
    big_jump_diagnostics,
    esscher_is,
    ibp_identity_check,
    naive_mc,
    rate_sweep,
    shift_is,
    subexp_tchebychev_bound,
    symmetrized_tchebychev_bound,
)
from .free_energy import (
    exp_power_model,
    gauss_power_model,
    numeric_model,
    relative_variance,
    sym_gamma_power_model,
)
from .scaling import (
    PowerOf,
    ScalingExponent,
    StandardGaussian,
    SymmetrizedGamma,
    TwoSidedExponential,
    make_stream,
    phi,
    phi_inverse,
    power_transform,
    sample,
    tail,
)
from .tilting import TiltedLaw, log_weight, optimal_tilt, sample_tilted, tilted_law

__version__ = "0.1.0"
