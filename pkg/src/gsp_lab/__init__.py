"""gsp-lab: centroid moments, scaling identities, and power-law detection.

The toolkit studies positive functions f on (0, inf) that vanish at 0
through the geometry of the region under their graph on [0, a]: its
centroid, scale-free moments, and the integral identities those satisfy.
Power laws are exactly the functions whose centroid ordinate stays
proportional to f at the centroid abscissa across every truncation scale,
and the detector module turns that rigidity into a numerical test.
"""

from .errors import (
    CsvFormatError,
    DegenerateFit,
    DegenerateWeight,
    DomainExceeded,
    GspLabError,
    NegativeVariance,
    NonPositiveExponent,
    NonPositiveInput,
    NonPositiveValue,
    ThetaOutOfRange,
    ToleranceNotReached,
)
from .functions import (
    Custom,
    ElasticityValue,
    FunctionSpec,
    PerturbedPowerLaw,
    PowerLaw,
    Tabulated,
    ValidationReport,
    elasticity,
    eval_derivative,
    evaluate,
    load_tabulated_csv,
    validate,
)
from .quadrature import MomentKind, QuadResult, integrate, integrate_moment
from .moments import (
    MomentBundle,
    Primitives,
    ShapeProfile,
    moment_bundle,
    primitives,
    shape_profile,
)
from .identities import (
    DerivativeQuartet,
    IdentityReport,
    abc_derivatives,
    fd_derivatives,
    identity_report,
    reduction_residuals,
    theta_derivative_integral_form,
    variance_functional,
    wm_residual,
)
from .sampler import MCEstimate, SamplerState, inverse_cdf, mc_estimates, sample
from .detector import (
    DetectionResult,
    ExponentEstimates,
    ScaleGrid,
    Verdict,
    classify,
    fit_lambda,
    gsp_residual_sweep,
    invert_lambda,
    lambda_of_p,
    recover_p,
)

__version__ = "0.1.0"
