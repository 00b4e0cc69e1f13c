"""Bodies of constant width: construction, completion and verification."""

__version__ = "0.1.0"

from .errors import (AdmissibilityError, ConfigurationError, ConstantWidthError, ConvergenceError,  # noqa: E402
                     DomainError, EvaluationError, PreconditionError, ResourceError)
from .geometry import Norm, PointCloud, diameter, hausdorff_distance, sample_sphere, support  # noqa: E402
from .dual import GridDomain, complete_to_maximal, is_r_maximal, r_dual  # noqa: E402
from .median import (ConstantWidthBody, builtin_seed, build_body, check_median_inequality, family,  # noqa: E402
                     r_star, r_star_refined)
from .planar import (BetaProfile, TrigBeta, barbier_perimeter, cantor_beta, curve_from_beta,  # noqa: E402
                     embed_arc, reuleaux_beta, smooth_beta_sequence)
from .verification import (VerificationReport, verify_constant_width, verify_convexity,  # noqa: E402
                           verify_family_continuity, verify_r_convexity)

__all__ = [
    "AdmissibilityError", "ConfigurationError", "ConstantWidthError", "ConvergenceError", "DomainError",
    "EvaluationError", "PreconditionError", "ResourceError",
    "Norm", "PointCloud", "diameter", "hausdorff_distance", "sample_sphere", "support",
    "GridDomain", "complete_to_maximal", "is_r_maximal", "r_dual",
    "ConstantWidthBody", "builtin_seed", "build_body", "check_median_inequality", "family", "r_star",
    "r_star_refined",
    "BetaProfile", "TrigBeta", "barbier_perimeter", "cantor_beta", "curve_from_beta", "embed_arc",
    "reuleaux_beta", "smooth_beta_sequence",
    "VerificationReport", "verify_constant_width", "verify_convexity", "verify_family_continuity",
    "verify_r_convexity",
]
