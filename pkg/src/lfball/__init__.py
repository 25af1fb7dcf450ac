"""Linear fractional self-maps of the complex unit ball.

Kernel factorization and Gram positivity, composition-operator norm bounds
and spectral radii on weighted Hardy spaces, iteration and classification,
and the half-space normal form of non-elliptic maps.
"""

from .ball import BallPoint, BoundaryPoint, SiegelPoint, cayley, inverse_cayley, julia_quotient, sample_ball
from .bcd import (
    BCDMap,
    bcd_to_ball,
    ball_to_bcd,
    closed_form_iterate,
    counterexample_map,
    eval_bcd,
    restricted_defect_seq,
    validate_bcd,
    x_limit,
)
from .dynamics import (
    classify,
    defect_ratio_sequence,
    dilatation_coefficient,
    julia_check,
    orbit,
    restrictedness_report,
)
from .errors import LfballError
from .lfm import (
    LinearFractionalMap,
    compose,
    dbr_kernel,
    evaluate,
    find_contractive_scaling,
    fixed_points,
    kernel_factorization,
    validate,
)
from .schur_agler import (
    SpaceParams,
    gram_norm_lower_bound,
    gram_positivity,
    kbeta,
    norm_bounds,
    spectral_radius_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "BCDMap",
    "BallPoint",
    "BoundaryPoint",
    "LfballError",
    "LinearFractionalMap",
    "SiegelPoint",
    "SpaceParams",
    "ball_to_bcd",
    "bcd_to_ball",
    "cayley",
    "classify",
    "closed_form_iterate",
    "compose",
    "counterexample_map",
    "dbr_kernel",
    "defect_ratio_sequence",
    "dilatation_coefficient",
    "eval_bcd",
    "evaluate",
    "find_contractive_scaling",
    "fixed_points",
    "gram_norm_lower_bound",
    "gram_positivity",
    "inverse_cayley",
    "julia_check",
    "julia_quotient",
    "kbeta",
    "kernel_factorization",
    "norm_bounds",
    "orbit",
    "restricted_defect_seq",
    "restrictedness_report",
    "sample_ball",
    "spectral_radius_sequence",
    "validate",
    "validate_bcd",
    "x_limit",
]
