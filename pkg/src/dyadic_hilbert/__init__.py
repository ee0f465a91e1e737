"""Dyadic directional Hilbert transform on finite dyadic grids."""

__version__ = "0.1.0"

from .dyadic import (  # noqa: E402
    Cell,
    DomainError,
    DyadicInterval,
    DyadicRectangle,
    dyadic_distance_1d,
    dyadic_distance_2d,
    value_distance,
)
from .haar import (  # noqa: E402
    GridFunction,
    HaarCoefficients,
    diagonal_partial_sums,
    forward_haar_2d,
    inverse_haar_2d,
    scale_pair_component,
)
from .field import (  # noqa: E402
    DirectionField,
    generate_field,
    level_set,
    round_from_samples,
    validate_field,
)
from .operator import (  # noqa: E402
    apply_hv,
    apply_hv_adjoint,
    apply_hv_naive,
    directional_maximal,
    interval_set,
    martingale_average,
    maximal_m1,
    square_function_y,
)
from .analysis import (  # noqa: E402
    NormEstimate,
    adversarial_selection_norm,
    lp_norm,
    opnorm_exact,
    opnorm_l2,
    opnorm_lp_lower,
    run_verifiers,
)
