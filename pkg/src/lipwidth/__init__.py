"""Sobolev weights, adaptive widths and Hermite chaos approximation of
Lipschitz operators between Gaussian-measure spaces."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .spectrum import (  # noqa: F401
    Algebraic,
    AtLeast,
    DoubleExponential,
    Explicit,
    Exponential,
    L2Verdict,
    Spectrum,
    ValidationReport,
    effective_dimension,
    make_spectrum,
    spectrum_from_dict,
    validate_assumption,
    weighted_eigenvalue,
)
from .multiindex import MultiIndex  # noqa: F401
from .hermite import (  # noqa: F401
    CappedGramReport,
    QuadratureRule,
    capped_gram,
    capped_hermite_eval,
    gauss_hermite_rule,
    hermite_eval,
    hermite_tensor_eval,
)
from .index_sets import (  # noqa: F401
    RearrangementList,
    TDIndexSet,
    enumerate_rearrangement,
    s_epsilon_set,
    sobolev_weight,
    td_index_set,
    td_size_bounds,
)
from .widths import (  # noqa: F401
    BoundCurve,
    WidthCurve,
    adaptive_m_width,
    lower_bound_curve,
    sharp_exponential_lower,
    stesin_width,
    upper_bound_curve,
    verify_bounds,
    width_curve,
)
from .approximation import (  # noqa: F401
    ErrorEstimate,
    MonteCarlo,
    OperatorSpec,
    PCExpansion,
    TensorQuadrature,
    builtin_operator,
    estimate_coefficient,
    gaussian_sample,
    l2_error,
    optimal_s_term_error,
    project,
    sobolev_norm,
)
