"""wfisher: combine p-values from independent tests with arbitrary weights.

The combined statistic is V = -sum_i w_i ln p_i.  Under the shared null
hypothesis V is a weighted sum of unit exponential variables, and the
combined p-value is its survival probability at the observed value,
evaluated in closed form (distinct or identical weights) or through a
partial-fraction decomposition of the Laplace transform (any weights).

>>> from wfisher import combine_pvalues
>>> combine_pvalues([0.1, 0.1]).p_combined
0.05605170185988093
"""

from .closed_form import (
    DistinctWeights,
    pdf_distinct,
    pdf_identical,
    residue_sum,
    tail_distinct,
    tail_distinct_with_condition,
    tail_identical,
    upper_incomplete_integral,
)
from .core import (
    CombinedResult,
    CombineMethod,
    CombineOptions,
    Statistic,
    WeightedEvidence,
    combine,
    combine_pvalues,
    compute_statistic,
)
from .errors import (
    ClusterSpanError,
    ConditioningError,
    GridError,
    InvalidEvidenceError,
    MethodError,
    WFisherError,
    ZeroPValueError,
)
from .general_pfd import (
    PfdCoefficients,
    WeightGroup,
    WeightGroups,
    group_weights,
    left_tail,
    pfd_coefficients,
    right_tail,
    right_tail_with_condition,
)
from .numerics import ConditioningPolicy
from .oracle import McEstimate, conv_tail, mc_tail, truncation_bound

__version__ = "0.1.0"

__all__ = [
    "ClusterSpanError",
    "CombineMethod",
    "CombineOptions",
    "CombinedResult",
    "ConditioningError",
    "ConditioningPolicy",
    "DistinctWeights",
    "GridError",
    "InvalidEvidenceError",
    "McEstimate",
    "MethodError",
    "PfdCoefficients",
    "Statistic",
    "WFisherError",
    "WeightGroup",
    "WeightGroups",
    "WeightedEvidence",
    "ZeroPValueError",
    "combine",
    "combine_pvalues",
    "compute_statistic",
    "conv_tail",
    "group_weights",
    "left_tail",
    "mc_tail",
    "pdf_distinct",
    "pdf_identical",
    "pfd_coefficients",
    "residue_sum",
    "right_tail",
    "right_tail_with_condition",
    "tail_distinct",
    "tail_distinct_with_condition",
    "tail_identical",
    "truncation_bound",
    "upper_incomplete_integral",
    "__version__",
]
