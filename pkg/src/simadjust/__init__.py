"""Chance-adjusted categorical similarity indices.

Build contingency tables, evaluate similarity indices exactly, take
expectations under pluggable null models (closed form, enumeration, or
seeded Monte Carlo), chance-adjust with a choice of maximum, and
machine-check the distributional properties that make adjusted indices
well behaved.
"""

from .adjust import (
    AdjustedIndex,
    AdjustmentResult,
    MaxSpec,
    MEASURE_IDS,
    NAMED_MEASURES,
    adjust,
    adjusted_index,
    named_measure,
    resolve_max,
)
from .errors import (
    CapabilityError,
    ContractError,
    DomainError,
    InputError,
    ResourceError,
    ShapeError,
    SimadjustError,
)
from .indices import (
    INDEX_IDS,
    Index,
    LinearMember,
    get_index,
    get_member,
    linear_member,
)
from .nullmodels import (
    EstimateResult,
    FIXED_UNIFORM,
    IND1,
    IND2,
    MODEL_IDS,
    MonteCarloConfig,
    NullModel,
    PERM,
    expectation,
    get_model,
    probability,
    sample,
    support,
    support_with_probabilities,
    variance,
)
from .tables import (
    ContingencyTable,
    PairTable,
    TableSet,
    enumerate_domain,
    enumerate_fixed_margins,
    pair_table,
    read_labels_csv,
    read_table_csv,
    table_from_counts,
    table_from_labels,
    toy_table,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustedIndex",
    "AdjustmentResult",
    "CapabilityError",
    "ContingencyTable",
    "ContractError",
    "DomainError",
    "EstimateResult",
    "FIXED_UNIFORM",
    "IND1",
    "IND2",
    "INDEX_IDS",
    "Index",
    "InputError",
    "LinearMember",
    "MEASURE_IDS",
    "MODEL_IDS",
    "MaxSpec",
    "MonteCarloConfig",
    "NAMED_MEASURES",
    "NullModel",
    "PERM",
    "PairTable",
    "ResourceError",
    "ShapeError",
    "SimadjustError",
    "TableSet",
    "adjust",
    "adjusted_index",
    "enumerate_domain",
    "enumerate_fixed_margins",
    "expectation",
    "get_index",
    "get_member",
    "get_model",
    "linear_member",
    "named_measure",
    "pair_table",
    "probability",
    "read_labels_csv",
    "read_table_csv",
    "resolve_max",
    "sample",
    "support",
    "support_with_probabilities",
    "table_from_counts",
    "table_from_labels",
    "toy_table",
    "variance",
]
