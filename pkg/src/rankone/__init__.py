"""Exact certificates for rank-one transformations of infinite measure."""

from rankone.core import (
    Budget,
    BudgetExceeded,
    CapsMakeConstructionUnfaithful,
    NotDirectSum,
    NotStronglyArithmetic,
    PreconditionError,
    RankOneError,
    RankOneSpec,
    StageSpec,
    descendant_set,
    explicit_spec,
    is_direct_sum,
    sum_is_direct,
    sum_set,
)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "BudgetExceeded",
    "CapsMakeConstructionUnfaithful",
    "NotDirectSum",
    "NotStronglyArithmetic",
    "PreconditionError",
    "RankOneError",
    "RankOneSpec",
    "StageSpec",
    "descendant_set",
    "explicit_spec",
    "is_direct_sum",
    "sum_is_direct",
    "sum_set",
    "__version__",
]
