"""Exact verification engine for the constraint algebras of the Hermitian one-matrix model."""

from .exactcore import (
    N,
    ONE,
    ZERO,
    GeneralizedPartition,
    IndexMultiset,
    NLaurent,
    Partition,
)
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "N", "ONE", "ZERO", "NLaurent", "Partition", "GeneralizedPartition", "IndexMultiset",
    "Report", "__version__",
]
