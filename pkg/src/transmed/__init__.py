"""Transported stochastic mediation effects.

Estimates stochastic direct and indirect effects of a binary treatment
in a target population, borrowing the outcome regression from source
populations, with an intermediate confounder between treatment and
mediators.  Provides a one-step estimator and a targeted
maximum-likelihood estimator built on the efficient influence function,
optional cross-fitting and survey weights, and an exact-oracle
simulation harness.
"""

from .core import (
    Dataset,
    DatasetError,
    DegenerateBounds,
    DimensionMismatch,
    EffectSpec,
    EmptyArm,
    MissingOutcome,
    MissingPi,
    NonBinaryCode,
    Observation,
    OutcomeScale,
    SchemaError,
    read_csv,
    scale_outcome,
    validate_dataset,
    write_csv,
)

__all__ = [
    "Dataset",
    "DatasetError",
    "DegenerateBounds",
    "DimensionMismatch",
    "EffectSpec",
    "EmptyArm",
    "MissingOutcome",
    "MissingPi",
    "NonBinaryCode",
    "Observation",
    "OutcomeScale",
    "SchemaError",
    "read_csv",
    "scale_outcome",
    "validate_dataset",
    "write_csv",
]

__version__ = "0.1.0"
