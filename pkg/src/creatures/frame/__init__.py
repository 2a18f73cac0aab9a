"""Parameter cascade, toy frames, condition prefixes, and sequence coding."""

from .cascade import (CascadeRow, CascadeTable, FamilyPlan, Requirement,
                      ToyFrame, cascade_table, format_table)
from .conditions import (PER_INDEX, PER_SUBLEVEL, ConditionPrefix,
                         ConditionVerdict, InsufficientPrefix, LeqVerdict,
                         PossFactor, PossibilitySet, PreconditionError,
                         curlywedge, empty_condition, glue_condition,
                         half_condition, iota, leq_check, poss_count,
                         poss_set, prune_condition, strong_bigness_homogenize,
                         unhalve, validate_condition, wedge)
from .slalom import cut_points, decode, encode, value_at

__all__ = [
    "CascadeRow", "CascadeTable", "FamilyPlan", "Requirement", "ToyFrame",
    "cascade_table", "format_table",
    "PER_INDEX", "PER_SUBLEVEL", "ConditionPrefix", "ConditionVerdict",
    "InsufficientPrefix", "LeqVerdict", "PossFactor", "PossibilitySet",
    "PreconditionError", "curlywedge", "empty_condition", "glue_condition",
    "half_condition", "iota", "leq_check", "poss_count", "poss_set",
    "prune_condition", "strong_bigness_homogenize", "unhalve",
    "validate_condition", "wedge",
    "cut_points", "decode", "encode", "value_at",
]
