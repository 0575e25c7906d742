"""Linear hashing: exact and Monte Carlo maxload analysis of multiplicative hash families."""
from .errors import BudgetExceeded, DomainError, NoneFound, NotAUnit, NoSuccessor
from .families import FamilyConfig, HashParam, ItemSet, Kind, param_space, sample_param
from .maxload import (
    MaxloadDistribution,
    exact_expected_maxload,
    expected_collisions,
    maxload,
    mc_expected_maxload,
    pair_collision_prob,
)

__all__ = [
    "BudgetExceeded",
    "DomainError",
    "FamilyConfig",
    "HashParam",
    "ItemSet",
    "Kind",
    "MaxloadDistribution",
    "NoSuccessor",
    "NoneFound",
    "NotAUnit",
    "exact_expected_maxload",
    "expected_collisions",
    "maxload",
    "mc_expected_maxload",
    "pair_collision_prob",
    "param_space",
    "sample_param",
]
