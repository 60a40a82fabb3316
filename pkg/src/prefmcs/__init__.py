"""Reasoning over preferential multi-context systems."""

from prefmcs.errors import (
    AlignmentError,
    CapacityError,
    CompatibilityError,
    DomainError,
    IllFormedKbError,
    ModelError,
    PmcsError,
    UnknownRuleError,
)
from prefmcs.logic import Literal, asp_acc, prop_acc
from prefmcs.mcs import (
    BodyRef,
    BridgeRule,
    Context,
    Limits,
    McsSystem,
    applicable_rules,
    enumerate_equilibria,
    is_consistent,
    is_equilibrium,
    make_state,
    modify,
)
from prefmcs.stratified import (
    PmcsSystem,
    analyze,
    degree_of_inconsistency,
    maximal_consistent_section,
    maximal_level,
    validate_compatibility,
)
from prefmcs.dsl import ParseFailure, load, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "CapacityError",
    "CompatibilityError",
    "DomainError",
    "IllFormedKbError",
    "ModelError",
    "PmcsError",
    "UnknownRuleError",
    "Literal",
    "asp_acc",
    "prop_acc",
    "BodyRef",
    "BridgeRule",
    "Context",
    "Limits",
    "McsSystem",
    "applicable_rules",
    "enumerate_equilibria",
    "is_consistent",
    "is_equilibrium",
    "make_state",
    "modify",
    "PmcsSystem",
    "analyze",
    "degree_of_inconsistency",
    "maximal_consistent_section",
    "maximal_level",
    "validate_compatibility",
    "ParseFailure",
    "load",
    "parse",
    "serialize",
]
