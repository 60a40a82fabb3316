"""Preferential multi-context systems: strata, cuts, sections, stratified
equilibria, the degree of inconsistency and the maximal consistent section."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from prefmcs.errors import AlignmentError, CompatibilityError, ModelError
from prefmcs.mcs import (
    DEFAULT_LIMITS,
    BeliefState,
    Limits,
    McsSystem,
    enumerate_equilibria,
    is_applicable,
    is_consistent,
    is_equilibrium,
)

StratifiedState = Tuple[BeliefState, ...]


@dataclass(frozen=True)
class Violation:
    rule: str
    reference: str
    rule_stratum: int
    ref_stratum: int

    def __str__(self):
        return (
            f"rule {self.rule} (stratum {self.rule_stratum}) reads {self.reference} "
            f"from less preferred stratum {self.ref_stratum}"
        )


def _check_partition(base: McsSystem, strata: Sequence[Sequence[int]]):
    seen: List[int] = []
    for i, block in enumerate(strata, 1):
        if not block:
            raise ModelError(f"stratum {i} is empty")
        seen.extend(block)
    if len(seen) != len(set(seen)):
        raise ModelError("strata overlap")
    if set(seen) != set(base.indices):
        missing = set(base.indices) - set(seen)
        extra = set(seen) - set(base.indices)
        raise ModelError(
            f"strata do not partition the contexts (missing {sorted(missing)}, unknown {sorted(extra)})"
        )


def validate_compatibility(base: McsSystem, strata: Sequence[Sequence[int]]) -> List[Violation]:
    """Every body reference of a rule in stratum i must point into strata 1..i.

    Returns the violations found (an empty list means compatible).
    """
    _check_partition(base, strata)
    level = {idx: i for i, block in enumerate(strata, 1) for idx in block}
    out = []
    for r in base.rules:
        for ref in r.body:
            if level[ref.context] > level[r.owner]:
                out.append(Violation(r.id, str(ref), level[r.owner], level[ref.context]))
    return out


@dataclass(frozen=True)
class PmcsSystem:
    """An MCS with an ordered partition of its contexts; stratum 1 is most preferred."""

    base: McsSystem
    strata: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "strata", tuple(tuple(b) for b in self.strata))
        violations = validate_compatibility(self.base, self.strata)
        if violations:
            raise CompatibilityError(violations)

    @classmethod
    def single(cls, base: McsSystem) -> "PmcsSystem":
        return cls(base, (base.indices,))

    @property
    def m(self) -> int:
        return len(self.strata)

    def stratum_of(self, index: int) -> int:
        for i, block in enumerate(self.strata, 1):
            if index in block:
                return i
        raise KeyError(index)

    def _check_level(self, i: int):
        if not 1 <= i <= self.m:
            raise IndexError(f"stratum index {i} outside 1..{self.m}")

    def cut(self, i: int) -> McsSystem:
        """The i-cut: the MCS over the contexts of strata 1..i."""
        self._check_level(i)
        if i == self.m:
            return self.base
        return self.base.restrict(idx for block in self.strata[:i] for idx in block)

    def section(self, i: int) -> "PmcsSystem":
        self._check_level(i)
        if i == self.m:
            return self
        return PmcsSystem(self.cut(i), self.strata[:i])

    def section_rule_ids(self, i: int) -> frozenset:
        return frozenset(self.cut(i).rule_ids) if i >= 1 else frozenset()

    # -- belief state views --

    def stratify(self, S: BeliefState) -> StratifiedState:
        """Group a flat belief state of ``base`` by strata."""
        if len(S) != len(self.base):
            raise AlignmentError("belief state does not match the base system")
        pos = self.base.position
        return tuple(tuple(S[pos(idx)] for idx in block) for block in self.strata)

    def flatten(self, SS: StratifiedState, upto: Optional[int] = None) -> BeliefState:
        """Concatenate strata 1..upto into a belief state of ``cut(upto)``."""
        upto = self.m if upto is None else upto
        if len(SS) < upto or any(
            len(SS[i]) != len(self.strata[i]) for i in range(upto)
        ):
            raise AlignmentError("stratified belief state does not match the strata")
        by_index: Dict[int, object] = {}
        for block, sets in zip(self.strata[:upto], SS[:upto]):
            by_index.update(zip(block, sets))
        return tuple(by_index[idx] for idx in sorted(by_index))


def is_l_leq_equilibrium(P: PmcsSystem, SS: StratifiedState, l: int) -> bool:
    P._check_level(l)
    return is_equilibrium(P.cut(l), P.flatten(SS, l))


def is_l_lt_equilibrium(P: PmcsSystem, SS: StratifiedState, l: int) -> bool:
    if not is_l_leq_equilibrium(P, SS, l):
        return False
    return l == P.m or not is_l_leq_equilibrium(P, SS, l + 1)


def is_equilibrium_of(P: PmcsSystem, SS: StratifiedState) -> bool:
    return is_l_leq_equilibrium(P, SS, P.m)


@dataclass(frozen=True)
class Witness:
    state: StratifiedState
    suffix_unconstrained: bool


@dataclass(frozen=True)
class AnalysisReport:
    m: int
    level: int
    di: Fraction
    witness: Optional[Witness]

    @property
    def consistent(self) -> bool:
        return self.level == self.m


class MonotonicityError(AssertionError):
    """Cut consistency was found not to be monotone; signals a solver bug."""


def cut_consistency(P: PmcsSystem, limits: Limits = DEFAULT_LIMITS) -> List[bool]:
    """Consistency of every cut 1..m, checked for monotonicity."""
    flags = [is_consistent(P.cut(i), limits) for i in range(1, P.m + 1)]
    for i in range(1, len(flags)):
        if flags[i] and not flags[i - 1]:
            raise MonotonicityError(f"cut {i + 1} consistent but cut {i} is not")
    return flags


def _level_binary(P: PmcsSystem, limits: Limits) -> int:
    m = P.m
    if is_consistent(P.base, limits):
        return m
    if not is_consistent(P.cut(1), limits):
        return 0
    lo, hi = 1, m - 1  # cut(lo) consistent, answer in lo..hi
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if is_consistent(P.cut(mid), limits):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _level_linear(P: PmcsSystem, limits: Limits) -> int:
    return sum(cut_consistency(P, limits))


def _extend_witness(P: PmcsSystem, prefix: BeliefState, l: int) -> Witness:
    """Fill strata beyond ``l`` greedily, stratum by stratum."""
    base = P.base
    state = [frozenset()] * len(base)
    cut = P.cut(l)
    for idx, s in zip(cut.indices, prefix):
        state[base.position(idx)] = s
    S = tuple(state)
    for block in P.strata[l:]:
        for idx in block:
            ctx = base.context(idx)
            heads = {r.head for r in ctx.rules if is_applicable(r, base, S)}
            options = ctx.acc(heads)
            state[base.position(idx)] = options[0] if options else frozenset()
            S = tuple(state)
    return Witness(P.stratify(S), suffix_unconstrained=l < P.m)


def maximal_level(
    P: PmcsSystem, limits: Limits = DEFAULT_LIMITS, linear: bool = False
) -> Tuple[int, Optional[Witness]]:
    """The l of the maximal l<-equilibria (0 if the first cut is inconsistent)
    together with one canonical witness."""
    l = _level_linear(P, limits) if linear else _level_binary(P, limits)
    if l == 0:
        return 0, None
    prefix = enumerate_equilibria(P.cut(l), limit=1, limits=limits)[0]
    return l, _extend_witness(P, prefix, l)


def degree_of_inconsistency(P: PmcsSystem, limits: Limits = DEFAULT_LIMITS, linear: bool = False) -> Fraction:
    l, _ = maximal_level(P, limits, linear)
    return 1 - Fraction(l, P.m)


def analyze(P: PmcsSystem, limits: Limits = DEFAULT_LIMITS, linear: bool = False) -> AnalysisReport:
    l, witness = maximal_level(P, limits, linear)
    return AnalysisReport(P.m, l, 1 - Fraction(l, P.m), witness)


def maximal_consistent_section(
    P: PmcsSystem, limits: Limits = DEFAULT_LIMITS, linear: bool = False
) -> Optional[Tuple[int, PmcsSystem]]:
    l, _ = maximal_level(P, limits, linear)
    if l == 0:
        return None
    return l, P.section(l)


def k_mc(P: PmcsSystem, limits: Limits = DEFAULT_LIMITS) -> int:
    """Number of strata of the maximal consistent section (0 when there is none)."""
    return _level_binary(P, limits)
