"""Inconsistency analysis: diagnoses and inconsistency explanations (pair and
set variants), their compatibility with the maximal consistent section, and
checks of the duality between the two.

Rule sets are handled internally as bitmasks over the canonical rule order of
the analysed system.  Every modified system ``M[R1 ∪ heads(R2)]`` is fully
described by which rules are present conditionally and which unconditionally,
so consistency answers are memoised on that pair of masks.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from prefmcs.errors import DomainError, UnknownRuleError
from prefmcs.mcs import (
    DEFAULT_LIMITS,
    Limits,
    McsSystem,
    flow_components,
    is_consistent,
)
from prefmcs.stratified import PmcsSystem, k_mc

RuleSet = FrozenSet[str]


@dataclass(frozen=True)
class Diagnosis:
    remove: RuleSet
    unconditional: RuleSet
    minimal: bool = field(default=False, compare=False)

    @property
    def pair(self) -> Tuple[RuleSet, RuleSet]:
        return (self.remove, self.unconditional)


@dataclass(frozen=True)
class Explanation:
    cause: RuleSet
    protected: RuleSet
    minimal: bool = field(default=False, compare=False)

    @property
    def pair(self) -> Tuple[RuleSet, RuleSet]:
        return (self.cause, self.protected)


@dataclass(frozen=True)
class SDiagnosis:
    rules: RuleSet
    minimal: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class SExplanation:
    rules: RuleSet
    minimal: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class DualityReport:
    identity: str
    diagnoses_union: RuleSet
    explanations_union: RuleSet

    @property
    def holds(self) -> bool:
        return self.diagnoses_union == self.explanations_union

    @property
    def difference(self) -> RuleSet:
        return self.diagnoses_union ^ self.explanations_union


def max_workers() -> int:
    """Worker processes for consistency tables; ``PMCS_MAX_WORKERS=0`` (default) is sequential."""
    try:
        return max(0, int(os.environ.get("PMCS_MAX_WORKERS", "0")))
    except ValueError:
        return 0


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _subsets_by_size(universe: int) -> Iterator[int]:
    """Submasks of ``universe`` in nondecreasing cardinality."""
    bits = [1 << i for i in range(universe.bit_length()) if universe >> i & 1]
    for k in range(len(bits) + 1):
        for combo in itertools.combinations(bits, k):
            yield sum(combo)


def _submasks(universe: int) -> Iterator[int]:
    sub = universe
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & universe


def _maximal(pairs: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """Pointwise-maximal elements of a set of mask pairs."""
    pairs = sorted(set(pairs), key=lambda p: -(_popcount(p[0]) + _popcount(p[1])))
    out: List[Tuple[int, int]] = []
    for a, b in pairs:
        if not any(a & ~x == 0 and b & ~y == 0 for x, y in out):
            out.append((a, b))
    return out


_WORKER_ORACLE = None


def _worker_init(M, limits):
    global _WORKER_ORACLE
    _WORKER_ORACLE = ConsistencyOracle(M, limits, workers=0)


def _worker_check(states):
    return [_WORKER_ORACLE._solve(c, u) for c, u in states]


class ConsistencyOracle:
    """Memoised consistency of modified systems of one base system."""

    def __init__(self, M: McsSystem, limits: Limits = DEFAULT_LIMITS, workers: Optional[int] = None):
        M.check_limits(limits)
        self.M = M
        self.limits = limits
        self.rules = M.rules
        self.ids = tuple(r.id for r in self.rules)
        self.bit = {rid: 1 << i for i, rid in enumerate(self.ids)}
        self.full = (1 << len(self.ids)) - 1
        # components of the full flow graph stay valid for every modification
        self.components = flow_components(M)
        self.workers = max_workers() if workers is None else workers
        self._cache: Dict[Tuple[int, int], bool] = {}

    def mask(self, ids: Iterable[str]) -> int:
        ids = set(ids)
        unknown = ids - set(self.bit)
        if unknown:
            raise UnknownRuleError(unknown)
        return sum(self.bit[i] for i in ids)

    def ids_of(self, mask: int) -> RuleSet:
        return frozenset(rid for rid, b in self.bit.items() if mask & b)

    def system(self, cond: int, uncond: int) -> McsSystem:
        rules = [
            r.unconditional() if uncond >> i & 1 else r
            for i, r in enumerate(self.rules)
            if (cond | uncond) >> i & 1
        ]
        return self.M.with_rules(rules)

    def _solve(self, cond: int, uncond: int) -> bool:
        return is_consistent(self.system(cond, uncond), self.limits, self.components)

    def consistent(self, cond: int, uncond: int = 0) -> bool:
        """Is the system with ``cond`` rules as given and ``uncond`` rules body-free consistent?"""
        key = (cond & ~uncond, uncond)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self._solve(*key)
        return hit

    def precompute(self, states: Sequence[Tuple[int, int]]) -> None:
        todo = sorted({(c & ~u, u) for c, u in states} - self._cache.keys())
        if not todo:
            return
        if self.workers and len(todo) > 64:
            chunk = max(1, len(todo) // (self.workers * 4))
            batches = [todo[i:i + chunk] for i in range(0, len(todo), chunk)]
            with ProcessPoolExecutor(
                self.workers, initializer=_worker_init, initargs=(self.M, self.limits)
            ) as pool:
                for batch, res in zip(batches, pool.map(_worker_check, batches)):
                    self._cache.update(zip(batch, res))
        else:
            for key in todo:
                self._cache[key] = self._solve(*key)

    def all_states(self) -> List[Tuple[int, int]]:
        """Every (conditional, unconditional) split of every rule subset."""
        out = []
        for present in _submasks(self.full):
            for uncond in _submasks(present):
                out.append((present & ~uncond, uncond))
        return out


class Analyzer:
    """Diagnoses and explanations of one MCS, sharing a consistency cache."""

    def __init__(self, M: McsSystem, limits: Limits = DEFAULT_LIMITS, workers: Optional[int] = None):
        self.M = M
        self.oracle = ConsistencyOracle(M, limits, workers)
        self._order = {rid: i for i, rid in enumerate(self.oracle.ids)}

    def _key(self, ids: Iterable[str]):
        return sorted(self._order[i] for i in ids)

    def _sort_pairs(self, items, a, b):
        return sorted(
            items,
            key=lambda x: (len(a(x)) + len(b(x)), self._key(a(x)), self._key(b(x))),
        )

    def _sort_sets(self, items, a):
        return sorted(items, key=lambda x: (len(a(x)), self._key(a(x))))

    # -- pair variants --

    def is_diagnosis(self, remove: Iterable[str], unconditional: Iterable[str] = ()) -> bool:
        o = self.oracle
        d1, d2 = o.mask(remove), o.mask(unconditional)
        return o.consistent(o.full & ~d1 & ~d2, d2)

    def all_diagnoses(self, within: Optional[Iterable[str]] = None) -> List[Diagnosis]:
        """Every diagnosis whose rules lie in ``within`` (default: all rules)."""
        o = self.oracle
        universe = o.full if within is None else o.mask(within)
        out = []
        for d1 in _submasks(universe):
            for d2 in _submasks(universe):
                if o.consistent(o.full & ~d1 & ~d2, d2):
                    out.append(Diagnosis(o.ids_of(d1), o.ids_of(d2)))
        return self._sort_pairs(out, lambda d: d.remove, lambda d: d.unconditional)

    def minimal_diagnoses(self) -> List[Diagnosis]:
        o = self.oracle
        n = len(o.ids)
        found: List[Tuple[int, int]] = []
        bits = [1 << i for i in range(n)]
        for total in range(2 * n + 1):
            for k1 in range(max(0, total - n), min(total, n) + 1):
                for c1 in itertools.combinations(bits, k1):
                    d1 = sum(c1)
                    for c2 in itertools.combinations(bits, total - k1):
                        d2 = sum(c2)
                        if any(f1 & ~d1 == 0 and f2 & ~d2 == 0 for f1, f2 in found):
                            continue
                        if o.consistent(o.full & ~d1 & ~d2, d2):
                            found.append((d1, d2))
        out = [Diagnosis(o.ids_of(a), o.ids_of(b), minimal=True) for a, b in found]
        return self._sort_pairs(out, lambda d: d.remove, lambda d: d.unconditional)

    def is_explanation(self, cause: Iterable[str], protected: Iterable[str] = ()) -> bool:
        """Direct check: every ``R1 ⊇ cause`` and ``R2 ⊆ br \\ protected`` gives an inconsistent system."""
        o = self.oracle
        e1, e2 = o.mask(cause), o.mask(protected)
        for extra in _submasks(o.full & ~e1):
            r1 = e1 | extra
            for r2 in _submasks(o.full & ~e2):
                if o.consistent(r1, r2):
                    return False
        return True

    def _pair_refuters(self) -> List[Tuple[int, int]]:
        # a consistent (cond, uncond) state defeats every (E1, E2) with
        # E1 ⊆ cond ∪ uncond and E2 ∩ uncond = ∅
        o = self.oracle
        states = o.all_states()
        o.precompute(states)
        return _maximal(
            (c | u, o.full & ~u) for c, u in states if o.consistent(c, u)
        )

    def minimal_explanations(self) -> List[Explanation]:
        o = self.oracle
        n = len(o.ids)
        refuters = self._pair_refuters()
        found: List[Tuple[int, int]] = []
        bits = [1 << i for i in range(n)]
        for total in range(2 * n + 1):
            for k1 in range(max(0, total - n), min(total, n) + 1):
                for c1 in itertools.combinations(bits, k1):
                    e1 = sum(c1)
                    for c2 in itertools.combinations(bits, total - k1):
                        e2 = sum(c2)
                        if any(f1 & ~e1 == 0 and f2 & ~e2 == 0 for f1, f2 in found):
                            continue
                        if not any(e1 & ~p == 0 and e2 & ~q == 0 for p, q in refuters):
                            found.append((e1, e2))
        out = [Explanation(o.ids_of(a), o.ids_of(b), minimal=True) for a, b in found]
        return self._sort_pairs(out, lambda e: e.cause, lambda e: e.protected)

    # -- set variants --

    def is_s_diagnosis(self, rules: Iterable[str]) -> bool:
        o = self.oracle
        return o.consistent(o.full & ~o.mask(rules))

    def s_diagnoses_min(self) -> List[SDiagnosis]:
        o = self.oracle
        found: List[int] = []
        for d in _subsets_by_size(o.full):
            if any(f & ~d == 0 for f in found):
                continue
            if o.consistent(o.full & ~d):
                found.append(d)
        return self._sort_sets(
            [SDiagnosis(o.ids_of(d), minimal=True) for d in found], lambda d: d.rules
        )

    def is_s_explanation(self, rules: Iterable[str]) -> bool:
        o = self.oracle
        e = o.mask(rules)
        return not any(o.consistent(e | extra) for extra in _submasks(o.full & ~e))

    def _minimal_upward(self, universe: int, base: int) -> List[int]:
        """⊆-minimal E ⊆ universe such that base ∪ R is inconsistent for all E ⊆ R ⊆ universe."""
        o = self.oracle
        subs = list(_submasks(universe))
        o.precompute([(base | r, 0) for r in subs])
        maximal_ok = [x for x, _ in _maximal((r, 0) for r in subs if o.consistent(base | r))]
        found: List[int] = []
        for e in _subsets_by_size(universe):
            if any(f & ~e == 0 for f in found):
                continue
            if not any(e & ~r == 0 for r in maximal_ok):
                found.append(e)
        return found

    def s_explanations_min(self) -> List[SExplanation]:
        o = self.oracle
        found = self._minimal_upward(o.full, 0)
        return self._sort_sets(
            [SExplanation(o.ids_of(e), minimal=True) for e in found], lambda e: e.rules
        )

    # -- duality --

    def duality(self) -> List[DualityReport]:
        def union(items, *getters):
            return frozenset().union(*(g(x) for x in items for g in getters))

        return [
            DualityReport(
                "pair",
                union(self.minimal_diagnoses(), lambda d: d.remove, lambda d: d.unconditional),
                union(self.minimal_explanations(), lambda e: e.cause, lambda e: e.protected),
            ),
            DualityReport(
                "set",
                union(self.s_diagnoses_min(), lambda d: d.rules),
                union(self.s_explanations_min(), lambda e: e.rules),
            ),
        ]


class StratifiedAnalyzer:
    """Section-compatible (c-) variants for an inconsistent PMCS."""

    def __init__(self, P: PmcsSystem, limits: Limits = DEFAULT_LIMITS, workers: Optional[int] = None):
        self.P = P
        self.analyzer = Analyzer(P.base, limits, workers)
        self.k_mc = k_mc(P, limits)
        if self.k_mc == P.m:
            raise DomainError("system is consistent; section-compatible analysis is undefined")
        if self.k_mc == 0:
            raise DomainError(
                "the first stratum is already inconsistent (no consistent section); "
                "analyse cut 1 as a plain multi-context system instead"
            )
        self.protected = P.section_rule_ids(self.k_mc)

    def compatible(self, ids: Iterable[str]) -> bool:
        return not (set(ids) & self.protected)

    def compatible_diagnoses(self, family: str = "minimal") -> List[Diagnosis]:
        """Diagnoses avoiding the maximal consistent section's rules, drawn from
        ``family``: ``all``, ``minimal`` or ``s-minimal``."""
        a = self.analyzer
        if family == "all":
            outside = set(a.oracle.ids) - self.protected
            return a.all_diagnoses(within=outside)
        if family == "minimal":
            return [d for d in a.minimal_diagnoses() if self.compatible(d.remove | d.unconditional)]
        if family == "s-minimal":
            return [
                Diagnosis(d.rules, frozenset(), minimal=True)
                for d in a.s_diagnoses_min()
                if self.compatible(d.rules)
            ]
        raise ValueError(f"unknown diagnosis family {family!r}")

    def c_diagnoses(self) -> List[SDiagnosis]:
        return [d for d in self.analyzer.s_diagnoses_min() if self.compatible(d.rules)]

    def c_explanations_min(self) -> List[SExplanation]:
        a = self.analyzer
        o = a.oracle
        base = o.mask(self.protected)
        found = a._minimal_upward(o.full & ~base, base)
        return a._sort_sets(
            [SExplanation(o.ids_of(e), minimal=True) for e in found], lambda e: e.rules
        )

    def is_c_explanation(self, rules: Iterable[str]) -> bool:
        o = self.analyzer.oracle
        e = o.mask(rules)
        base = o.mask(self.protected)
        if e & base:
            return False
        return not any(o.consistent(base | e | extra) for extra in _submasks(o.full & ~base & ~e))

    def duality(self) -> DualityReport:
        return DualityReport(
            "compatible",
            frozenset().union(*(d.rules for d in self.c_diagnoses())),
            frozenset().union(*(e.rules for e in self.c_explanations_min())),
        )


# -- functional surface ------------------------------------------------------------


def is_diagnosis(M: McsSystem, remove, unconditional=(), limits: Limits = DEFAULT_LIMITS) -> bool:
    return Analyzer(M, limits).is_diagnosis(remove, unconditional)


def minimal_diagnoses(M: McsSystem, limits: Limits = DEFAULT_LIMITS) -> List[Diagnosis]:
    return Analyzer(M, limits).minimal_diagnoses()


def is_explanation(M: McsSystem, cause, protected=(), limits: Limits = DEFAULT_LIMITS) -> bool:
    return Analyzer(M, limits).is_explanation(cause, protected)


def minimal_explanations(M: McsSystem, limits: Limits = DEFAULT_LIMITS) -> List[Explanation]:
    return Analyzer(M, limits).minimal_explanations()


def s_diagnoses_min(M: McsSystem, limits: Limits = DEFAULT_LIMITS) -> List[SDiagnosis]:
    return Analyzer(M, limits).s_diagnoses_min()


def s_explanations_min(M: McsSystem, limits: Limits = DEFAULT_LIMITS) -> List[SExplanation]:
    return Analyzer(M, limits).s_explanations_min()


def compatible_diagnoses(P: PmcsSystem, family: str = "minimal", limits: Limits = DEFAULT_LIMITS) -> List[Diagnosis]:
    return StratifiedAnalyzer(P, limits).compatible_diagnoses(family)


def c_diagnoses(P: PmcsSystem, limits: Limits = DEFAULT_LIMITS) -> List[SDiagnosis]:
    return StratifiedAnalyzer(P, limits).c_diagnoses()


def c_explanations_min(P: PmcsSystem, limits: Limits = DEFAULT_LIMITS) -> List[SExplanation]:
    return StratifiedAnalyzer(P, limits).c_explanations_min()


def duality_check(system, limits: Limits = DEFAULT_LIMITS) -> List[DualityReport]:
    """Both unions of every applicable duality identity.

    For a PMCS the section-compatible identity is included whenever the
    system is inconsistent with a nonempty maximal consistent section.
    """
    if isinstance(system, PmcsSystem):
        reports = Analyzer(system.base, limits).duality()
        try:
            reports.append(StratifiedAnalyzer(system, limits).duality())
        except DomainError:
            pass
        return reports
    return Analyzer(system, limits).duality()
