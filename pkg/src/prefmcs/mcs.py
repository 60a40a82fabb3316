"""Multi-context systems: contexts, bridge rules, belief states and equilibria."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from prefmcs.errors import (
    AlignmentError,
    CapacityError,
    IllFormedKbError,
    ModelError,
    UnknownRuleError,
)
from prefmcs.logic import (
    LOGICS,
    BeliefSet,
    KnowledgeBase,
    Literal,
    Logic,
    Signature,
    format_belief_set,
    literal_universe,
    make_signature,
)

BeliefState = Tuple[BeliefSet, ...]


@dataclass(frozen=True)
class Limits:
    max_rules: int = 16
    max_atoms: int = 16


DEFAULT_LIMITS = Limits()


def natural_key(rule_id: str):
    """Sort key putting ``r2`` before ``r11``."""
    return tuple(
        (0, int(part), "") if part.isdigit() else (1, 0, part)
        for part in re.split(r"(\d+)", rule_id)
        if part
    )


@dataclass(frozen=True)
class BodyRef:
    context: int
    literal: Literal

    def __str__(self):
        return f"({self.context}:{self.literal})"


@dataclass(frozen=True)
class BridgeRule:
    id: str
    owner: int
    head: Literal
    pos: Tuple[BodyRef, ...] = ()
    neg: Tuple[BodyRef, ...] = ()

    @property
    def body(self) -> Tuple[BodyRef, ...]:
        return self.pos + self.neg

    def contexts(self) -> FrozenSet[int]:
        """The contexts mentioned in the body (positively or negatively)."""
        return frozenset(ref.context for ref in self.body)

    def unconditional(self) -> "BridgeRule":
        return replace(self, pos=(), neg=())

    def sort_key(self):
        return (self.owner, natural_key(self.id))

    def __str__(self):
        body = [str(r) for r in self.pos] + [f"not {r}" for r in self.neg]
        tail = " " + ", ".join(body) if body else ""
        return f"{self.id}: ({self.owner}:{self.head}) <-{tail}."


@dataclass(frozen=True)
class Context:
    index: int
    name: str
    logic: str
    kb: KnowledgeBase
    rules: Tuple[BridgeRule, ...] = ()
    signature: Signature = ()

    def __post_init__(self):
        if self.logic not in LOGICS:
            raise ModelError(f"context {self.name}: unknown logic {self.logic!r}")
        object.__setattr__(self, "kb", tuple(self.kb))
        object.__setattr__(
            self, "rules", tuple(sorted(self.rules, key=BridgeRule.sort_key))
        )
        object.__setattr__(self, "signature", make_signature(self.signature))
        for r in self.rules:
            if r.owner != self.index:
                raise ModelError(
                    f"rule {r.id} has head context {r.owner} but belongs to "
                    f"context {self.index} ({self.name})"
                )

    @property
    def engine(self) -> Logic:
        return LOGICS[self.logic]

    def literals(self) -> Tuple[Literal, ...]:
        return literal_universe(self.signature)

    def acc(self, heads: Iterable[Literal] = ()) -> Tuple[BeliefSet, ...]:
        """Acceptable belief sets of ``kb`` extended by ``heads``."""
        eng = self.engine
        return eng.acc(eng.add_heads(self.kb, set(heads)), self.signature)


@dataclass(frozen=True)
class McsSystem:
    """A finite multi-context system; contexts are kept in index order."""

    contexts: Tuple[Context, ...]
    _pos: Dict[int, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        ctxs = tuple(sorted(self.contexts, key=lambda c: c.index))
        object.__setattr__(self, "contexts", ctxs)
        if not ctxs:
            raise ModelError("a system needs at least one context")
        pos = {}
        for i, c in enumerate(ctxs):
            if c.index in pos:
                raise ModelError(f"duplicate context index {c.index}")
            pos[c.index] = i
        object.__setattr__(self, "_pos", pos)
        seen = set()
        for c in ctxs:
            try:
                c.engine.check(c.kb, c.signature)
            except IllFormedKbError as exc:
                raise IllFormedKbError(f"context {c.name}: {exc}") from None
            for r in c.rules:
                if r.id in seen:
                    raise ModelError(f"duplicate bridge rule id {r.id}")
                seen.add(r.id)
                if r.head.atom not in c.signature:
                    raise ModelError(f"rule {r.id}: head atom {r.head.atom} not in signature of {c.name}")
                for ref in r.body:
                    if ref.context not in pos:
                        raise ModelError(f"rule {r.id} references unknown context {ref.context}")
                    target = ctxs[pos[ref.context]]
                    if ref.literal.atom not in target.signature:
                        raise ModelError(
                            f"rule {r.id}: atom {ref.literal.atom} not in signature of {target.name}"
                        )

    def __len__(self):
        return len(self.contexts)

    def position(self, index: int) -> int:
        return self._pos[index]

    def context(self, index: int) -> Context:
        return self.contexts[self._pos[index]]

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(c.index for c in self.contexts)

    @property
    def rules(self) -> Tuple[BridgeRule, ...]:
        return tuple(r for c in self.contexts for r in c.rules)

    @property
    def rule_ids(self) -> Tuple[str, ...]:
        return tuple(r.id for r in self.rules)

    def rule(self, rule_id: str) -> BridgeRule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise UnknownRuleError([rule_id])

    def with_rules(self, rules: Iterable[BridgeRule]) -> "McsSystem":
        """``M[R]``: the same contexts with ``br_M`` replaced by ``rules``."""
        by_owner: Dict[int, List[BridgeRule]] = {c.index: [] for c in self.contexts}
        for r in rules:
            if r.owner not in by_owner:
                raise ModelError(f"rule {r.id} owned by unknown context {r.owner}")
            by_owner[r.owner].append(r)
        return McsSystem(
            tuple(replace(c, rules=tuple(by_owner[c.index])) for c in self.contexts)
        )

    def restrict(self, indices: Iterable[int]) -> "McsSystem":
        """Sub-system over ``indices``; every kept rule must stay closed."""
        keep = set(indices)
        return McsSystem(tuple(c for c in self.contexts if c.index in keep))

    def check_limits(self, limits: Limits = DEFAULT_LIMITS) -> None:
        n = len(self.rules)
        if n > limits.max_rules:
            raise CapacityError(f"system has {n} bridge rules, cap is {limits.max_rules}")
        for c in self.contexts:
            if len(c.signature) > limits.max_atoms:
                raise CapacityError(
                    f"context {c.name}: signature has {len(c.signature)} atoms, "
                    f"cap is {limits.max_atoms}"
                )


# -- belief states ---------------------------------------------------------------


def make_state(sets: Iterable[Iterable]) -> BeliefState:
    """Build a belief state from iterables of literals or literal strings."""
    return tuple(
        frozenset(l if isinstance(l, Literal) else Literal.parse(l) for l in s)
        for s in sets
    )


def format_state(state: BeliefState) -> str:
    return "(" + ", ".join(format_belief_set(s) for s in state) + ")"


def state_key(state: BeliefState):
    return tuple(tuple(sorted(s)) for s in state)


def _check_aligned(M: McsSystem, S: BeliefState):
    if len(S) != len(M.contexts):
        raise AlignmentError(
            f"belief state has {len(S)} components, system has {len(M.contexts)} contexts"
        )


def is_applicable(rule: BridgeRule, M: McsSystem, S: BeliefState) -> bool:
    pos = M.position
    return all(ref.literal in S[pos(ref.context)] for ref in rule.pos) and not any(
        ref.literal in S[pos(ref.context)] for ref in rule.neg
    )


def applicable_rules(M: McsSystem, S: BeliefState) -> Tuple[FrozenSet[str], ...]:
    """``app(br_i, S)`` for every context, as sets of rule ids."""
    _check_aligned(M, S)
    return tuple(
        frozenset(r.id for r in c.rules if is_applicable(r, M, S)) for c in M.contexts
    )


def is_equilibrium(M: McsSystem, S: BeliefState) -> bool:
    _check_aligned(M, S)
    for c, s in zip(M.contexts, S):
        heads = {r.head for r in c.rules if is_applicable(r, M, S)}
        if s not in c.acc(heads):
            return False
    return True


# -- equilibrium search ------------------------------------------------------------


def flow_components(M: McsSystem) -> List[List[int]]:
    """Strongly connected components of the information-flow graph (as
    context positions), in a topological order of the condensation."""
    g = nx.DiGraph()
    g.add_nodes_from(range(len(M.contexts)))
    for r in M.rules:
        for ref in r.body:
            g.add_edge(M.position(ref.context), M.position(r.owner))
    cond = nx.condensation(g)
    order = nx.lexicographical_topological_sort(
        cond, key=lambda c: min(cond.nodes[c]["members"])
    )
    return [sorted(cond.nodes[c]["members"]) for c in order]


def _search(M: McsSystem, components: Sequence[Sequence[int]]) -> Iterator[BeliefState]:
    """Guess-and-check over application patterns, one component at a time.

    Rules whose bodies only look at earlier components have a determined
    applicability; the remaining rules get every application pattern guessed,
    and a candidate survives only if the resulting belief sets reproduce the
    guess.
    """
    state: List[Optional[BeliefSet]] = [None] * len(M.contexts)
    pos = M.position

    def applicable(r: BridgeRule) -> bool:
        return all(ref.literal in state[pos(ref.context)] for ref in r.pos) and not any(
            ref.literal in state[pos(ref.context)] for ref in r.neg
        )

    def rec(ci: int) -> Iterator[BeliefState]:
        if ci == len(components):
            yield tuple(state)
            return
        comp = components[ci]
        inside = set(comp)
        fixed: List[BridgeRule] = []
        guessed: List[BridgeRule] = []
        for p in comp:
            for r in M.contexts[p].rules:
                if any(pos(ref.context) in inside for ref in r.body):
                    guessed.append(r)
                else:
                    fixed.append(r)
        fixed_heads = [(r.owner, r.head) for r in fixed if applicable(r)]
        for mask in range(1 << len(guessed)):
            chosen = [r for i, r in enumerate(guessed) if mask >> i & 1]
            heads: Dict[int, set] = {p: set() for p in comp}
            for owner, h in fixed_heads:
                heads[pos(owner)].add(h)
            for r in chosen:
                heads[pos(r.owner)].add(r.head)
            options = [M.contexts[p].acc(heads[p]) for p in comp]
            if not all(options):
                continue
            for combo in itertools.product(*options):
                for p, s in zip(comp, combo):
                    state[p] = s
                if all(applicable(r) == bool(mask >> i & 1) for i, r in enumerate(guessed)):
                    yield from rec(ci + 1)
            for p in comp:
                state[p] = None

    return rec(0)


def enumerate_equilibria(
    M: McsSystem,
    limit: Optional[int] = None,
    limits: Limits = DEFAULT_LIMITS,
    components: Optional[Sequence[Sequence[int]]] = None,
) -> List[BeliefState]:
    """All equilibria of ``M`` in canonical order, truncated to ``limit``.

    ``components`` may supply a precomputed component order for a supergraph
    of the flow graph (used when many modifications of one system are solved).
    """
    M.check_limits(limits)
    comps = components if components is not None else flow_components(M)
    found = sorted(set(_search(M, comps)), key=state_key)
    return found if limit is None else found[:limit]


def first_equilibrium(
    M: McsSystem,
    limits: Limits = DEFAULT_LIMITS,
    components: Optional[Sequence[Sequence[int]]] = None,
) -> Optional[BeliefState]:
    M.check_limits(limits)
    comps = components if components is not None else flow_components(M)
    return next(_search(M, comps), None)


def is_consistent(
    M: McsSystem,
    limits: Limits = DEFAULT_LIMITS,
    components: Optional[Sequence[Sequence[int]]] = None,
) -> bool:
    return first_equilibrium(M, limits, components) is not None


def modify(
    M: McsSystem,
    remove: Iterable[str] = (),
    unconditional: Iterable[str] = (),
    strict: bool = True,
) -> McsSystem:
    """``M[(br_M \\ remove) ∪ heads(unconditional)]``.

    A rule listed in ``unconditional`` is kept only in body-free form (its
    conditional version would be redundant).  With ``strict=False`` unknown
    ids are ignored instead of raising.
    """
    remove, unconditional = set(remove), set(unconditional)
    unknown = (remove | unconditional) - set(M.rule_ids)
    if unknown and strict:
        raise UnknownRuleError(unknown)
    rules = []
    for r in M.rules:
        if r.id in unconditional:
            rules.append(r.unconditional())
        elif r.id not in remove:
            rules.append(r)
    return M.with_rules(rules)


def locally_inconsistent(M: McsSystem) -> List[str]:
    """Names of contexts without an acceptable belief set when no bridge rule applies."""
    return [c.name for c in M.contexts if not c.acc()]
