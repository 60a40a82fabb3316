"""Context logics: classical propositional logic and ground normal logic
programs (with constraints and classical negation) under the answer-set
semantics.

Belief sets are finite sets of literals over a context's signature.  Both
logics share the convention that a belief set never holds a literal together
with its complement; an inconsistent propositional theory therefore has no
acceptable belief set at all.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, Optional, Tuple, Union

from prefmcs.errors import CapacityError, IllFormedKbError

BeliefSet = FrozenSet["Literal"]
Signature = Tuple[str, ...]


@dataclass(frozen=True, order=True)
class Literal:
    atom: str
    negated: bool = False

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.negated)

    def __str__(self):
        return f"-{self.atom}" if self.negated else self.atom

    @classmethod
    def parse(cls, text: str) -> "Literal":
        text = text.strip()
        if text.startswith("-"):
            return cls(text[1:].strip(), True)
        return cls(text)


def make_signature(atoms: Iterable[str]) -> Signature:
    return tuple(sorted(set(atoms)))


def literal_universe(sig: Signature) -> Tuple[Literal, ...]:
    return tuple(Literal(a, neg) for a in sig for neg in (False, True))


def is_consistent_set(lits: Iterable[Literal]) -> bool:
    lits = set(lits)
    return not any(l.complement() in lits for l in lits if not l.negated)


def format_belief_set(s: Iterable[Literal]) -> str:
    return "{" + ",".join(str(l) for l in sorted(s)) + "}"


# -- propositional formulas --------------------------------------------------


class Formula:
    """Base class of propositional formula nodes."""

    def atoms(self) -> FrozenSet[str]:
        raise NotImplementedError

    def holds(self, true_atoms) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def atoms(self):
        return frozenset((self.name,))

    def holds(self, true_atoms):
        return self.name in true_atoms


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def atoms(self):
        return self.arg.atoms()

    def holds(self, true_atoms):
        return not self.arg.holds(true_atoms)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def atoms(self):
        return self.left.atoms() | self.right.atoms()

    def holds(self, true_atoms):
        return self.left.holds(true_atoms) and self.right.holds(true_atoms)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def atoms(self):
        return self.left.atoms() | self.right.atoms()

    def holds(self, true_atoms):
        return self.left.holds(true_atoms) or self.right.holds(true_atoms)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def atoms(self):
        return self.left.atoms() | self.right.atoms()

    def holds(self, true_atoms):
        return (not self.left.holds(true_atoms)) or self.right.holds(true_atoms)


def literal_formula(lit: Literal) -> Formula:
    return Not(Atom(lit.atom)) if lit.negated else Atom(lit.atom)


PropKb = Tuple[Formula, ...]


def prop_acc(kb: Iterable[Formula], sig: Iterable[str]) -> Tuple[BeliefSet, ...]:
    """Acceptable belief sets of a propositional knowledge base.

    A satisfiable ``kb`` has exactly one belief set: every literal over ``sig``
    that it classically entails.  An unsatisfiable ``kb`` has none.
    """
    kb = tuple(kb)
    sig = make_signature(sig)
    _check_atoms(set().union(*(f.atoms() for f in kb)), sig)
    return _prop_acc(kb)


@lru_cache(maxsize=None)
def _prop_acc(kb: PropKb) -> Tuple[BeliefSet, ...]:
    # atoms outside the kb are unconstrained, so neither they nor their
    # negations can be entailed
    relevant = sorted(set().union(*(f.atoms() for f in kb))) if kb else []
    models = []
    for bits in itertools.product((False, True), repeat=len(relevant)):
        true = {a for a, b in zip(relevant, bits) if b}
        if all(f.holds(true) for f in kb):
            models.append(true)
    if not models:
        return ()
    entailed = set()
    for a in relevant:
        if all(a in m for m in models):
            entailed.add(Literal(a))
        elif not any(a in m for m in models):
            entailed.add(Literal(a, True))
    return (frozenset(entailed),)


# -- answer-set programs -------------------------------------------------------


@dataclass(frozen=True)
class AspRule:
    """``head <- pos, not neg``; a ``None`` head makes the rule a constraint."""

    head: Optional[Literal]
    pos: Tuple[Literal, ...] = ()
    neg: Tuple[Literal, ...] = ()

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    def literals(self) -> Tuple[Literal, ...]:
        head = () if self.head is None else (self.head,)
        return head + self.pos + self.neg


AspProgram = Tuple[AspRule, ...]


def gl_reduct(program: Iterable[AspRule], candidate: Iterable[Literal]) -> AspProgram:
    """Gelfond-Lifschitz reduct of ``program`` relative to ``candidate``."""
    candidate = frozenset(candidate)
    return tuple(
        AspRule(r.head, r.pos)
        for r in program
        if not any(l in candidate for l in r.neg)
    )


def least_model(program: Iterable[AspRule]) -> Optional[BeliefSet]:
    """Least model of a negation-free program, or ``None`` when a constraint
    fires or complementary literals are derived."""
    program = tuple(program)
    if any(r.neg for r in program):
        raise ValueError("least_model expects a program without default negation")
    model: set = set()
    changed = True
    while changed:
        changed = False
        for r in program:
            if all(l in model for l in r.pos):
                if r.head is None:
                    return None
                if r.head not in model:
                    model.add(r.head)
                    changed = True
    if not is_consistent_set(model):
        return None
    return frozenset(model)


def asp_acc(
    program: Iterable[AspRule],
    sig: Iterable[str],
    max_atoms: Optional[int] = None,
    name: str = "program",
) -> Tuple[BeliefSet, ...]:
    """All answer sets of a ground normal program, in canonical order.

    Candidates range over consistent subsets of the rule-head literals: a
    least model can only contain heads, so no answer set is missed.
    """
    program = tuple(program)
    sig = make_signature(sig)
    if max_atoms is not None and len(sig) > max_atoms:
        raise CapacityError(
            f"{name}: signature has {len(sig)} atoms, cap is {max_atoms}"
        )
    _check_atoms({l.atom for r in program for l in r.literals()}, sig)
    return _asp_acc(program)


@lru_cache(maxsize=None)
def _asp_acc(program: AspProgram) -> Tuple[BeliefSet, ...]:
    heads = sorted({r.head for r in program if r.head is not None})
    found = []
    for size in range(len(heads) + 1):
        for combo in itertools.combinations(heads, size):
            cand = frozenset(combo)
            if not is_consistent_set(cand):
                continue
            if least_model(gl_reduct(program, cand)) == cand:
                found.append(cand)
    return tuple(sorted(found, key=lambda s: sorted(s)))


def _check_atoms(atoms, sig: Signature):
    extra = set(atoms) - set(sig)
    if extra:
        raise IllFormedKbError(
            f"atom(s) outside signature: {', '.join(sorted(extra))}"
        )


# -- the logic interface ---------------------------------------------------------

KnowledgeBase = Union[PropKb, AspProgram]


class Logic(ABC):
    """A logic as a (KB, BS, ACC) triple over finite literal belief sets."""

    name: str

    @abstractmethod
    def atoms(self, kb: KnowledgeBase) -> FrozenSet[str]: ...

    @abstractmethod
    def add_heads(self, kb: KnowledgeBase, heads: Iterable[Literal]) -> KnowledgeBase: ...

    @abstractmethod
    def acc(self, kb: KnowledgeBase, sig: Signature) -> Tuple[BeliefSet, ...]: ...

    def check(self, kb: KnowledgeBase, sig: Signature) -> None:
        _check_atoms(self.atoms(kb), sig)

    def __repr__(self):
        return f"<logic {self.name}>"


class PropLogic(Logic):
    name = "prop"

    def atoms(self, kb):
        return frozenset().union(*(f.atoms() for f in kb))

    def add_heads(self, kb, heads):
        return tuple(kb) + tuple(literal_formula(h) for h in sorted(heads))

    def acc(self, kb, sig):
        return prop_acc(kb, sig)


class AspLogic(Logic):
    name = "asp"

    def atoms(self, kb):
        return frozenset(l.atom for r in kb for l in r.literals())

    def add_heads(self, kb, heads):
        return tuple(kb) + tuple(AspRule(h) for h in sorted(heads))

    def acc(self, kb, sig):
        return asp_acc(kb, sig)


PROP = PropLogic()
ASP = AspLogic()
LOGICS = {PROP.name: PROP, ASP.name: ASP}
