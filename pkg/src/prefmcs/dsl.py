"""Reader and writer for ``.pmcs`` system descriptions.

A document is a sequence of ``stratum`` blocks, most preferred first::

    # comment
    stratum {
      context C1 logic prop {
        kb { a. b. }
        br { r1: (1:c) <- (2:d), not (3:h). }
      }
      context C2 logic asp {
        atoms { x }
        kb { d <- e. e. <- q, not h. -r. }
        br { }
      }
    }

Contexts are numbered 1, 2, ... in declaration order across all strata.  A
context's signature is derived from its kb, the heads of its rules and all
body references pointing at it; an optional ``atoms`` block adds more atoms.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from prefmcs.errors import PmcsError
from prefmcs.logic import (
    And,
    AspRule,
    Atom,
    Formula,
    Implies,
    Literal,
    Not,
    Or,
)
from prefmcs.mcs import BodyRef, BridgeRule, Context, McsSystem, locally_inconsistent
from prefmcs.stratified import PmcsSystem, validate_compatibility


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int  # byte offsets into the UTF-8 encoded text
    end: int

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    kind: str  # lexical | syntactic | semantic
    message: str

    def __str__(self):
        return f"{self.span}: {self.kind} error: {self.message}"


class ParseFailure(PmcsError):
    def __init__(self, errors: List[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


class LocalConsistencyWarning(UserWarning):
    """Some context has no acceptable belief set even without bridge rules."""


# -- lexer -------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<INT>[0-9]+)
  | (?P<LARROW><-)
  | (?P<RARROW>->)
  | (?P<PUNCT>[{}():,.~&|-])
  | (?P<bad>.)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # IDENT, INT, LARROW, RARROW, a punctuation char, or EOF
    value: str
    span: SourceSpan


def tokenize(text: str) -> Tuple[List[Token], List[ParseError]]:
    tokens: List[Token] = []
    errors: List[ParseError] = []
    line, col, byte = 1, 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        lexeme = m.group()
        nbytes = len(lexeme.encode("utf-8"))
        span = SourceSpan(line, col, byte, byte + nbytes)
        if kind == "bad":
            errors.append(ParseError(span, "lexical", f"unexpected character {lexeme!r}"))
        elif kind == "PUNCT":
            tokens.append(Token(lexeme, lexeme, span))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, span))
        byte += nbytes
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
    tokens.append(Token("EOF", "", SourceSpan(line, col, byte, byte)))
    return tokens, errors


# -- parser ------------------------------------------------------------------------


class _Sync(Exception):
    """Raised after a syntax error has been recorded; triggers recovery."""


@dataclass
class _RawRule:
    id: str
    head_ctx: int
    head: Literal
    pos: List[Tuple[int, Literal, SourceSpan]]
    neg: List[Tuple[int, Literal, SourceSpan]]
    span: SourceSpan


@dataclass
class _RawContext:
    index: int
    name: str
    logic: str
    span: SourceSpan
    atoms: List[str] = field(default_factory=list)
    kb: list = field(default_factory=list)
    rules: List[_RawRule] = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: List[Token], errors: List[ParseError]):
        self.toks = tokens
        self.i = 0
        self.errors = errors
        self.strata: List[List[_RawContext]] = []
        self.count = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_kw(self, word: str) -> bool:
        return self.at("IDENT", word)

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.value)
        self.errors.append(ParseError(t.span, "syntactic", f"expected {expected}, found {found}"))
        raise _Sync()

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        if not self.at(kind):
            self.fail(what or repr(kind))
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            self.fail(f"'{word}'")
        return self.advance()

    def skip_to(self, *stops: str, consume_dot: bool = False):
        """Skip tokens until a '.', '}' or keyword in ``stops`` at nesting depth 0."""
        depth = 0
        while not self.at("EOF"):
            t = self.tok
            if depth == 0 and t.kind == "IDENT" and t.value in stops:
                return
            if t.kind == "{":
                depth += 1
            elif t.kind == "}":
                if depth == 0:
                    return
                depth -= 1
            elif t.kind == "." and depth == 0 and consume_dot:
                self.advance()
                return
            self.advance()

    # grammar

    def document(self):
        if self.at("EOF"):
            self.errors.append(ParseError(self.tok.span, "syntactic", "empty document: expected 'stratum'"))
        while not self.at("EOF"):
            if self.at_kw("stratum"):
                self.stratum()
            else:
                try:
                    self.fail("'stratum'")
                except _Sync:
                    self.advance()
                    self.skip_to("stratum")
                    if self.at("}"):
                        self.advance()

    def stratum(self):
        start = self.advance()
        block: List[_RawContext] = []
        self.strata.append(block)
        try:
            self.expect("{", "'{'")
        except _Sync:
            self.skip_to("context", "stratum")
        while not self.at("}") and not self.at("EOF") and not self.at_kw("stratum"):
            if self.at_kw("context"):
                ctx = self.context()
                if ctx is not None:
                    block.append(ctx)
            else:
                try:
                    self.fail("'context' or '}'")
                except _Sync:
                    self.advance()
                    self.skip_to("context", "stratum")
        if not block:
            self.errors.append(ParseError(start.span, "syntactic", "stratum without contexts"))
        if self.at("}"):
            self.advance()
        else:
            try:
                self.fail("'}' closing stratum")
            except _Sync:
                pass

    def context(self) -> Optional[_RawContext]:
        start = self.advance()
        self.count += 1
        index = self.count
        opened = False
        try:
            name = self.expect("IDENT", "context name").value
            self.expect_kw("logic")
            logic_tok = self.expect("IDENT", "'prop' or 'asp'")
            if logic_tok.value not in ("prop", "asp"):
                self.errors.append(
                    ParseError(logic_tok.span, "syntactic", f"unknown logic {logic_tok.value!r}; expected 'prop' or 'asp'")
                )
            ctx = _RawContext(index, name, logic_tok.value, start.span)
            self.expect("{", "'{'")
            opened = True
            if self.at_kw("atoms"):
                self.advance()
                self.expect("{", "'{'")
                while self.at("IDENT"):
                    ctx.atoms.append(self.atom_name())
                    if not self.at(","):
                        break
                    self.advance()
                self.expect("}", "'}'")
            self.expect_kw("kb")
            self.expect("{", "'{'")
            while not self.at("}") and not self.at("EOF"):
                try:
                    ctx.kb.append(self.prop_item() if ctx.logic == "prop" else self.asp_item())
                except _Sync:
                    self.skip_to(consume_dot=True)
            self.expect("}", "'}'")
            self.expect_kw("br")
            self.expect("{", "'{'")
            while not self.at("}") and not self.at("EOF"):
                try:
                    ctx.rules.append(self.bridge_rule())
                except _Sync:
                    self.skip_to(consume_dot=True)
            self.expect("}", "'}'")
            self.expect("}", "'}' closing context")
            return ctx
        except _Sync:
            self.skip_to("context", "stratum")
            if opened and self.at("}"):
                self.advance()
            return None

    def atom_name(self) -> str:
        t = self.expect("IDENT", "atom")
        if t.value == "not":
            self.errors.append(ParseError(t.span, "syntactic", "'not' cannot be used as an atom"))
            raise _Sync()
        return t.value

    def literal(self) -> Literal:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        return Literal(self.atom_name(), neg)

    # propositional formulas: ~ binds tightest, then &, then |, then -> (right assoc)

    def prop_item(self) -> Formula:
        f = self.implication()
        self.expect(".", "'.'")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("RARROW"):
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.at("|"):
            self.advance()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.negation()
        while self.at("&"):
            self.advance()
            f = And(f, self.negation())
        return f

    def negation(self) -> Formula:
        if self.at("~"):
            self.advance()
            return Not(self.negation())
        if self.at("("):
            self.advance()
            f = self.implication()
            self.expect(")", "')'")
            return f
        return Atom(self.atom_name())

    def asp_item(self) -> AspRule:
        head = None
        if not self.at("LARROW"):
            head = self.literal()
        pos: List[Literal] = []
        neg: List[Literal] = []
        if self.at("LARROW"):
            self.advance()
            while True:
                if self.at_kw("not"):
                    self.advance()
                    neg.append(self.literal())
                else:
                    pos.append(self.literal())
                if not self.at(","):
                    break
                self.advance()
        elif head is None:
            self.fail("rule")
        self.expect(".", "'.'")
        return AspRule(head, tuple(pos), tuple(neg))

    def ref(self) -> Tuple[int, Literal, SourceSpan]:
        start = self.expect("(", "'('")
        k = int(self.expect("INT", "context index").value)
        self.expect(":", "':'")
        lit = self.literal()
        self.expect(")", "')'")
        return k, lit, start.span

    def bridge_rule(self) -> _RawRule:
        id_tok = self.expect("IDENT", "rule id")
        self.expect(":", "':'")
        k, head, _ = self.ref()
        self.expect("LARROW", "'<-'")
        pos, neg = [], []
        if not self.at("."):
            while True:
                if self.at_kw("not"):
                    self.advance()
                    neg.append(self.ref())
                else:
                    pos.append(self.ref())
                if not self.at(","):
                    break
                self.advance()
        self.expect(".", "'.'")
        return _RawRule(id_tok.value, k, head, pos, neg, id_tok.span)


def _build(strata: List[List[_RawContext]], errors: List[ParseError]) -> Optional[PmcsSystem]:
    def sem(span, msg):
        errors.append(ParseError(span, "semantic", msg))

    contexts = [c for block in strata for c in block]
    indices = {c.index for c in contexts}
    names: Dict[str, _RawContext] = {}
    for c in contexts:
        if c.name in names:
            sem(c.span, f"duplicate context name {c.name}")
        names[c.name] = c

    rule_ids: Dict[str, _RawRule] = {}
    atoms: Dict[int, set] = {c.index: set(c.atoms) for c in contexts}
    for c in contexts:
        for item in c.kb:
            if isinstance(item, AspRule):
                atoms[c.index].update(l.atom for l in item.literals())
            else:
                atoms[c.index].update(item.atoms())
        for r in c.rules:
            if r.id in rule_ids:
                sem(r.span, f"duplicate rule id {r.id}")
            rule_ids.setdefault(r.id, r)
            if r.head_ctx != c.index:
                sem(r.span, f"rule {r.id}: head context ({r.head_ctx}) must be the owning context ({c.index}, {c.name})")
            atoms[c.index].add(r.head.atom)
            for k, lit, span in r.pos + r.neg:
                if k not in indices:
                    sem(span, f"rule {r.id} references undefined context {k}")
                else:
                    atoms[k].add(lit.atom)
    if errors:
        return None

    built = []
    for c in contexts:
        rules = tuple(
            BridgeRule(
                r.id,
                c.index,
                r.head,
                tuple(BodyRef(k, l) for k, l, _ in r.pos),
                tuple(BodyRef(k, l) for k, l, _ in r.neg),
            )
            for r in c.rules
        )
        built.append(Context(c.index, c.name, c.logic, tuple(c.kb), rules, tuple(atoms[c.index])))
    try:
        base = McsSystem(tuple(built))
        layout = tuple(tuple(c.index for c in block) for block in strata)
        violations = validate_compatibility(base, layout)
        if violations:
            for v in violations:
                sem(rule_ids[v.rule].span, f"incompatible with stratification: {v}")
            return None
        return PmcsSystem(base, layout)
    except PmcsError as exc:
        sem(contexts[0].span, str(exc))
        return None


def parse(text: str) -> PmcsSystem:
    """Parse a document; raises :class:`ParseFailure` carrying every error found."""
    tokens, errors = tokenize(text)
    parser = _Parser(tokens, errors)
    parser.document()
    system = None
    if not errors:
        system = _build(parser.strata, errors)
    if errors:
        raise ParseFailure(sorted(errors, key=lambda e: (e.span.start, e.kind)))
    bad = locally_inconsistent(system.base)
    if bad:
        warnings.warn(
            f"context(s) {', '.join(bad)} have no acceptable belief set without bridge rules",
            LocalConsistencyWarning,
            stacklevel=2,
        )
    return system


def load(path) -> PmcsSystem:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# -- serializer --------------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}


def format_formula(f: Formula, parent: int = 0, right_side: bool = False) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "~" + format_formula(f.arg, 4)
    prec = _PREC[type(f)]
    op = {Implies: "->", Or: "|", And: "&"}[type(f)]
    if isinstance(f, Implies):
        text = f"{format_formula(f.left, prec + 1)} {op} {format_formula(f.right, prec)}"
    else:
        text = f"{format_formula(f.left, prec)} {op} {format_formula(f.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def format_asp_rule(r: AspRule) -> str:
    body = [str(l) for l in r.pos] + [f"not {l}" for l in r.neg]
    head = "" if r.head is None else str(r.head)
    if not body:
        return f"{head}."
    sep = " <- " if head else "<- "
    return f"{head}{sep}{', '.join(body)}."


def _derived_atoms(P: PmcsSystem) -> Dict[int, set]:
    base = P.base
    atoms = {c.index: set(c.engine.atoms(c.kb)) for c in base.contexts}
    for r in base.rules:
        atoms[r.owner].add(r.head.atom)
        for ref in r.body:
            atoms[ref.context].add(ref.literal.atom)
    return atoms


def serialize(P: PmcsSystem) -> str:
    """Canonical text for ``P``; ``parse(serialize(P)) == P``.

    Contexts are renumbered by their position in the strata, so systems whose
    indices already follow stratum order (everything produced by ``parse``)
    round-trip exactly.
    """
    derived = _derived_atoms(P)
    out: List[str] = []
    for block in P.strata:
        out.append("stratum {")
        for idx in block:
            c = P.base.context(idx)
            out.append(f"  context {c.name} logic {c.logic} {{")
            extra = sorted(set(c.signature) - derived[idx])
            if extra:
                out.append(f"    atoms {{ {', '.join(extra)} }}")
            if c.kb:
                out.append("    kb {")
                for item in c.kb:
                    text = format_asp_rule(item) if c.logic == "asp" else format_formula(item) + "."
                    out.append(f"      {text}")
                out.append("    }")
            else:
                out.append("    kb { }")
            if c.rules:
                out.append("    br {")
                for r in c.rules:
                    out.append(f"      {r}")
                out.append("    }")
            else:
                out.append("    br { }")
            out.append("  }")
        out.append("}")
    return "\n".join(out) + "\n"
