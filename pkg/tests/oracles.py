"""Independent reference implementations used only by the tests.

Nothing here calls into the solver paths under test: answer sets are
re-derived from the reduct definition over every candidate literal set,
propositional entailment is decided by truth tables, and equilibria come from
a plain Cartesian product filtered by the equilibrium definition.
"""

import itertools

from prefmcs.logic import AspRule, Literal, literal_formula


def all_consistent_subsets(sig):
    """Every consistent literal set over ``sig`` (3**len(sig) of them)."""
    for choice in itertools.product((None, False, True), repeat=len(sig)):
        yield frozenset(Literal(a, neg) for a, neg in zip(sig, choice) if neg is not None)


def brute_answer_sets(program, sig):
    program = list(program)
    out = []
    for cand in all_consistent_subsets(sig):
        reduct = [(r.head, r.pos) for r in program if not (set(r.neg) & cand)]
        model = set()
        violated = False
        while True:
            new = set(model)
            for head, pos in reduct:
                if set(pos) <= new:
                    if head is None:
                        violated = True
                    else:
                        new.add(head)
            if new == model or violated:
                break
            model = new
        if violated:
            continue
        if any(Literal(l.atom, not l.negated) in model for l in model):
            continue
        if model == cand:
            out.append(cand)
    return sorted(out, key=sorted)


def brute_prop_belief_sets(kb, sig):
    models = []
    for bits in itertools.product((False, True), repeat=len(sig)):
        true = {a for a, b in zip(sig, bits) if b}
        if all(f.holds(true) for f in kb):
            models.append(true)
    if not models:
        return []
    s = set()
    for a in sig:
        if all(a in m for m in models):
            s.add(Literal(a))
        if all(a not in m for m in models):
            s.add(Literal(a, True))
    return [frozenset(s)]


def oracle_acc(ctx, heads):
    if ctx.logic == "prop":
        return brute_prop_belief_sets(list(ctx.kb) + [literal_formula(h) for h in heads], ctx.signature)
    return brute_answer_sets(list(ctx.kb) + [AspRule(h) for h in heads], ctx.signature)


def oracle_applicable(rule, M, S):
    where = {c.index: i for i, c in enumerate(M.contexts)}
    return all(ref.literal in S[where[ref.context]] for ref in rule.pos) and all(
        ref.literal not in S[where[ref.context]] for ref in rule.neg
    )


def oracle_is_equilibrium(M, S):
    for i, c in enumerate(M.contexts):
        heads = {r.head for r in c.rules if oracle_applicable(r, M, S)}
        if S[i] not in oracle_acc(c, heads):
            return False
    return True


def candidate_sets(ctx):
    """Every belief set the context could take in some equilibrium: the union
    of its acceptable sets over all combinations of its rule heads."""
    heads = sorted({r.head for r in ctx.rules})
    seen = set()
    for k in range(len(heads) + 1):
        for combo in itertools.combinations(heads, k):
            seen.update(oracle_acc(ctx, combo))
    return sorted(seen, key=sorted)


def naive_equilibria(M, full_universe=False):
    if full_universe:
        pools = [list(all_consistent_subsets(c.signature)) for c in M.contexts]
    else:
        pools = [candidate_sets(c) for c in M.contexts]
    found = [S for S in itertools.product(*pools) if oracle_is_equilibrium(M, S)]
    return sorted(found, key=lambda S: tuple(tuple(sorted(s)) for s in S))


def naive_consistent(M):
    pools = [candidate_sets(c) for c in M.contexts]
    return any(oracle_is_equilibrium(M, S) for S in itertools.product(*pools))


def modified(M, present, uncond):
    rules = [r.unconditional() if r.id in uncond else r for r in M.rules if r.id in present or r.id in uncond]
    return M.with_rules(rules)


def powerset(items):
    items = sorted(items)
    return [frozenset(c) for k in range(len(items) + 1) for c in itertools.combinations(items, k)]


def naive_minimal_diagnoses(M):
    ids = set(M.rule_ids)
    subsets = powerset(ids)
    diag = [
        (d1, d2)
        for d1 in subsets
        for d2 in subsets
        if naive_consistent(modified(M, ids - d1, d2))
    ]
    return {
        (a, b) for a, b in diag
        if not any((c, d) != (a, b) and c <= a and d <= b for c, d in diag)
    }
