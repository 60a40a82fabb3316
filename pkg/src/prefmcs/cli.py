"""Command-line front end: ``pmcs <command> [options] FILE``."""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from decimal import Decimal, localcontext
from fractions import Fraction

from prefmcs.diagnosis import Analyzer, StratifiedAnalyzer, duality_check
from prefmcs.dsl import LocalConsistencyWarning, ParseFailure, load
from prefmcs.errors import PmcsError
from prefmcs.graph import export_flow_graph, flow_graph
from prefmcs.logic import format_belief_set
from prefmcs.mcs import Limits, enumerate_equilibria, is_consistent
from prefmcs.stratified import PmcsSystem, analyze

EXIT_OK, EXIT_INCONSISTENT, EXIT_ERROR = 0, 1, 2


def _ids(rules, order):
    return sorted(rules, key=order.__getitem__)


def _fraction(f: Fraction) -> dict:
    with localcontext() as ctx:
        ctx.prec = 12
        dec = Decimal(f.numerator) / Decimal(f.denominator)
    return {"num": f.numerator, "den": f.denominator, "decimal": str(dec.normalize()) if f else "0"}


def _state(P: PmcsSystem, S) -> dict:
    return {c.name: [str(l) for l in sorted(s)] for c, s in zip(P.base.contexts, S)}


def _system_summary(P: PmcsSystem) -> dict:
    name = {c.index: c.name for c in P.base.contexts}
    return {
        "contexts": [c.name for c in P.base.contexts],
        "strata": [[name[i] for i in block] for block in P.strata],
        "rules": len(P.base.rules),
    }


def cmd_check(P, args, limits):
    ok = is_consistent(P.base, limits)
    return {"consistent": ok}, EXIT_OK if ok else EXIT_INCONSISTENT


def cmd_equilibria(P, args, limits):
    eqs = enumerate_equilibria(P.base, limit=args.limit, limits=limits)
    return {"count": len(eqs), "equilibria": [_state(P, s) for s in eqs]}, EXIT_OK


def cmd_analyze(P, args, limits):
    rep = analyze(P, limits, linear=args.linear_scan)
    name = {c.index: c.name for c in P.base.contexts}
    section = None
    if rep.level >= 1:
        section = {
            "k": rep.level,
            "strata": [[name[i] for i in block] for block in P.strata[: rep.level]],
        }
    witness = None
    if rep.witness is not None:
        witness = {
            "strata": [
                {name[i]: [str(l) for l in sorted(s)] for i, s in zip(block, sets)}
                for block, sets in zip(P.strata, rep.witness.state)
            ],
            "suffix_unconstrained": rep.witness.suffix_unconstrained,
        }
    return {
        "strata": rep.m,
        "level": rep.level,
        "consistent": rep.consistent,
        "di": _fraction(rep.di),
        "maximal_consistent_section": section,
        "witness": witness,
    }, EXIT_OK


def _pairs(items, a, b, order):
    return [{a: _ids(getattr(x, a), order), b: _ids(getattr(x, b), order)} for x in items]


def cmd_diagnose(P, args, limits):
    order = {r: i for i, r in enumerate(P.base.rule_ids)}
    family = args.family
    if args.compatible or family == "c":
        sa = StratifiedAnalyzer(P, limits)
        if family == "c":
            return {"family": "c", "diagnoses": [_ids(d.rules, order) for d in sa.c_diagnoses()]}, EXIT_OK
        fam = {"full": "all", "min": "minimal", "s-min": "s-minimal"}[family]
        items = sa.compatible_diagnoses(fam)
        return {
            "family": family,
            "compatible": True,
            "protected": _ids(sa.protected, order),
            "diagnoses": _pairs(items, "remove", "unconditional", order),
        }, EXIT_OK
    a = Analyzer(P.base, limits)
    if family == "s-min":
        return {"family": family, "diagnoses": [_ids(d.rules, order) for d in a.s_diagnoses_min()]}, EXIT_OK
    items = a.all_diagnoses() if family == "full" else a.minimal_diagnoses()
    return {"family": family, "diagnoses": _pairs(items, "remove", "unconditional", order)}, EXIT_OK


def cmd_explain(P, args, limits):
    order = {r: i for i, r in enumerate(P.base.rule_ids)}
    if args.family == "c":
        sa = StratifiedAnalyzer(P, limits)
        return {"family": "c", "explanations": [_ids(e.rules, order) for e in sa.c_explanations_min()]}, EXIT_OK
    a = Analyzer(P.base, limits)
    if args.family == "s-min":
        return {"family": "s-min", "explanations": [_ids(e.rules, order) for e in a.s_explanations_min()]}, EXIT_OK
    return {
        "family": "min",
        "explanations": _pairs(a.minimal_explanations(), "cause", "protected", order),
    }, EXIT_OK


def cmd_duality(P, args, limits):
    order = {r: i for i, r in enumerate(P.base.rule_ids)}
    reports = duality_check(P, limits)
    out = [
        {
            "identity": r.identity,
            "holds": r.holds,
            "diagnoses_union": _ids(r.diagnoses_union, order),
            "explanations_union": _ids(r.explanations_union, order),
            "difference": _ids(r.difference, order),
        }
        for r in reports
    ]
    return {"identities": out, "all_hold": all(r.holds for r in reports)}, EXIT_OK


def cmd_graph(P, args, limits):
    dot = export_flow_graph(P)
    if args.dot == "-":
        sys.stdout.write(dot)
    else:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
    g = flow_graph(P)
    return {"nodes": list(g.nodes), "edges": [list(e) for e in g.edges], "dot": args.dot}, EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "equilibria": cmd_equilibria,
    "analyze": cmd_analyze,
    "diagnose": cmd_diagnose,
    "explain": cmd_explain,
    "duality": cmd_duality,
    "graph": cmd_graph,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="system description (.pmcs)")
    common.add_argument("--json", action="store_true", help="emit the structured report")
    common.add_argument("--max-rules", type=int, default=Limits.max_rules, metavar="N")
    common.add_argument("--max-atoms", type=int, default=Limits.max_atoms, metavar="N")
    common.add_argument("--timing", action="store_true", help="add elapsed time to the report")

    parser = argparse.ArgumentParser(prog="pmcs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="exit 0 if consistent, 1 otherwise")
    p = sub.add_parser("equilibria", parents=[common], help="list equilibria")
    p.add_argument("--limit", type=int, default=None, metavar="N")
    p = sub.add_parser("analyze", parents=[common], help="maximal level, DI, maximal consistent section")
    p.add_argument("--linear-scan", action="store_true", help="scan every cut instead of binary search")
    p = sub.add_parser("diagnose", parents=[common], help="diagnoses")
    p.add_argument("--family", choices=["full", "min", "s-min", "c"], default="min")
    p.add_argument("--compatible", action="store_true", help="keep only diagnoses avoiding the maximal consistent section")
    p = sub.add_parser("explain", parents=[common], help="inconsistency explanations")
    p.add_argument("--family", choices=["min", "s-min", "c"], default="min")
    sub.add_parser("duality", parents=[common], help="check the diagnosis/explanation duality")
    p = sub.add_parser("graph", parents=[common], help="export the information-flow graph")
    p.add_argument("--dot", required=True, metavar="PATH", help="output path, '-' for stdout")
    return parser


def _render_text(command: str, result: dict) -> str:
    lines = []
    if command == "check":
        lines.append("consistent" if result["consistent"] else "inconsistent")
    elif command == "equilibria":
        lines.append(f"{result['count']} equilibri{'um' if result['count'] == 1 else 'a'}")
        for s in result["equilibria"]:
            lines.append("  " + ", ".join(f"{k}={format_belief_set(v)}" for k, v in s.items()))
    elif command == "analyze":
        di = result["di"]
        lines.append(f"strata: {result['strata']}")
        lines.append(f"maximal level: {result['level']}")
        lines.append(f"DI: {di['num']}/{di['den']} ({di['decimal']})")
        sec = result["maximal_consistent_section"]
        if sec:
            lines.append(f"maximal consistent section: {sec['k']}-section " + " ".join(
                "(" + ",".join(b) + ")" for b in sec["strata"]))
        else:
            lines.append("maximal consistent section: none")
        w = result["witness"]
        if w:
            flag = " [suffix unconstrained]" if w["suffix_unconstrained"] else ""
            lines.append("witness:" + flag)
            for i, block in enumerate(w["strata"], 1):
                lines.append(f"  stratum {i}: " + ", ".join(f"{k}={format_belief_set(v)}" for k, v in block.items()))
    elif command in ("diagnose", "explain"):
        key = "diagnoses" if command == "diagnose" else "explanations"
        items = result[key]
        lines.append(f"{len(items)} {key} (family {result['family']})")
        for x in items:
            if isinstance(x, dict):
                a, b = list(x.values())
                lines.append(f"  ({{{','.join(a)}}}, {{{','.join(b)}}})")
            else:
                lines.append("  {" + ",".join(x) + "}")
    elif command == "duality":
        for r in result["identities"]:
            status = "holds" if r["holds"] else "VIOLATED"
            lines.append(f"{r['identity']}: {status}  union={{{','.join(r['diagnoses_union'])}}}")
            if not r["holds"]:
                lines.append(f"  explanations union={{{','.join(r['explanations_union'])}}}")
    elif command == "graph":
        lines.append(f"{len(result['nodes'])} nodes, {len(result['edges'])} edges")
    return "\n".join(lines)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    limits = Limits(args.max_rules, args.max_atoms)
    started = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", LocalConsistencyWarning)
            P = load(args.file)
        for w in caught:
            print(f"warning: {w.message}", file=stderr)
        result, code = COMMANDS[args.command](P, args, limits)
    except ParseFailure as exc:
        for err in exc.errors:
            print(f"{args.file}:{err}", file=stderr)
        return EXIT_ERROR
    except (PmcsError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_ERROR

    if args.json:
        meta = {"limits": {"max_rules": limits.max_rules, "max_atoms": limits.max_atoms}}
        if args.timing:
            meta["elapsed_ms"] = round((time.perf_counter() - started) * 1000, 3)
        cmd_args = {k: v for k, v in vars(args).items() if k not in ("file", "json", "command", "timing")}
        report = {
            "command": {"name": args.command, "input": args.file, "args": cmd_args},
            "system": _system_summary(P),
            "result": result,
            "meta": meta,
        }
        print(json.dumps(report, indent=2), file=stdout)
    elif not (args.command == "graph" and args.dot == "-"):
        print(_render_text(args.command, result), file=stdout)
        if args.timing:
            print(f"elapsed: {(time.perf_counter() - started) * 1000:.1f} ms", file=stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
