"""Information-flow graph of a (preferential) multi-context system and its DOT rendering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from prefmcs.stratified import PmcsSystem


@dataclass(frozen=True)
class FlowGraph:
    nodes: Tuple[str, ...]
    edges: Tuple[Tuple[str, str], ...]


def flow_edges(P: PmcsSystem) -> Tuple[Tuple[int, int], ...]:
    """Pairs (i, j) such that some rule of context j reads context i, sorted."""
    pairs = {(ref.context, r.owner) for r in P.base.rules for ref in r.body}
    return tuple(sorted(pairs))


def flow_graph(P: PmcsSystem) -> FlowGraph:
    name = {c.index: c.name for c in P.base.contexts}
    return FlowGraph(
        tuple(name[i] for i in P.base.indices),
        tuple((name[i], name[j]) for i, j in flow_edges(P)),
    )


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_flow_graph(P: PmcsSystem) -> str:
    """DOT digraph with one labelled cluster per stratum."""
    name = {c.index: c.name for c in P.base.contexts}
    lines = ["digraph information_flow {", "  rankdir=TB;"]
    for i, block in enumerate(P.strata, 1):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f'    label="stratum {i}";')
        lines.append("    style=dashed;")
        for idx in block:
            lines.append(f"    {_quote(name[idx])};")
        lines.append("  }")
    for i, j in flow_edges(P):
        lines.append(f"  {_quote(name[i])} -> {_quote(name[j])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
