import io
import json
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURE_NAMES, fixture_path
from randsys import random_pmcs
from prefmcs.cli import run
from prefmcs.dsl import parse
from prefmcs.graph import export_flow_graph, flow_graph
from prefmcs.mcs import is_consistent


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, _ = call(*argv, "--json")
    return code, json.loads(out)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_check_exit_code_tracks_consistency(name, systems):
    code, out, _ = call("check", fixture_path(name))
    assert code == (0 if is_consistent(systems[name].base) else 1)
    assert out.strip() in ("consistent", "inconsistent")


def test_analyze_m3():
    code, rep = report("analyze", fixture_path("m3"))
    assert code == 0
    res = rep["result"]
    assert res["level"] == 2
    assert res["di"] == {"num": 1, "den": 2, "decimal": "0.5"}
    assert res["maximal_consistent_section"]["strata"] == [["C1", "C2"], ["C3", "C4"]]
    assert res["witness"]["suffix_unconstrained"] is True
    assert set(rep) == {"command", "system", "result", "meta"}


def test_analyze_linear_scan_agrees():
    assert report("analyze", fixture_path("m3"))[1]["result"] == report(
        "analyze", "--linear-scan", fixture_path("m3")
    )[1]["result"]


def test_analyze_report_is_byte_identical():
    first = call("analyze", "--json", fixture_path("m3"))[1]
    second = call("analyze", "--json", fixture_path("m3"))[1]
    assert first == second


def test_timing_only_on_request():
    assert "elapsed_ms" not in report("check", fixture_path("m0"))[1]["meta"]
    assert "elapsed_ms" in report("check", "--timing", fixture_path("m0"))[1]["meta"]


def test_explain_c_family_m3():
    code, rep = report("explain", "--family", "c", fixture_path("m3"))
    assert code == 0
    assert rep["result"]["explanations"] == [["r51"], ["r61"]]


def test_diagnose_families():
    _, rep = report("diagnose", fixture_path("m1"))
    assert rep["result"]["diagnoses"] == [
        {"remove": [], "unconditional": ["r4"]},
        {"remove": ["r1"], "unconditional": []},
        {"remove": ["r2"], "unconditional": []},
        {"remove": ["r3"], "unconditional": []},
    ]
    _, rep = report("diagnose", "--family", "s-min", fixture_path("m1"))
    assert sorted(rep["result"]["diagnoses"]) == [["r1"], ["r2"], ["r3"]]
    _, rep = report("diagnose", "--family", "c", fixture_path("m3"))
    assert rep["result"]["diagnoses"] == [["r51", "r61"]]
    _, rep = report("diagnose", "--family", "full", "--compatible", fixture_path("m3"))
    found = rep["result"]["diagnoses"]
    assert {"remove": ["r61"], "unconditional": ["r52"]} in found
    assert rep["result"]["protected"] == ["r11", "r21", "r31", "r41"]


def test_equilibria_and_duality():
    _, rep = report("equilibria", fixture_path("m2"))
    assert rep["result"]["count"] == 1
    code, out, _ = call("duality", fixture_path("m3"))
    assert code == 0 and "VIOLATED" not in out
    assert report("duality", fixture_path("m3"))[1]["result"]["all_hold"] is True


def test_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.pmcs"
    bad.write_text("stratum { context C1 logic prop { kb { a @ } br { } } }")
    code, _, err = call("check", bad)
    assert code == 2 and "lexical" in err
    assert call("check", tmp_path / "missing.pmcs")[0] == 2
    assert call("check", "--max-rules", "1", fixture_path("m0"))[0] == 2
    code, _, err = call("diagnose", "--family", "c", fixture_path("m2"))
    assert code == 2 and "consistent" in err


def test_graph_to_file(tmp_path):
    target = tmp_path / "m2.dot"
    code, out, _ = call("graph", "--dot", target, fixture_path("m2"))
    assert code == 0
    dot = target.read_text()
    assert dot.startswith("digraph information_flow {")
    assert dot.count("subgraph cluster_") == 3
    assert "9 edges" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "prefmcs", "check", str(fixture_path("m1"))],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1


# -- flow graph ------------------------------------------------------------------


def test_m0_edges(systems):
    edges = set(flow_graph(systems["m0"]).edges)
    assert edges == {("C2", "C1"), ("C3", "C1"), ("C1", "C2"), ("C3", "C2"), ("C2", "C3"), ("C1", "C3")}


def test_single_context_graph():
    P = parse("stratum { context C1 logic prop { kb { } br { } } }")
    g = flow_graph(P)
    assert g.nodes == ("C1",) and g.edges == ()
    assert '"C1";' in export_flow_graph(P)


def test_self_loops_are_kept(systems):
    assert ("C1", "C1") in flow_graph(systems["gadget"]).edges


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_edges_never_point_to_more_preferred_strata(seed):
    P = random_pmcs(random.Random(seed), require_local_consistency=False)
    name_to_index = {c.name: c.index for c in P.base.contexts}
    for src, dst in flow_graph(P).edges:
        assert P.stratum_of(name_to_index[src]) <= P.stratum_of(name_to_index[dst])
