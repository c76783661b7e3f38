import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threatgraph.analytics import (
    REPORT_COLUMNS,
    connectivity_stats,
    format_density,
    frequency_table,
    ngram_frequency,
    weakness_report,
    write_weakness_reports,
)
from threatgraph.errors import UnknownNode
from threatgraph.graph import Layer, NodeId

from conftest import make_graph, nid, oracle_reachable, random_layered_graph


def cwe_with_cves():
    nodes = [
        (Layer.WEAKNESS, "CWE-1", "Weakness One"),
        (Layer.VULNERABILITY, "CVE-1", "", 4.0),
        (Layer.VULNERABILITY, "CVE-2", "", 6.0),
        (Layer.VULNERABILITY, "CVE-3", "", None),
    ]
    edges = [
        (nid(Layer.WEAKNESS, "CWE-1"), nid(Layer.VULNERABILITY, "CVE-1")),
        (nid(Layer.WEAKNESS, "CWE-1"), nid(Layer.VULNERABILITY, "CVE-2")),
    ]
    return make_graph(nodes, edges)


def test_weakness_report_hand_sum():
    rep = weakness_report(cwe_with_cves(), "CWE-1")
    assert rep.n_vulnerabilities == 2
    assert rep.sum_cvss == 10.0
    assert rep.avg_cvss == 5.0
    assert rep.warnings == []


def test_weakness_report_missing_cvss_warns():
    g = make_graph(
        [
            (Layer.WEAKNESS, "CWE-1", "W"),
            (Layer.VULNERABILITY, "CVE-1", "", None),
        ],
        [(nid(Layer.WEAKNESS, "CWE-1"), nid(Layer.VULNERABILITY, "CVE-1"))],
    )
    rep = weakness_report(g, "CWE-1")
    assert rep.sum_cvss == 0.0
    assert rep.warnings


def test_weakness_report_isolated():
    g = make_graph([(Layer.WEAKNESS, "CWE-9", "Isolated")], [])
    rep = weakness_report(g, "CWE-9")
    assert (
        rep.n_tactics
        == rep.n_techniques
        == rep.n_attack_patterns
        == rep.n_vulnerabilities
        == rep.n_product_configs
        == 0
    )
    assert rep.avg_cvss is None


def test_weakness_report_unknown():
    g = make_graph([(Layer.WEAKNESS, "CWE-9", "x")], [])
    with pytest.raises(UnknownNode):
        weakness_report(g, "CWE-404")


def test_weakness_report_desk(desk_graph):
    rep = weakness_report(desk_graph, "CWE-A")
    assert rep.n_attack_patterns == 1
    assert rep.n_techniques == 2
    assert rep.n_tactics == 1
    assert rep.n_vulnerabilities == 1
    assert rep.sum_cvss == 7.5


def test_weakness_report_matches_oracle_counts():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g, edges = random_layered_graph(rng, max_nodes=120)
        for wid in g.node_ids(Layer.WEAKNESS)[:5]:
            rep = weakness_report(g, wid.local_id)
            assert rep.n_tactics == len(oracle_reachable(edges, wid, Layer.TACTIC))
            assert rep.n_techniques == len(oracle_reachable(edges, wid, Layer.TECHNIQUE))
            assert rep.n_vulnerabilities == len(
                oracle_reachable(edges, wid, Layer.VULNERABILITY)
            )
            if rep.n_vulnerabilities:
                assert abs(rep.avg_cvss * rep.n_vulnerabilities - rep.sum_cvss) < 1e-9


def _pair_fixture(n_tech, n_cap, n_edges):
    nodes = [(Layer.TECHNIQUE, f"T{i}", f"t{i}") for i in range(n_tech)]
    nodes += [(Layer.ATTACK_PATTERN, f"C{i}", f"c{i}") for i in range(n_cap)]
    edges = [
        (nid(Layer.TECHNIQUE, f"T{i}"), nid(Layer.ATTACK_PATTERN, f"C{i % n_cap}"))
        for i in range(n_edges)
    ]
    return make_graph(nodes, edges)


def test_connectivity_paper_scale_fixture():
    # 666 x 740 with 157 links: density renders as 0.032%
    nodes = [(Layer.TECHNIQUE, f"T{i}", f"t{i}") for i in range(666)]
    nodes += [(Layer.ATTACK_PATTERN, f"C{i}", f"c{i}") for i in range(740)]
    edges = [
        (nid(Layer.TECHNIQUE, f"T{i}"), nid(Layer.ATTACK_PATTERN, f"C{i}"))
        for i in range(157)
    ]
    stats = connectivity_stats(make_graph(nodes, edges))
    assert stats.possible_pairs == 492_840
    assert stats.linked_pairs == 157
    assert format_density(stats) == "0.032%"


def test_connectivity_empty_graph():
    g = make_graph([], [])
    stats = connectivity_stats(g)
    assert stats.undefined
    assert stats.density_percent == 0.0


def test_connectivity_unlinked_percentage():
    g = _pair_fixture(100, 30, 26)
    stats = connectivity_stats(g)
    assert stats.pct_unlinked_techniques == 74.0


def test_connectivity_invariant_under_relabeling():
    rng = np.random.default_rng(9)
    g, edges = random_layered_graph(rng, max_nodes=80)
    relabeled = make_graph(
        [
            (n.layer, "zz-" + n.local_id, "name", None)
            for n in map(g.get, g.node_ids())
            for n in [n.id]
        ],
        [
            (NodeId(a.layer, "zz-" + a.local_id), NodeId(b.layer, "zz-" + b.local_id))
            for a, b in edges
        ],
    )
    assert (
        connectivity_stats(g).density_percent
        == connectivity_stats(relabeled).density_percent
    )


def test_frequency_table_single_root(desk_graph):
    ranked = frequency_table(desk_graph, Layer.TECHNIQUE, 10, roots=["CWE-A"])
    assert all(count == 1 for _, count in ranked)
    assert {n for n, _ in ranked} == desk_graph.reachable(
        nid(Layer.WEAKNESS, "CWE-A"), Layer.TECHNIQUE
    )


def test_frequency_table_counts_roots():
    nodes = [(Layer.WEAKNESS, f"CWE-{i}", f"w{i}") for i in range(5)]
    nodes += [(Layer.VULNERABILITY, "CVE-X", "", 5.0), (Layer.VULNERABILITY, "CVE-Y", "", 5.0)]
    edges = [
        (nid(Layer.WEAKNESS, f"CWE-{i}"), nid(Layer.VULNERABILITY, "CVE-X"))
        for i in range(3)
    ]
    edges += [(nid(Layer.WEAKNESS, "CWE-4"), nid(Layer.VULNERABILITY, "CVE-Y"))]
    g = make_graph(nodes, edges)
    ranked = frequency_table(
        g, Layer.VULNERABILITY, 5, roots=[f"CWE-{i}" for i in range(5)]
    )
    assert ranked[0] == (nid(Layer.VULNERABILITY, "CVE-X"), 3)
    assert ranked[1] == (nid(Layer.VULNERABILITY, "CVE-Y"), 1)


def test_ngram_bigram_example():
    ranked = ngram_frequency(["Buffer Overflow", "buffer overflow attack"], 2, 5)
    assert ranked[0] == ("buffer overflow", 2)


def test_ngram_empty():
    assert ngram_frequency([], 1, 5) == []


def test_ngram_hand_enumeration():
    assert ngram_frequency(["a b c"], 2, 5) == [("a b", 1), ("b c", 1)]


@given(
    texts=st.lists(st.text(alphabet="ab c.X-", max_size=30), max_size=8),
    n=st.sampled_from([1, 2]),
)
@settings(max_examples=60, deadline=None)
def test_property_ngram_counts_sum(texts, n):
    from threatgraph.analytics import tokenize

    ranked = ngram_frequency(texts, n, 10**9)
    expected = sum(max(0, len(tokenize(t)) - n + 1) for t in texts)
    assert sum(count for _, count in ranked) == expected


def test_write_weakness_reports_csv(tmp_path, desk_graph):
    out = tmp_path / "report.csv"
    write_weakness_reports(desk_graph, ["CWE-A", "CWE-B"], out)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == REPORT_COLUMNS
    assert rows[1][0] == "CWE-A"
    assert rows[1][7] == "7.50"  # avg cvss, 2 decimals
    assert rows[2][7] == ""  # undefined average
