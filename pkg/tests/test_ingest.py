import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threatgraph.errors import MalformedInput, UnsupportedVersion
from threatgraph.graph import Layer, NodeId
from threatgraph.ingest import (
    EdgeRecord,
    NodeRecord,
    SourceKind,
    export_canonical,
    load_graph,
    parse_canonical_jsonl,
    parse_source,
)

from conftest import nid, random_layered_graph

CAPEC_FIXTURE = """<?xml version="1.0"?>
<Attack_Pattern_Catalog xmlns="http://capec.mitre.org/capec-3" Version="3.4">
  <Attack_Patterns>
    <Attack_Pattern ID="66" Name="SQL Injection" Status="Stable">
      <Description>Adversary supplies crafted SQL.</Description>
      <Related_Weaknesses>
        <Related_Weakness CWE_ID="89"/>
      </Related_Weaknesses>
    </Attack_Pattern>
  </Attack_Patterns>
</Attack_Pattern_Catalog>
"""

CWE_FIXTURE = """<?xml version="1.0"?>
<Weakness_Catalog xmlns="http://cwe.mitre.org/cwe-6" Version="4.3">
  <Weaknesses>
    <Weakness ID="79" Name="Improper Neutralization of Input During Web Page Generation ('Cross-site Scripting')" Abstraction="Base">
      <Description>The software does not neutralize user input.</Description>
      <Observed_Examples>
        <Observed_Example>
          <Reference>CVE-2016-7163</Reference>
          <Description>XSS in an admin console.</Description>
        </Observed_Example>
      </Observed_Examples>
    </Weakness>
  </Weaknesses>
</Weakness_Catalog>
"""

NVD_FIXTURE = json.dumps(
    {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_Items": [
            {
                "cve": {
                    "CVE_data_meta": {"ID": "CVE-2016-7163"},
                    "description": {
                        "description_data": [
                            {"lang": "en", "value": "Integer overflow in Joomla."}
                        ]
                    },
                },
                "configurations": {
                    "nodes": [
                        {
                            "cpe_match": [
                                {"vulnerable": True, "cpe23Uri": "cpe:2.3:a:joomla:joomla:3.6.1:*:*:*:*:*:*:*"},
                                {"vulnerable": True, "cpe23Uri": "cpe:2.3:a:joomla:joomla:3.6.2:*:*:*:*:*:*:*"},
                            ]
                        }
                    ]
                },
                "impact": {
                    "baseMetricV3": {"cvssV3": {"baseScore": 9.8}},
                    "baseMetricV2": {"cvssV2": {"baseScore": 7.5}},
                },
            }
        ],
    }
)

ATTACK_FIXTURE = json.dumps(
    {
        "type": "bundle",
        "id": "bundle--1",
        "objects": [
            {
                "type": "x-mitre-tactic",
                "name": "Discovery",
                "x_mitre_shortname": "discovery",
                "external_references": [
                    {"source_name": "mitre-attack", "external_id": "TA0007"}
                ],
            },
            {
                "type": "attack-pattern",
                "name": "System Network Configuration Discovery",
                "description": "Adversaries may look for network details.",
                "kill_chain_phases": [
                    {"kill_chain_name": "mitre-attack", "phase_name": "discovery"}
                ],
                "external_references": [
                    {"source_name": "mitre-attack", "external_id": "T1016"},
                    {"source_name": "capec", "external_id": "CAPEC-309"},
                ],
            },
            {
                "type": "attack-pattern",
                "name": "Wi-Fi Discovery",
                "x_mitre_is_subtechnique": True,
                "external_references": [
                    {"source_name": "mitre-attack", "external_id": "T1016.002"}
                ],
            },
            {
                "type": "attack-pattern",
                "name": "Old Revoked Thing",
                "revoked": True,
                "external_references": [
                    {"source_name": "mitre-attack", "external_id": "T9999"}
                ],
            },
        ],
    }
)


def test_parse_capec_minimal():
    records = parse_source(SourceKind.CAPEC_XML, CAPEC_FIXTURE)
    nodes = [r for r in records if isinstance(r, NodeRecord)]
    edges = [r for r in records if isinstance(r, EdgeRecord)]
    assert len(nodes) == 1 and len(edges) == 1
    assert nodes[0].layer is Layer.ATTACK_PATTERN
    assert nodes[0].local_id == "CAPEC-66"
    assert nodes[0].name == "SQL Injection"
    assert nodes[0].description == "Adversary supplies crafted SQL."
    assert edges[0] == EdgeRecord(Layer.ATTACK_PATTERN, "CAPEC-66", Layer.WEAKNESS, "CWE-89")


def test_parse_cwe_minimal():
    records = parse_source(SourceKind.CWE_XML, CWE_FIXTURE)
    nodes = [r for r in records if isinstance(r, NodeRecord)]
    edges = [r for r in records if isinstance(r, EdgeRecord)]
    assert len(nodes) == 1
    assert nodes[0].local_id == "CWE-79"
    assert edges == [EdgeRecord(Layer.WEAKNESS, "CWE-79", Layer.VULNERABILITY, "CVE-2016-7163")]


def test_parse_nvd_minimal():
    records = parse_source(SourceKind.NVD_CVE_JSON, NVD_FIXTURE)
    nodes = [r for r in records if isinstance(r, NodeRecord)]
    edges = [r for r in records if isinstance(r, EdgeRecord)]
    # one CVE + two product configurations, one edge per configuration
    assert len(nodes) == 3 and len(edges) == 2
    cve = nodes[0]
    assert cve.local_id == "CVE-2016-7163"
    assert cve.cvss == 9.8  # v3 beats v2
    assert {e.to_layer for e in edges} == {Layer.PRODUCT_CONFIG}


def test_parse_nvd_v2_only():
    feed = json.loads(NVD_FIXTURE)
    del feed["CVE_Items"][0]["impact"]["baseMetricV3"]
    records = parse_source(SourceKind.NVD_CVE_JSON, json.dumps(feed))
    cve = [r for r in records if isinstance(r, NodeRecord)][0]
    assert cve.cvss == 7.5


def test_parse_nvd_unsupported_version():
    feed = json.loads(NVD_FIXTURE)
    feed["CVE_data_version"] = "9.9"
    with pytest.raises(UnsupportedVersion):
        parse_source(SourceKind.NVD_CVE_JSON, json.dumps(feed))


def test_parse_attack_bundle():
    records = parse_source(SourceKind.ATTACK_JSON, ATTACK_FIXTURE)
    nodes = [r for r in records if isinstance(r, NodeRecord)]
    edges = [r for r in records if isinstance(r, EdgeRecord)]
    ids = {(n.layer, n.local_id) for n in nodes}
    assert (Layer.TACTIC, "TA0007") in ids
    assert (Layer.TECHNIQUE, "T1016") in ids
    assert (Layer.TECHNIQUE, "T1016.002") in ids
    assert (Layer.TECHNIQUE, "T9999") not in ids  # revoked
    assert EdgeRecord(Layer.TACTIC, "TA0007", Layer.TECHNIQUE, "T1016") in edges
    assert EdgeRecord(Layer.TECHNIQUE, "T1016", Layer.ATTACK_PATTERN, "CAPEC-309") in edges
    assert EdgeRecord(Layer.TECHNIQUE, "T1016", Layer.TECHNIQUE, "T1016.002") in edges


@pytest.mark.parametrize(
    "kind,payload",
    [
        (SourceKind.CAPEC_XML, "<not-xml"),
        (SourceKind.CAPEC_XML, "<Wrong_Root/>"),
        (SourceKind.CWE_XML, "<Weakness_Catalog><Weaknesses><Weakness/></Weaknesses></Weakness_Catalog>"),
        (SourceKind.NVD_CVE_JSON, "{}"),
        (SourceKind.NVD_CVE_JSON, "not json"),
        (SourceKind.ATTACK_JSON, "[1,2]"),
        (SourceKind.CANONICAL_JSONL, '{"t":"node"}'),
        (SourceKind.CANONICAL_JSONL, "{bad json}"),
        (SourceKind.CANONICAL_JSONL, '{"t":"wat"}'),
    ],
)
def test_malformed_inputs(kind, payload):
    with pytest.raises(MalformedInput):
        parse_source(kind, payload)


def test_empty_canonical():
    assert parse_canonical_jsonl("") == []


def test_load_graph_dedup():
    rec = NodeRecord(Layer.WEAKNESS, "CWE-79", "Cross-site Scripting")
    rec2 = NodeRecord(Layer.WEAKNESS, "CWE-79", "")
    graph, report = load_graph([[rec], [rec2]])
    assert len(graph) == 1
    assert report.duplicates_merged == 1
    assert graph.get(NodeId(Layer.WEAKNESS, "CWE-79")).name == "Cross-site Scripting"


def test_load_graph_merge_fills_missing_fields():
    first = NodeRecord(Layer.WEAKNESS, "CWE-79", "")
    # An empty weakness name alone would be invalid; the merge supplies it.
    second = NodeRecord(Layer.WEAKNESS, "CWE-79", "Cross-site Scripting", "desc")
    graph, report = load_graph([[first, second]])
    node = graph.get(NodeId(Layer.WEAKNESS, "CWE-79"))
    assert node.name == "Cross-site Scripting"
    assert node.description == "desc"


def test_load_graph_dangling_edge():
    rec = NodeRecord(Layer.WEAKNESS, "CWE-79", "XSS")
    edge = EdgeRecord(Layer.WEAKNESS, "CWE-79", Layer.VULNERABILITY, "CVE-404")
    graph, report = load_graph([[rec, edge]])
    assert report.dangling_edges == 1
    assert graph.neighbors_down(NodeId(Layer.WEAKNESS, "CWE-79")) == []


def test_load_graph_desk_counts(desk_graph):
    text = export_canonical(desk_graph)
    records = parse_canonical_jsonl(text)
    node_records = [r for r in records if isinstance(r, NodeRecord)]
    edge_records = [r for r in records if isinstance(r, EdgeRecord)]
    assert len(node_records) == 10
    assert len(edge_records) == 8
    graph, report = load_graph([records])
    assert report.nodes_added == len({r.node_id for r in node_records})
    assert report.edges_added == len(set(edge_records))


def test_export_empty_graph():
    graph, _ = load_graph([])
    assert export_canonical(graph) == ""


def test_export_schema_exact(desk_graph):
    lines = export_canonical(desk_graph).splitlines()
    first = json.loads(lines[0])
    assert list(first.keys()) == ["t", "layer", "id", "name", "desc", "cvss"]
    edge_lines = [json.loads(l) for l in lines if json.loads(l)["t"] == "edge"]
    assert list(edge_lines[0].keys()) == ["t", "a_layer", "a", "b_layer", "b"]
    assert len(edge_lines) == 8


def test_roundtrip_random_graphs():
    rng = np.random.default_rng(77)
    for _ in range(10):
        g, _ = random_layered_graph(rng, max_nodes=200)
        text = export_canonical(g)
        g2, report = load_graph([parse_canonical_jsonl(text)])
        assert report.dangling_edges == 0
        assert export_canonical(g2) == text
        assert g2.node_ids() == g.node_ids()
        assert g2.edges() == g.edges()
        for node_id in g.node_ids():
            a, b = g.get(node_id), g2.get(node_id)
            assert (a.name, a.description, a.cvss) == (b.name, b.description, b.cvss)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_property_roundtrip_stability(seed):
    rng = np.random.default_rng(seed)
    g, _ = random_layered_graph(rng, max_nodes=50)
    text = export_canonical(g)
    g2, _ = load_graph([parse_canonical_jsonl(text)])
    assert export_canonical(g2) == text


def test_parsers_only_emit_permitted_layer_pairs():
    from threatgraph.graph import _is_permitted_pair

    for kind, payload in [
        (SourceKind.CAPEC_XML, CAPEC_FIXTURE),
        (SourceKind.CWE_XML, CWE_FIXTURE),
        (SourceKind.NVD_CVE_JSON, NVD_FIXTURE),
        (SourceKind.ATTACK_JSON, ATTACK_FIXTURE),
    ]:
        for rec in parse_source(kind, payload):
            if isinstance(rec, EdgeRecord):
                assert _is_permitted_pair(rec.from_layer, rec.to_layer)
