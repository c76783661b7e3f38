"""Parsers for the four public source formats plus the canonical interchange.

Each parser consumes one local file and yields a RecordStream: NodeRecords
for recognized entries and EdgeRecords for recognized cross-references. Only
a documented subset of each official schema is consumed (ids, names,
descriptions, cross-reference lists, CVSS base score, product-configuration
identifiers); everything else is ignored. Text fields are stored verbatim.

The canonical interchange format is JSON Lines, one record per line:

    {"t":"node","layer":"...","id":"...","name":"...","desc":"...","cvss":<number|null>}
    {"t":"edge","a_layer":"...","a":"...","b_layer":"...","b":"..."}

Exports are deterministic: nodes sorted by (layer, local_id), then edges
sorted by endpoints, so identical graphs serialize byte-identically.
"""

from __future__ import annotations

import enum
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import MalformedInput, UnsupportedVersion
from .graph import Layer, NodeId, ThreatGraph, ThreatNode


@dataclass(frozen=True)
class NodeRecord:
    layer: Layer
    local_id: str
    name: str = ""
    description: str = ""
    cvss: float | None = None

    @property
    def node_id(self) -> NodeId:
        return NodeId(self.layer, self.local_id)


@dataclass(frozen=True)
class EdgeRecord:
    from_layer: Layer
    from_id: str
    to_layer: Layer
    to_id: str

    @property
    def endpoints(self):
        return (NodeId(self.from_layer, self.from_id), NodeId(self.to_layer, self.to_id))


class SourceKind(enum.Enum):
    ATTACK_JSON = "attack"
    CAPEC_XML = "capec"
    CWE_XML = "cwe"
    NVD_CVE_JSON = "nvd"
    CANONICAL_JSONL = "canonical"


@dataclass
class LoadReport:
    nodes_added: int = 0
    edges_added: int = 0
    dangling_edges: int = 0
    duplicates_merged: int = 0
    dangling: list = field(default_factory=list)


def parse_source(kind: SourceKind, data) -> list:
    """Dispatch to the parser for kind; data is bytes or str file content."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    parser = {
        SourceKind.ATTACK_JSON: parse_attack_json,
        SourceKind.CAPEC_XML: parse_capec_xml,
        SourceKind.CWE_XML: parse_cwe_xml,
        SourceKind.NVD_CVE_JSON: parse_nvd_cve_json,
        SourceKind.CANONICAL_JSONL: parse_canonical_jsonl,
    }[kind]
    return parser(data)


# -- canonical JSONL -------------------------------------------------------


def parse_canonical_jsonl(text: str) -> list:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"invalid JSON: {exc.msg}", where=f"line {lineno}")
        try:
            tag = obj["t"]
            if tag == "node":
                records.append(
                    NodeRecord(
                        layer=Layer.from_token(obj["layer"]),
                        local_id=obj["id"],
                        name=obj.get("name", ""),
                        description=obj.get("desc", ""),
                        cvss=obj.get("cvss"),
                    )
                )
            elif tag == "edge":
                records.append(
                    EdgeRecord(
                        from_layer=Layer.from_token(obj["a_layer"]),
                        from_id=obj["a"],
                        to_layer=Layer.from_token(obj["b_layer"]),
                        to_id=obj["b"],
                    )
                )
            else:
                raise MalformedInput(f"unknown record tag {tag!r}", where=f"line {lineno}")
        except (KeyError, ValueError) as exc:
            raise MalformedInput(f"bad record: {exc}", where=f"line {lineno}")
    return records


def export_canonical(graph: ThreatGraph) -> str:
    """Serialize a frozen graph to canonical JSONL, deterministically."""
    lines = []
    for nid in graph.node_ids():
        node = graph.get(nid)
        obj = {
            "t": "node",
            "layer": nid.layer.token,
            "id": nid.local_id,
            "name": node.name,
            "desc": node.description,
            "cvss": node.cvss,
        }
        lines.append(json.dumps(obj, separators=(",", ":"), ensure_ascii=False))
    for a, b in graph.edges():
        obj = {
            "t": "edge",
            "a_layer": a.layer.token,
            "a": a.local_id,
            "b_layer": b.layer.token,
            "b": b.local_id,
        }
        lines.append(json.dumps(obj, separators=(",", ":"), ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


# -- ATT&CK STIX bundle ----------------------------------------------------


def _attack_external_id(obj, source_name):
    for ref in obj.get("external_references", []):
        if ref.get("source_name") == source_name and "external_id" in ref:
            return ref["external_id"]
    return None


def parse_attack_json(text: str) -> list:
    """Parse a STIX 2.x bundle: tactics, techniques, tactic/CAPEC references."""
    try:
        bundle = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", where=f"offset {exc.pos}")
    if not isinstance(bundle, dict) or bundle.get("type") != "bundle":
        raise MalformedInput("expected a STIX bundle object", where="$")

    records = []
    tactic_by_shortname = {}
    objects = bundle.get("objects", [])

    # First pass: tactics, so kill-chain phase names resolve to tactic ids.
    for obj in objects:
        if obj.get("type") != "x-mitre-tactic" or obj.get("revoked"):
            continue
        ext_id = _attack_external_id(obj, "mitre-attack")
        if ext_id is None:
            continue
        records.append(
            NodeRecord(
                layer=Layer.TACTIC,
                local_id=ext_id,
                name=obj.get("name", ""),
                description=obj.get("description", ""),
            )
        )
        shortname = obj.get("x_mitre_shortname")
        if shortname:
            tactic_by_shortname[shortname] = ext_id

    for obj in objects:
        if obj.get("type") != "attack-pattern" or obj.get("revoked"):
            continue
        ext_id = _attack_external_id(obj, "mitre-attack")
        if ext_id is None:
            continue
        records.append(
            NodeRecord(
                layer=Layer.TECHNIQUE,
                local_id=ext_id,
                name=obj.get("name", ""),
                description=obj.get("description", ""),
            )
        )
        for phase in obj.get("kill_chain_phases", []):
            tactic_id = tactic_by_shortname.get(phase.get("phase_name"))
            if tactic_id:
                records.append(
                    EdgeRecord(Layer.TACTIC, tactic_id, Layer.TECHNIQUE, ext_id)
                )
        capec_id = _attack_external_id(obj, "capec")
        if capec_id:
            records.append(
                EdgeRecord(Layer.TECHNIQUE, ext_id, Layer.ATTACK_PATTERN, capec_id)
            )
        if obj.get("x_mitre_is_subtechnique") and "." in ext_id:
            parent = ext_id.split(".")[0]
            records.append(EdgeRecord(Layer.TECHNIQUE, parent, Layer.TECHNIQUE, ext_id))
    return records


# -- CAPEC / CWE XML -------------------------------------------------------


def _local(tag: str) -> str:
    """Element tag without its namespace."""
    return tag.rsplit("}", 1)[-1]


def _parse_xml(text: str, expect_root: str):
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedInput(f"invalid XML: {exc}", where="document")
    if _local(root.tag) != expect_root:
        raise MalformedInput(
            f"expected root <{expect_root}>, found <{_local(root.tag)}>", where="/"
        )
    return root


def _element_text(elem) -> str:
    return " ".join("".join(elem.itertext()).split())


def parse_capec_xml(text: str) -> list:
    """Parse an attack-pattern catalog: patterns plus CWE/technique references."""
    root = _parse_xml(text, "Attack_Pattern_Catalog")
    records = []
    for elem in root.iter():
        if _local(elem.tag) != "Attack_Pattern":
            continue
        raw_id = elem.get("ID")
        if raw_id is None:
            raise MalformedInput("Attack_Pattern without ID", where="Attack_Pattern")
        capec_id = f"CAPEC-{raw_id}"
        description = ""
        for child in elem:
            if _local(child.tag) == "Description":
                description = _element_text(child)
                break
        records.append(
            NodeRecord(
                layer=Layer.ATTACK_PATTERN,
                local_id=capec_id,
                name=elem.get("Name", ""),
                description=description,
            )
        )
        for rel in elem.iter():
            tag = _local(rel.tag)
            if tag == "Related_Weakness" and rel.get("CWE_ID"):
                records.append(
                    EdgeRecord(
                        Layer.ATTACK_PATTERN,
                        capec_id,
                        Layer.WEAKNESS,
                        f"CWE-{rel.get('CWE_ID')}",
                    )
                )
            elif tag == "Taxonomy_Mapping" and rel.get("Taxonomy_Name") == "ATTACK":
                for sub in rel:
                    if _local(sub.tag) == "Entry_ID" and sub.text:
                        records.append(
                            EdgeRecord(
                                Layer.TECHNIQUE,
                                f"T{sub.text.strip()}",
                                Layer.ATTACK_PATTERN,
                                capec_id,
                            )
                        )
    return records


def parse_cwe_xml(text: str) -> list:
    """Parse a weakness catalog: weaknesses plus observed-example CVE links."""
    root = _parse_xml(text, "Weakness_Catalog")
    records = []
    for elem in root.iter():
        if _local(elem.tag) != "Weakness":
            continue
        raw_id = elem.get("ID")
        if raw_id is None:
            raise MalformedInput("Weakness without ID", where="Weakness")
        cwe_id = f"CWE-{raw_id}"
        description = ""
        for child in elem:
            if _local(child.tag) == "Description":
                description = _element_text(child)
                break
        records.append(
            NodeRecord(
                layer=Layer.WEAKNESS,
                local_id=cwe_id,
                name=elem.get("Name", ""),
                description=description,
            )
        )
        for ref in elem.iter():
            if _local(ref.tag) == "Reference" and ref.text:
                cve = ref.text.strip()
                if cve.startswith("CVE-"):
                    records.append(
                        EdgeRecord(Layer.WEAKNESS, cwe_id, Layer.VULNERABILITY, cve)
                    )
    return records


# -- NVD CVE JSON feed -----------------------------------------------------


def _nvd_base_score(item):
    """CVSS base score; v3 takes precedence over v2 when both exist."""
    impact = item.get("impact", {})
    for metric_key, cvss_key in (("baseMetricV3", "cvssV3"), ("baseMetricV2", "cvssV2")):
        score = impact.get(metric_key, {}).get(cvss_key, {}).get("baseScore")
        if score is not None:
            return float(score)
    return None


def _nvd_cpe_uris(item):
    uris = []
    nodes = item.get("configurations", {}).get("nodes", [])
    stack = list(nodes)
    while stack:
        node = stack.pop(0)
        for match in node.get("cpe_match", []):
            uri = match.get("cpe23Uri")
            if uri and uri not in uris:
                uris.append(uri)
        stack.extend(node.get("children", []))
    return uris


def parse_nvd_cve_json(text: str) -> list:
    """Parse an NVD 1.1 feed: CVEs, CVSS scores, CWE links, product configs."""
    try:
        feed = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", where=f"offset {exc.pos}")
    if "CVE_Items" not in feed:
        raise MalformedInput("missing CVE_Items", where="$")
    version = feed.get("CVE_data_version")
    if version is not None and version not in ("4.0",):
        raise UnsupportedVersion(f"NVD feed version {version!r}")

    records = []
    for idx, item in enumerate(feed["CVE_Items"]):
        cve = item.get("cve", {})
        cve_id = cve.get("CVE_data_meta", {}).get("ID")
        if not cve_id:
            raise MalformedInput("CVE item without ID", where=f"CVE_Items[{idx}]")
        description = ""
        for desc in cve.get("description", {}).get("description_data", []):
            if desc.get("lang") == "en":
                description = desc.get("value", "")
                break
        records.append(
            NodeRecord(
                layer=Layer.VULNERABILITY,
                local_id=cve_id,
                name=cve_id,
                description=description,
                cvss=_nvd_base_score(item),
            )
        )
        for ptype in cve.get("problemtype", {}).get("problemtype_data", []):
            for desc in ptype.get("description", []):
                value = desc.get("value", "")
                if value.startswith("CWE-"):
                    records.append(
                        EdgeRecord(Layer.WEAKNESS, value, Layer.VULNERABILITY, cve_id)
                    )
        for uri in _nvd_cpe_uris(item):
            records.append(
                NodeRecord(layer=Layer.PRODUCT_CONFIG, local_id=uri, name=uri)
            )
            records.append(
                EdgeRecord(Layer.VULNERABILITY, cve_id, Layer.PRODUCT_CONFIG, uri)
            )
    return records


# -- merge ----------------------------------------------------------------


def load_graph(streams) -> tuple:
    """Merge record streams into a frozen ThreatGraph.

    Duplicate NodeRecords merge (first record wins; later records fill empty
    fields). Edges whose endpoints never appear are collected as dangling
    rather than applied. Returns (graph, LoadReport).
    """
    report = LoadReport()
    merged = {}
    edge_records = []
    for stream in streams:
        for rec in stream:
            if isinstance(rec, NodeRecord):
                nid = rec.node_id
                if nid in merged:
                    prev = merged[nid]
                    merged[nid] = NodeRecord(
                        layer=prev.layer,
                        local_id=prev.local_id,
                        name=prev.name or rec.name,
                        description=prev.description or rec.description,
                        cvss=prev.cvss if prev.cvss is not None else rec.cvss,
                    )
                    report.duplicates_merged += 1
                else:
                    merged[nid] = rec
            else:
                edge_records.append(rec)

    graph = ThreatGraph()
    for nid in sorted(merged):
        rec = merged[nid]
        graph.add_node(ThreatNode(nid, rec.name, rec.description, rec.cvss))
        report.nodes_added += 1

    seen_edges = set()
    for rec in edge_records:
        a, b = rec.endpoints
        if a not in graph or b not in graph:
            report.dangling_edges += 1
            report.dangling.append(rec)
            continue
        key = (min(a, b), max(a, b)) if a.layer != b.layer else (a, b)
        if key in seen_edges:
            continue
        seen_edges.add(key)
        graph.add_edge(a, b)
        report.edges_added += 1
    graph.freeze()
    return graph, report


def load_files(kind: SourceKind, paths) -> list:
    """Parse several files of one kind into a list of record streams."""
    streams = []
    for path in paths:
        with open(path, "rb") as fh:
            streams.append(parse_source(kind, fh.read()))
    return streams
