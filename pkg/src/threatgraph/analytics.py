"""Graph statistics: per-weakness reports, connectivity figures, frequency tables.

Reports are computed from reachable() closures over a frozen graph, so every
count is a set cardinality (distinct entities, not paths). Technique counts
include sub-techniques reached through parent edges.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import UnknownNode
from .graph import Layer, NodeId, ThreatGraph

# Rounding used when rendering reports, matching presentation conventions:
# average CVSS to 2 decimals, link density to 3 decimal places of a percent.
AVG_CVSS_DECIMALS = 2
DENSITY_DECIMALS = 3

_TOKEN_RE = re.compile(r"[0-9a-z]+")


@dataclass
class WeaknessReport:
    cwe_id: str
    name: str
    n_tactics: int
    n_techniques: int
    n_attack_patterns: int
    n_vulnerabilities: int
    n_product_configs: int
    sum_cvss: float
    avg_cvss: float | None
    warnings: list = field(default_factory=list)


@dataclass
class ConnectivityStats:
    n_techniques: int
    n_attack_patterns: int
    possible_pairs: int
    linked_pairs: int
    density_percent: float
    pct_unlinked_techniques: float
    undefined: bool = False  # true when possible_pairs == 0


def weakness_report(graph: ThreatGraph, cwe_id: str) -> WeaknessReport:
    """Linked-entity counts and CVSS totals for one weakness."""
    nid = NodeId(Layer.WEAKNESS, cwe_id)
    node = graph.get(nid)

    counts = {}
    for layer in (Layer.TACTIC, Layer.TECHNIQUE, Layer.ATTACK_PATTERN):
        counts[layer] = len(graph.reachable(nid, layer))
    vulns = graph.reachable(nid, Layer.VULNERABILITY)
    apcs = graph.reachable(nid, Layer.PRODUCT_CONFIG)

    warnings = []
    sum_cvss = 0.0
    missing = 0
    for vid in vulns:
        cvss = graph.get(vid).cvss
        if cvss is None:
            missing += 1
        else:
            sum_cvss += cvss
    if missing:
        warnings.append(f"{missing} vulnerabilities without CVSS counted as 0")

    avg_cvss = sum_cvss / len(vulns) if vulns else None
    return WeaknessReport(
        cwe_id=cwe_id,
        name=node.name,
        n_tactics=counts[Layer.TACTIC],
        n_techniques=counts[Layer.TECHNIQUE],
        n_attack_patterns=counts[Layer.ATTACK_PATTERN],
        n_vulnerabilities=len(vulns),
        n_product_configs=len(apcs),
        sum_cvss=sum_cvss,
        avg_cvss=avg_cvss,
        warnings=warnings,
    )


def connectivity_stats(graph: ThreatGraph) -> ConnectivityStats:
    """Technique/attack-pattern link density across the whole graph."""
    techniques = graph.node_ids(Layer.TECHNIQUE)
    patterns = graph.node_ids(Layer.ATTACK_PATTERN)
    possible = len(techniques) * len(patterns)

    linked = 0
    unlinked_techniques = 0
    for tid in techniques:
        down = [n for n in graph.neighbors_down(tid) if n.layer is Layer.ATTACK_PATTERN]
        linked += len(down)
        if not down:
            unlinked_techniques += 1

    if possible == 0:
        return ConnectivityStats(
            n_techniques=len(techniques),
            n_attack_patterns=len(patterns),
            possible_pairs=0,
            linked_pairs=linked,
            density_percent=0.0,
            pct_unlinked_techniques=0.0,
            undefined=True,
        )
    return ConnectivityStats(
        n_techniques=len(techniques),
        n_attack_patterns=len(patterns),
        possible_pairs=possible,
        linked_pairs=linked,
        density_percent=100.0 * linked / possible,
        pct_unlinked_techniques=100.0 * unlinked_techniques / len(techniques),
    )


def format_density(stats: ConnectivityStats) -> str:
    return f"{stats.density_percent:.{DENSITY_DECIMALS}f}%"


def frequency_table(graph: ThreatGraph, layer: Layer, top_k: int, roots) -> list:
    """Rank layer nodes by how many query roots reach them.

    roots is an iterable of weakness local ids (the configurable root set,
    e.g. a published top-25 list). Count for a node = number of distinct
    roots whose reachable set contains it. Sorted by count descending, ties
    by local_id ascending.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    counts = Counter()
    for root in roots:
        rid = NodeId(Layer.WEAKNESS, root)
        if rid not in graph:
            raise UnknownNode(str(rid))
        for nid in graph.reachable(rid, layer):
            counts[nid] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].local_id))
    return ranked[:top_k]


def tokenize(text: str) -> list:
    """Lowercase and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def ngram_frequency(texts, n: int, top_k: int) -> list:
    """Most frequent unigrams or bigrams across all texts."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    counts = Counter()
    for text in texts:
        tokens = tokenize(text)
        for i in range(len(tokens) - n + 1):
            counts[" ".join(tokens[i : i + n])] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_k]


REPORT_COLUMNS = [
    "cwe_id",
    "name",
    "n_tactics",
    "n_techniques",
    "n_attack_patterns",
    "n_vulnerabilities",
    "sum_cvss",
    "avg_cvss",
    "n_apc",
]


def write_weakness_reports(graph: ThreatGraph, cwe_ids, out_path):
    """CSV report for a list of weaknesses (technique counts include
    sub-techniques). Returns the reports in input order."""
    reports = [weakness_report(graph, cwe_id) for cwe_id in cwe_ids]
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for rep in reports:
            avg = "" if rep.avg_cvss is None else f"{rep.avg_cvss:.{AVG_CVSS_DECIMALS}f}"
            writer.writerow(
                [
                    rep.cwe_id,
                    rep.name,
                    rep.n_tactics,
                    rep.n_techniques,
                    rep.n_attack_patterns,
                    rep.n_vulnerabilities,
                    f"{rep.sum_cvss:g}",
                    avg,
                    rep.n_product_configs,
                ]
            )
    return reports
