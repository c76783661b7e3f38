"""Shared fixtures: the 10-node desk graph, random layered graphs, and
edge-list brute-force oracles independent of the adjacency indices."""

import numpy as np
import pytest

from threatgraph.graph import Layer, NodeId, ThreatGraph, ThreatNode


def nid(layer, local_id):
    return NodeId(layer, local_id)


def make_graph(nodes, edges, freeze=True):
    """nodes: list of (layer, id, name[, cvss]); edges: list of (nid_a, nid_b)."""
    g = ThreatGraph()
    for spec in nodes:
        layer, local_id, name = spec[:3]
        cvss = spec[3] if len(spec) > 3 else None
        g.add_node(ThreatNode(NodeId(layer, local_id), name, cvss=cvss))
    for a, b in edges:
        g.add_edge(a, b)
    if freeze:
        g.freeze()
    return g


DESK_NODES = [
    (Layer.TACTIC, "TA1", "Initial Access"),
    (Layer.TACTIC, "TA2", "Discovery"),
    (Layer.TECHNIQUE, "T1", "Phishing"),
    (Layer.TECHNIQUE, "T2", "Drive-by Compromise"),
    (Layer.TECHNIQUE, "T3", "Network Sniffing"),
    (Layer.ATTACK_PATTERN, "CAPEC-1", "Spear Phishing"),
    (Layer.ATTACK_PATTERN, "CAPEC-2", "Interception"),
    (Layer.WEAKNESS, "CWE-A", "Insufficient Verification"),
    (Layer.WEAKNESS, "CWE-B", "Cleartext Transmission"),
    (Layer.VULNERABILITY, "CVE-2016-7163", "CVE-2016-7163", 7.5),
]

DESK_EDGES = [
    (nid(Layer.TACTIC, "TA1"), nid(Layer.TECHNIQUE, "T1")),
    (nid(Layer.TACTIC, "TA1"), nid(Layer.TECHNIQUE, "T2")),
    (nid(Layer.TACTIC, "TA2"), nid(Layer.TECHNIQUE, "T3")),
    (nid(Layer.TECHNIQUE, "T1"), nid(Layer.ATTACK_PATTERN, "CAPEC-1")),
    (nid(Layer.TECHNIQUE, "T2"), nid(Layer.ATTACK_PATTERN, "CAPEC-1")),
    (nid(Layer.TECHNIQUE, "T3"), nid(Layer.ATTACK_PATTERN, "CAPEC-2")),
    (nid(Layer.ATTACK_PATTERN, "CAPEC-1"), nid(Layer.WEAKNESS, "CWE-A")),
    (nid(Layer.WEAKNESS, "CWE-A"), nid(Layer.VULNERABILITY, "CVE-2016-7163")),
]


@pytest.fixture
def desk_graph():
    return make_graph(DESK_NODES, DESK_EDGES)


def random_layered_graph(rng, max_nodes=200):
    """Random valid graph plus its raw (parent, child) edge list."""
    counts = [int(rng.integers(1, max(2, max_nodes // 6))) for _ in Layer]
    while sum(counts) > max_nodes:
        counts[int(rng.integers(0, len(counts)))] = max(
            1, counts[int(rng.integers(0, len(counts)))] // 2
        )
    ids = {}
    nodes = []
    for layer, n in zip(Layer, counts):
        ids[layer] = [NodeId(layer, f"{layer.token}-{i}") for i in range(n)]
        for node_id in ids[layer]:
            cvss = (
                round(float(rng.uniform(0, 10)), 1)
                if layer is Layer.VULNERABILITY and rng.random() < 0.8
                else None
            )
            nodes.append((layer, node_id.local_id, f"name {node_id.local_id}", cvss))

    edges = set()
    n_edges = int(rng.integers(0, 3 * max(1, sum(counts) // 2)))
    layers = list(Layer)
    for _ in range(n_edges):
        li = int(rng.integers(0, len(layers) - 1))
        upper, lower = layers[li], layers[li + 1]
        a = ids[upper][int(rng.integers(0, len(ids[upper])))]
        b = ids[lower][int(rng.integers(0, len(ids[lower])))]
        edges.add((a, b))
    # a few sub-technique parent edges
    techs = ids[Layer.TECHNIQUE]
    if len(techs) >= 2:
        for _ in range(int(rng.integers(0, len(techs)))):
            i, j = rng.choice(len(techs), size=2, replace=False)
            edges.add((techs[int(i)], techs[int(j)]))

    g = make_graph(nodes, sorted(edges))
    return g, sorted(edges)


# -- brute-force oracles over the raw edge list ----------------------------


def oracle_neighbors(edges, node_id, direction_down):
    out = set()
    for a, b in edges:
        if direction_down and a == node_id:
            out.add(b)
        elif not direction_down and b == node_id:
            out.add(a)
    return sorted(out)


def oracle_reachable(edges, start, target_layer):
    """DFS over the raw (parent, child) edge list with the monotone
    traversal rule (same-layer technique hops in the direction of travel)."""
    if target_layer == start.layer and start.layer is not Layer.TECHNIQUE:
        return set()
    down = target_layer >= start.layer
    found = set()
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for a, b in edges:
            if down and a == cur:
                nxt = b
            elif not down and b == cur:
                nxt = a
            else:
                continue
            if nxt in seen:
                continue
            if down and nxt.layer > target_layer:
                continue
            if not down and nxt.layer < target_layer:
                continue
            seen.add(nxt)
            if nxt.layer == target_layer:
                found.add(nxt)
            if nxt.layer != target_layer or nxt.layer is Layer.TECHNIQUE:
                stack.append(nxt)
    found.discard(start)
    return found


def oracle_auc(scores, labels):
    """O(P*N) pairwise comparison with ties counted one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))
