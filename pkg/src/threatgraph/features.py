"""Labeled technique/attack-pattern pair datasets and their featurization.

A pair's text is built from the names of entities around it. Component
order is fixed (tactic names sorted, technique name, attack-pattern name,
weakness names sorted, then names of the pattern's other techniques sorted)
so bag-of-words and imported-embedding modes agree on ordering.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .analytics import tokenize
from .errors import DimensionMismatch, EmptyCorpus, NoPositivePairs, UnknownNode
from .graph import Layer, NodeId, ThreatGraph


class FeatureComponent(enum.Enum):
    """Selectable name sources for a pair, in concatenation order."""

    TACTIC_NAMES = "TACTIC"
    TECHNIQUE_NAME = "TECHNIQUE"
    CAPEC_NAME = "CAPEC"
    CWE_NAMES = "CWE"
    CAPEC_TECHNIQUES = "CAPEC_TECHNIQUE"


COMPONENT_ORDER = (
    FeatureComponent.TACTIC_NAMES,
    FeatureComponent.TECHNIQUE_NAME,
    FeatureComponent.CAPEC_NAME,
    FeatureComponent.CWE_NAMES,
    FeatureComponent.CAPEC_TECHNIQUES,
)


@dataclass(frozen=True)
class LabeledPair:
    technique: NodeId
    capec: NodeId
    label: int  # 1 = linked, 0 = unlinked

    def __post_init__(self):
        assert self.technique.layer is Layer.TECHNIQUE
        assert self.capec.layer is Layer.ATTACK_PATTERN


def linked_pairs(graph: ThreatGraph) -> list:
    """All stored technique/attack-pattern edges, sorted."""
    pairs = []
    for tid in graph.node_ids(Layer.TECHNIQUE):
        for nid in graph.neighbors_down(tid):
            if nid.layer is Layer.ATTACK_PATTERN:
                pairs.append((tid, nid))
    return pairs


def build_pairs(graph: ThreatGraph, seed) -> list:
    """Balanced dataset: all linked pairs plus an equal-size uniform sample
    of unlinked pairs (under-sampling the majority class), shuffled
    deterministically under seed.

    If there are fewer unlinked pairs than linked ones, the positives are
    under-sampled instead so the output stays exactly balanced.
    """
    positives = linked_pairs(graph)
    if not positives:
        raise NoPositivePairs("graph has no technique/attack-pattern edges")
    techniques = graph.node_ids(Layer.TECHNIQUE)
    patterns = graph.node_ids(Layer.ATTACK_PATTERN)
    linked = set(positives)
    negatives = [
        (t, c) for t in techniques for c in patterns if (t, c) not in linked
    ]

    rng = np.random.default_rng(seed)
    m = min(len(positives), len(negatives))
    if m < len(positives):
        idx = rng.choice(len(positives), size=m, replace=False)
        positives = [positives[i] for i in sorted(idx)]
    if m < len(negatives):
        idx = rng.choice(len(negatives), size=m, replace=False)
        negatives = [negatives[i] for i in sorted(idx)]

    pairs = [LabeledPair(t, c, 1) for t, c in positives] + [
        LabeledPair(t, c, 0) for t, c in negatives
    ]
    order = rng.permutation(len(pairs))
    return [pairs[i] for i in order]


def feature_text(
    pair: LabeledPair,
    selection,
    graph: ThreatGraph,
    leaky_capec_techniques: bool = False,
) -> str:
    """Comma-joined names of the selected components, in fixed order.

    The pattern's-other-techniques component excludes the paired technique's
    own name by default; leaky_capec_techniques=True keeps it (which leaks
    the label for positive pairs).
    """
    selection = set(selection)
    if not selection:
        raise ValueError("selection must be non-empty")
    for nid in (pair.technique, pair.capec):
        if nid not in graph:
            raise UnknownNode(str(nid))

    parts = []
    for component in COMPONENT_ORDER:
        if component not in selection:
            continue
        if component is FeatureComponent.TACTIC_NAMES:
            names = sorted(
                graph.get(n).name
                for n in graph.reachable(pair.technique, Layer.TACTIC)
            )
            parts.extend(names)
        elif component is FeatureComponent.TECHNIQUE_NAME:
            parts.append(graph.get(pair.technique).name)
        elif component is FeatureComponent.CAPEC_NAME:
            parts.append(graph.get(pair.capec).name)
        elif component is FeatureComponent.CWE_NAMES:
            names = sorted(
                graph.get(n).name for n in graph.reachable(pair.capec, Layer.WEAKNESS)
            )
            parts.extend(names)
        elif component is FeatureComponent.CAPEC_TECHNIQUES:
            capec_name = graph.get(pair.capec).name
            own_name = graph.get(pair.technique).name
            names = set()
            for n in graph.neighbors_up(pair.capec):
                if n.layer is not Layer.TECHNIQUE:
                    continue
                name = graph.get(n).name
                if name == capec_name:
                    continue
                if not leaky_capec_techniques and name == own_name:
                    continue
                names.add(name)
            parts.extend(sorted(names))
    return ", ".join(parts)


# -- bag of words ----------------------------------------------------------


def bow_fit(training_texts) -> dict:
    """Vocabulary from training texts only: token -> column, first-seen order."""
    texts = list(training_texts)
    if not texts:
        raise EmptyCorpus("cannot fit a vocabulary on an empty corpus")
    vocab = {}
    for text in texts:
        for token in tokenize(text):
            if token not in vocab:
                vocab[token] = len(vocab)
    if not vocab:
        raise EmptyCorpus("training texts contain no tokens")
    return vocab


def bow_transform(vocab: dict, text: str) -> dict:
    """Sparse counts {column: count}; out-of-vocabulary tokens are dropped."""
    if not vocab:
        raise EmptyCorpus("vocabulary is empty")
    counts = {}
    for token in tokenize(text):
        col = vocab.get(token)
        if col is not None:
            counts[col] = counts.get(col, 0) + 1
    return counts


def bow_matrix(vocab: dict, texts) -> np.ndarray:
    """Dense count matrix, one row per text."""
    X = np.zeros((len(texts), len(vocab)), dtype=np.float64)
    for i, text in enumerate(texts):
        for col, count in bow_transform(vocab, text).items():
            X[i, col] = count
    return X


# -- imported embeddings ---------------------------------------------------


def import_embeddings(path, graph: ThreatGraph | None = None):
    """Load per-node dense vectors from CSV rows `layer,id,v0..vD`.

    Returns (mapping NodeId -> vector, warnings). Ids absent from graph (when
    one is given) are kept but reported in warnings.
    """
    vectors = {}
    warnings = []
    dim = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < 3:
                raise DimensionMismatch(f"line {lineno}: need layer,id,v0..")
            layer = Layer.from_token(row[0])
            vec = np.array([float(v) for v in row[2:]], dtype=np.float64)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatch(
                    f"line {lineno}: dimension {vec.shape[0]} != {dim}"
                )
            nid = NodeId(layer, row[1])
            vectors[nid] = vec
            if graph is not None and nid not in graph:
                warnings.append(f"embedding for unknown node {nid}")
    return vectors, warnings


def embedding_vector(
    pair: LabeledPair,
    selection,
    graph: ThreatGraph,
    vectors: dict,
    leaky_capec_techniques: bool = False,
) -> np.ndarray:
    """Concatenation of per-component vectors in the fixed component order.

    Multi-entity components (tactics, weaknesses, other techniques) average
    their members' vectors; an empty component contributes zeros.
    """
    if not vectors:
        raise DimensionMismatch("no embedding vectors loaded")
    dim = len(next(iter(vectors.values())))
    zero = np.zeros(dim, dtype=np.float64)

    def mean_of(node_ids):
        vecs = [vectors[n] for n in node_ids if n in vectors]
        return np.mean(vecs, axis=0) if vecs else zero

    selection = set(selection)
    parts = []
    for component in COMPONENT_ORDER:
        if component not in selection:
            continue
        if component is FeatureComponent.TACTIC_NAMES:
            parts.append(mean_of(graph.reachable(pair.technique, Layer.TACTIC)))
        elif component is FeatureComponent.TECHNIQUE_NAME:
            parts.append(vectors.get(pair.technique, zero))
        elif component is FeatureComponent.CAPEC_NAME:
            parts.append(vectors.get(pair.capec, zero))
        elif component is FeatureComponent.CWE_NAMES:
            parts.append(mean_of(graph.reachable(pair.capec, Layer.WEAKNESS)))
        elif component is FeatureComponent.CAPEC_TECHNIQUES:
            others = [
                n
                for n in graph.neighbors_up(pair.capec)
                if n.layer is Layer.TECHNIQUE
                and (leaky_capec_techniques or n != pair.technique)
            ]
            parts.append(mean_of(others))
    return np.concatenate(parts)


def export_pairs_csv(pairs, out_path):
    """Write pairs as CSV `technique,capec,label` for external tooling."""
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["technique", "capec", "label"])
        for pair in pairs:
            writer.writerow([pair.technique.local_id, pair.capec.local_id, pair.label])
