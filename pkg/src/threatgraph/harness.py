"""Experiment orchestration: seeded trials, grids, significance, artifacts.

An experiment name follows the grammar FEATURES(-FEATURE)*-REPR-CLASSIFIER,
e.g. "CWE-TACTIC-BOW-RANDOM_FOREST": one token per selected feature
component, then the representation (BOW or EMBED; BERT is accepted as an
input alias for EMBED), then the classifier token.

Each trial derives its own seed from (master_seed, trial_index), rebuilds
the balanced pair dataset (unless fixed_negatives), splits 70/30 stratified
by label, fits the representation on the training split only, trains, and
scores the held-out split. Aggregation is an ordered reduction, so results
are reproducible byte for byte under the same master seed.
"""

from __future__ import annotations

import csv
import enum
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .boxplot import boxplot_svg
from .errors import ThreatGraphError
from .features import (
    FeatureComponent,
    bow_fit,
    bow_matrix,
    build_pairs,
    embedding_vector,
    feature_text,
    import_embeddings,
)
from .learn.classifiers import ClassifierKind, ClassifierSpec, train
from .learn.metrics import evaluate
from .learn.stats import bonferroni, wilcoxon_ranksum

SIGNIFICANCE_LEVEL = 0.05
DEFAULT_TRIALS = 100
DEFAULT_TRAIN_FRACTION = 0.7


class Representation(enum.Enum):
    BOW = "BOW"
    IMPORTED_EMBEDDING = "EMBED"

    @property
    def token(self):
        return self.value


_REPR_ALIASES = {"BOW": Representation.BOW, "EMBED": Representation.IMPORTED_EMBEDDING,
                 "BERT": Representation.IMPORTED_EMBEDDING}

_FEATURE_TOKENS = {c.value: c for c in FeatureComponent}


class ExperimentError(ThreatGraphError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    selection: frozenset
    representation: Representation
    classifier: ClassifierSpec
    trials: int = DEFAULT_TRIALS
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    master_seed: int = 0
    fixed_negatives: bool = False
    leaky_capec_techniques: bool = False
    embeddings_path: str | None = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.selection:
            raise ValueError("selection must be non-empty")

    @property
    def name(self) -> str:
        feats = [c.value for c in sorted(self.selection, key=lambda c: c.value)]
        return "-".join(feats + [self.representation.token, self.classifier.kind.token])


def parse_experiment_name(name: str) -> tuple:
    """Split a name into (selection, representation, classifier kind)."""
    tokens = name.split("-")
    if len(tokens) < 3:
        raise ValueError(f"experiment name too short: {name!r}")
    classifier = ClassifierKind.from_token(tokens[-1])
    repr_token = tokens[-2]
    if repr_token not in _REPR_ALIASES:
        raise ValueError(f"unknown representation token: {repr_token!r}")
    representation = _REPR_ALIASES[repr_token]
    selection = set()
    for tok in tokens[:-2]:
        if tok not in _FEATURE_TOKENS:
            raise ValueError(f"unknown feature token: {tok!r}")
        selection.add(_FEATURE_TOKENS[tok])
    return frozenset(selection), representation, classifier


def config_from_name(name: str, **kwargs) -> ExperimentConfig:
    selection, representation, kind = parse_experiment_name(name)
    hyper = kwargs.pop("hyperparameters", {})
    return ExperimentConfig(
        selection=selection,
        representation=representation,
        classifier=ClassifierSpec(kind=kind, hyperparameters=hyper),
        **kwargs,
    )


def config_from_dict(obj: dict) -> ExperimentConfig:
    """One entry of a grid.json array."""
    return config_from_name(
        obj["name"],
        hyperparameters=obj.get("hyperparameters", {}),
        trials=obj.get("trials", DEFAULT_TRIALS),
        train_fraction=obj.get("train_fraction", DEFAULT_TRAIN_FRACTION),
        master_seed=obj.get("master_seed", 0),
        fixed_negatives=obj.get("fixed_negatives", False),
        leaky_capec_techniques=obj.get("leaky_capec_techniques", False),
        embeddings_path=obj.get("embeddings"),
    )


def load_grid(path) -> list:
    with open(path) as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise ValueError("grid file must be a JSON array of experiment objects")
    return [config_from_dict(obj) for obj in entries]


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    error: float
    auc: float
    f1: float


@dataclass
class ExperimentSummary:
    name: str
    trials: list
    mean_error: float
    mean_auc: float
    mean_f1: float


@dataclass(frozen=True)
class SignificanceResult:
    metric: str
    a: str
    b: str
    p: float
    p_adjusted: float
    significant: bool
    better: str  # name of the config with the better mean (ties: empty)


def stratified_split(labels, train_fraction, rng):
    """(train_idx, test_idx); overall train size = round(fraction * n), with
    at least one example of each class on each side."""
    labels = np.asarray(labels)
    n = len(labels)
    target = int(round(train_fraction * n))
    train_parts = []
    test_parts = []
    classes = np.unique(labels)
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        k = int(round(train_fraction * len(idx)))
        k = min(max(k, 1), len(idx) - 1)
        train_parts.append(idx[:k])
        test_parts.append(idx[k:])
    train = np.concatenate(train_parts)
    # Nudge toward the overall rounding target without emptying a class.
    while len(train) > target:
        moved = False
        for i, part in enumerate(train_parts):
            if len(part) > 1 and len(train) > target:
                test_parts[i] = np.concatenate([test_parts[i], part[-1:]])
                train_parts[i] = part[:-1]
                moved = True
                train = np.concatenate(train_parts)
        if not moved:
            break
    while len(train) < target:
        moved = False
        for i, part in enumerate(test_parts):
            if len(part) > 1 and len(train) < target:
                train_parts[i] = np.concatenate([train_parts[i], part[:1]])
                test_parts[i] = part[1:]
                moved = True
                train = np.concatenate(train_parts)
        if not moved:
            break
    test = np.concatenate(test_parts)
    return np.sort(train), np.sort(test)


def run_trials(provider, classifier_spec, trials, train_fraction, master_seed):
    """Generic trial loop over a dataset provider.

    provider(rng, trial_index) returns (features, labels) where features is
    either a list of text strings (a vocabulary is fitted on the training
    split) or a 2-D array of pre-vectorized rows (split only).
    """
    results = []
    for t in range(trials):
        try:
            rng = np.random.default_rng(np.random.SeedSequence([master_seed, t]))
            features, labels = provider(rng, t)
            labels = np.asarray(labels, dtype=np.int64)
            train_idx, test_idx = stratified_split(labels, train_fraction, rng)

            if isinstance(features, np.ndarray):
                X_train = features[train_idx]
                X_test = features[test_idx]
            else:
                train_texts = [features[i] for i in train_idx]
                vocab = bow_fit(train_texts)
                X_train = bow_matrix(vocab, train_texts)
                X_test = bow_matrix(vocab, [features[i] for i in test_idx])

            trial_seed = int(
                np.random.SeedSequence([master_seed, t, 1]).generate_state(1)[0]
            )
            spec = replace(classifier_spec, seed=trial_seed)
            model = train(spec, X_train, labels[train_idx])
            metrics = evaluate(
                model.predict_score(X_test),
                model.predict_label(X_test),
                labels[test_idx],
            )
            results.append(
                TrialResult(t, metrics.error, metrics.auc, metrics.f1)
            )
        except ThreatGraphError as exc:
            raise ExperimentError(f"trial {t} failed: {exc}") from exc
    return results


def _summary(name, results) -> ExperimentSummary:
    return ExperimentSummary(
        name=name,
        trials=results,
        mean_error=float(np.mean([r.error for r in results])),
        mean_auc=float(np.mean([r.auc for r in results])),
        mean_f1=float(np.mean([r.f1 for r in results])),
    )


def run_experiment(config: ExperimentConfig, graph, embeddings=None) -> ExperimentSummary:
    """Run one experiment configuration against a frozen graph."""
    if config.representation is Representation.IMPORTED_EMBEDDING and embeddings is None:
        if config.embeddings_path is None:
            raise ExperimentError(
                f"{config.name}: imported-embedding experiments need an embeddings file"
            )
        embeddings, _ = import_embeddings(config.embeddings_path, graph)

    fixed_pairs = None
    if config.fixed_negatives:
        # Distinct derivation stream so the frozen sample is independent of
        # any single trial's seed.
        fixed_pairs = build_pairs(
            graph, np.random.SeedSequence([config.master_seed, 0x5EED])
        )

    def provider(rng, t):
        pairs = fixed_pairs if fixed_pairs is not None else build_pairs(graph, rng)
        labels = [p.label for p in pairs]
        if config.representation is Representation.BOW:
            features = [
                feature_text(p, config.selection, graph, config.leaky_capec_techniques)
                for p in pairs
            ]
        else:
            features = np.stack(
                [
                    embedding_vector(
                        p,
                        config.selection,
                        graph,
                        embeddings,
                        config.leaky_capec_techniques,
                    )
                    for p in pairs
                ]
            )
        return features, labels

    results = run_trials(
        provider,
        config.classifier,
        config.trials,
        config.train_fraction,
        config.master_seed,
    )
    return _summary(config.name, results)


METRICS = ("error", "auc", "f1")


def significance_matrix(summaries) -> list:
    """All pairwise rank-sum tests per metric, Bonferroni-adjusted over the
    number of pairwise comparisons for that metric."""
    results = []
    k = len(summaries)
    n_pairs = k * (k - 1) // 2
    if n_pairs == 0:
        return results
    for metric in METRICS:
        raw = []
        pairs = []
        for i in range(k):
            for j in range(i + 1, k):
                a = summaries[i]
                b = summaries[j]
                va = [getattr(r, metric) for r in a.trials]
                vb = [getattr(r, metric) for r in b.trials]
                raw.append(wilcoxon_ranksum(va, vb))
                pairs.append((a, b, float(np.mean(va)), float(np.mean(vb))))
        adjusted = bonferroni(raw, n_pairs)
        for (a, b, mean_a, mean_b), p, p_adj in zip(pairs, raw, adjusted):
            if mean_a == mean_b:
                better = ""
            elif metric == "error":
                better = a.name if mean_a < mean_b else b.name
            else:
                better = a.name if mean_a > mean_b else b.name
            results.append(
                SignificanceResult(
                    metric=metric,
                    a=a.name,
                    b=b.name,
                    p=p,
                    p_adjusted=p_adj,
                    significant=p_adj < SIGNIFICANCE_LEVEL,
                    better=better,
                )
            )
    return results


def run_grid(configs, graph, embeddings=None) -> tuple:
    """Run every configuration; returns (summaries, significance results)."""
    if len(configs) < 2:
        raise ExperimentError("a grid needs at least 2 configurations")
    summaries = [run_experiment(cfg, graph, embeddings) for cfg in configs]
    return summaries, significance_matrix(summaries)


def emit_results(summaries, out_dir, significance=None):
    """Write results.csv, summary.csv, one SVG box plot per metric, and
    (when given) significance.csv. Returns the list of paths written."""
    if not summaries:
        raise ValueError("no summaries to emit")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "results.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "trial", "error", "auc", "f1"])
        for summary in summaries:
            for r in summary.trials:
                writer.writerow(
                    [summary.name, r.trial_index, repr(r.error), repr(r.auc), repr(r.f1)]
                )
    written.append(path)

    path = os.path.join(out_dir, "summary.csv")
    ordered = sorted(summaries, key=lambda s: (-s.mean_f1, s.name))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "mean_error", "mean_auc", "mean_f1"])
        for summary in ordered:
            writer.writerow(
                [
                    summary.name,
                    repr(summary.mean_error),
                    repr(summary.mean_auc),
                    repr(summary.mean_f1),
                ]
            )
    written.append(path)

    for metric in METRICS:
        groups = [
            (s.name, [getattr(r, metric) for r in s.trials]) for s in summaries
        ]
        path = os.path.join(out_dir, f"{metric}.svg")
        with open(path, "w") as fh:
            fh.write(boxplot_svg(groups, metric))
        written.append(path)

    if significance is not None:
        path = os.path.join(out_dir, "significance.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["metric", "a", "b", "p", "p_adjusted", "significant", "better"]
            )
            for res in significance:
                writer.writerow(
                    [
                        res.metric,
                        res.a,
                        res.b,
                        repr(res.p),
                        repr(res.p_adjusted),
                        int(res.significant),
                        res.better,
                    ]
                )
        written.append(path)
    return written
