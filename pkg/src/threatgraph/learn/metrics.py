"""Evaluation metrics: error rate, rank-statistic AUC, F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass


@dataclass(frozen=True)
class MetricSet:
    error: float
    auc: float
    f1: float


def error_rate(pred_labels, labels) -> float:
    pred_labels = np.asarray(pred_labels)
    labels = np.asarray(labels)
    return float(np.mean(pred_labels != labels))


def _tied_ranks(values):
    """1-based ranks, ties averaged."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative, ties 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    ranks = _tied_ranks(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def f1(pred_labels, labels) -> float:
    """Harmonic mean of precision and recall for class 1; 0 when undefined."""
    pred_labels = np.asarray(pred_labels)
    labels = np.asarray(labels)
    tp = int(np.sum((pred_labels == 1) & (labels == 1)))
    fp = int(np.sum((pred_labels == 1) & (labels == 0)))
    fn = int(np.sum((pred_labels == 0) & (labels == 1)))
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def evaluate(scores, pred_labels, labels) -> MetricSet:
    return MetricSet(
        error=error_rate(pred_labels, labels),
        auc=auc(scores, labels),
        f1=f1(pred_labels, labels),
    )
