"""Classifiers, metrics, and significance tests."""

from .classifiers import (
    ClassifierKind,
    ClassifierSpec,
    DecisionTree,
    load_model,
    save_model,
    train,
)
from .metrics import MetricSet, auc, error_rate, evaluate, f1
from .stats import bonferroni, wilcoxon_ranksum

__all__ = [
    "ClassifierKind",
    "ClassifierSpec",
    "DecisionTree",
    "MetricSet",
    "auc",
    "bonferroni",
    "error_rate",
    "evaluate",
    "f1",
    "load_model",
    "save_model",
    "train",
    "wilcoxon_ranksum",
]
