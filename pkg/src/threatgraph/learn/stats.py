"""Nonparametric significance testing: Wilcoxon rank-sum and Bonferroni."""

from __future__ import annotations

import math

import numpy as np

from .metrics import _tied_ranks

# Exact null distribution is used when the smaller sample has at most this
# many observations and there are no ties; otherwise the normal
# approximation with tie and continuity corrections is used.
EXACT_MAX_MIN_SIZE = 10


def _exact_ranksum_p(n1: int, n_total: int, w_obs: int) -> float:
    """Two-sided p from the exact rank-sum null distribution.

    Counts size-n1 subsets of ranks 1..n_total by rank sum (dynamic
    programming), then doubles the smaller tail probability of the observed
    sum, capped at 1.
    """
    max_sum = sum(range(n_total - n1 + 1, n_total + 1))
    dp = np.zeros((n1 + 1, max_sum + 1), dtype=np.float64)
    dp[0, 0] = 1.0
    for r in range(1, n_total + 1):
        for k in range(min(n1, r), 0, -1):
            dp[k, r:] += dp[k - 1, : max_sum + 1 - r]
    counts = dp[n1]
    total = counts.sum()
    lower = counts[: w_obs + 1].sum() / total
    upper = counts[w_obs:].sum() / total
    return min(1.0, 2.0 * min(lower, upper))


def _normal_ranksum_p(ranks, n1: int, w_obs: float) -> float:
    """Two-sided p from the normal approximation with tie and continuity
    corrections."""
    n_total = len(ranks)
    n2 = n_total - n1
    mu = n1 * (n_total + 1) / 2.0

    # Tie correction over the combined sample.
    values, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts.astype(np.float64) ** 3 - tie_counts))
    sigma2 = (n1 * n2 / 12.0) * (
        (n_total + 1) - tie_term / (n_total * (n_total - 1))
    )
    if sigma2 <= 0.0:
        return 1.0
    z = max(0.0, abs(w_obs - mu) - 0.5) / math.sqrt(sigma2)
    return min(1.0, 2.0 * (1.0 - 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))))


def wilcoxon_ranksum(a, b) -> float:
    """Two-sided rank-sum p-value for samples a and b.

    Exact by enumeration for small tie-free samples, normal approximation
    (tie-corrected, continuity-corrected) otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 1 or len(b) < 1:
        raise ValueError("both samples must be non-empty")
    combined = np.concatenate([a, b])
    ranks = _tied_ranks(combined)
    w_obs = float(ranks[: len(a)].sum())

    has_ties = len(np.unique(combined)) < len(combined)
    if not has_ties and min(len(a), len(b)) <= EXACT_MAX_MIN_SIZE:
        return _exact_ranksum_p(len(a), len(combined), int(round(w_obs)))
    return _normal_ranksum_p(ranks, len(a), w_obs)


def bonferroni(p_values, m: int) -> list:
    """Adjust p-values for m comparisons: p' = min(1, p * m)."""
    p_values = list(p_values)
    if m < len(p_values):
        raise ValueError("m must be at least the number of p-values")
    return [min(1.0, p * m) for p in p_values]
