"""Pure-Python implementations of the hot kernels.

Mirrors threatgraph.kernels._speedups operation for operation, in the same
arithmetic order, so results are interchangeable with the compiled module.
Used automatically when the extension is not built; also handy as an oracle
in parity tests. See benchmarks/bench_kernels.py for the speed comparison.
"""

import math

import numpy as np


def best_gini_split(X, y, rows, feats):
    """Best (feature, threshold, weighted_gini); see the compiled docstring."""
    m = len(rows)
    if m < 2:
        return -1, 0.0, np.inf

    best_gini = np.inf
    best_feat = -1
    best_thr = 0.0
    total = float(m)
    labs_all = y[rows]
    n1_total = float(labs_all.sum())

    for f in feats:
        vals = X[rows, f]
        order = np.argsort(vals, kind="stable")
        svals = vals[order]
        slabs = labs_all[order]
        if svals[0] == svals[m - 1]:
            continue
        n1_left = 0.0
        for i in range(1, m):
            n1_left += float(slabs[i - 1])
            if svals[i - 1] == svals[i]:
                continue
            nl = float(i)
            nr = total - nl
            gl = 1.0 - (n1_left / nl) ** 2 - ((nl - n1_left) / nl) ** 2
            gr = (
                1.0
                - ((n1_total - n1_left) / nr) ** 2
                - ((nr - (n1_total - n1_left)) / nr) ** 2
            )
            weighted = (nl * gl + nr * gr) / total
            if weighted < best_gini:
                best_gini = weighted
                best_feat = int(f)
                best_thr = 0.5 * float(svals[i - 1] + svals[i])
    return best_feat, best_thr, best_gini


def _sigmoid(z):
    if z > 30.0:
        z = 30.0
    elif z < -30.0:
        z = -30.0
    return 1.0 / (1.0 + math.exp(-z))


def logistic_sgd_epochs(X, y01, order, lr, l2):
    """Per-sample log-loss SGD with L2; visit order given per epoch."""
    n, d = X.shape
    w = np.zeros(d, dtype=np.float64)
    b = 0.0
    for e in range(order.shape[0]):
        for i in range(n):
            s = order[e, i]
            z = b + float(w @ X[s])
            g = _sigmoid(z) - float(y01[s])
            w -= lr * (g * X[s] + l2 * w)
            b -= lr * g
    return w, b


def hinge_sgd_epochs(X, ypm, order, lr, lam):
    """Per-sample sub-gradient descent on hinge loss with L2 penalty."""
    n, d = X.shape
    w = np.zeros(d, dtype=np.float64)
    b = 0.0
    for e in range(order.shape[0]):
        for i in range(n):
            s = order[e, i]
            yv = float(ypm[s])
            z = b + float(w @ X[s])
            if yv * z < 1.0:
                w -= lr * (lam * w - yv * X[s])
                b += lr * yv
            else:
                w -= lr * lam * w
    return w, b
