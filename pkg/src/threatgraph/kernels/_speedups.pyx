# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Gini split search and per-sample SGD epochs.

threatgraph.kernels.fallback implements the same functions in pure Python
with the identical arithmetic order, so both implementations produce the
same results; this module only exists for speed.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def best_gini_split(double[:, ::1] X, long long[::1] y,
                    long long[::1] rows, long long[::1] feats):
    """Best (feature, threshold, weighted_gini) over candidate features.

    Thresholds are midpoints between consecutive distinct sorted values.
    Improvement is strict, so with feats sorted ascending ties go to the
    lower feature index and lower threshold. Returns (-1, 0.0, inf) when no
    valid split exists.
    """
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t nf = feats.shape[0]
    cdef Py_ssize_t fi, i, f
    cdef double best_gini = np.inf
    cdef long long best_feat = -1
    cdef double best_thr = 0.0

    vals_np = np.empty(m, dtype=np.float64)
    labs_np = np.empty(m, dtype=np.int64)
    cdef double[::1] vals = vals_np
    cdef long long[::1] labs = labs_np
    cdef long long[::1] order
    cdef double[::1] svals
    cdef long long[::1] slabs

    cdef double n1_left, n1_total, nl, nr, gl, gr, weighted, thr
    cdef double total = <double> m

    if m < 2:
        return -1, 0.0, np.inf

    n1_total = 0.0
    for i in range(m):
        n1_total += <double> y[rows[i]]

    svals_np = np.empty(m, dtype=np.float64)
    slabs_np = np.empty(m, dtype=np.int64)
    svals = svals_np
    slabs = slabs_np

    for fi in range(nf):
        f = <Py_ssize_t> feats[fi]
        for i in range(m):
            vals[i] = X[rows[i], f]
            labs[i] = y[rows[i]]
        order = np.argsort(vals_np, kind="stable")
        for i in range(m):
            svals[i] = vals[order[i]]
            slabs[i] = labs[order[i]]
        if svals[0] == svals[m - 1]:
            continue
        n1_left = 0.0
        for i in range(1, m):
            n1_left += <double> slabs[i - 1]
            if svals[i - 1] == svals[i]:
                continue
            nl = <double> i
            nr = total - nl
            gl = 1.0 - (n1_left / nl) ** 2 - ((nl - n1_left) / nl) ** 2
            gr = (1.0 - ((n1_total - n1_left) / nr) ** 2
                  - ((nr - (n1_total - n1_left)) / nr) ** 2)
            weighted = (nl * gl + nr * gr) / total
            if weighted < best_gini:
                best_gini = weighted
                best_feat = <long long> f
                best_thr = 0.5 * (svals[i - 1] + svals[i])
    return int(best_feat), float(best_thr), float(best_gini)


cdef inline double _sigmoid(double z) noexcept:
    if z > 30.0:
        z = 30.0
    elif z < -30.0:
        z = -30.0
    return 1.0 / (1.0 + exp(-z))


def logistic_sgd_epochs(double[:, ::1] X, double[::1] y01,
                        long long[:, ::1] order, double lr, double l2):
    """Per-sample log-loss SGD with L2; visit order given per epoch."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t epochs = order.shape[0]
    cdef Py_ssize_t e, i, j, s
    cdef double z, g

    w_np = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_np
    cdef double b = 0.0

    for e in range(epochs):
        for i in range(n):
            s = <Py_ssize_t> order[e, i]
            z = b
            for j in range(d):
                z += w[j] * X[s, j]
            g = _sigmoid(z) - y01[s]
            for j in range(d):
                w[j] -= lr * (g * X[s, j] + l2 * w[j])
            b -= lr * g
    return w_np, float(b)


def hinge_sgd_epochs(double[:, ::1] X, double[::1] ypm,
                     long long[:, ::1] order, double lr, double lam):
    """Per-sample sub-gradient descent on hinge loss with L2 penalty."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t epochs = order.shape[0]
    cdef Py_ssize_t e, i, j, s
    cdef double z, yv

    w_np = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_np
    cdef double b = 0.0

    for e in range(epochs):
        for i in range(n):
            s = <Py_ssize_t> order[e, i]
            yv = ypm[s]
            z = b
            for j in range(d):
                z += w[j] * X[s, j]
            if yv * z < 1.0:
                for j in range(d):
                    w[j] -= lr * (lam * w[j] - yv * X[s, j])
                b += lr * yv
            else:
                for j in range(d):
                    w[j] -= lr * lam * w[j]
    return w_np, float(b)
