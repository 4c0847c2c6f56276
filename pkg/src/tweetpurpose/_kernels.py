"""Numeric inner loops of the linear SVM.

Each kernel exists twice: an explicit-loop version compiled with numba and
a numpy version used when numba is missing or when the environment variable
``TWEETPURPOSE_DISABLE_NUMBA`` is set to ``1``/``true``/``yes``.  Both run the
same algorithm with the same shuffling stream; they differ only in
floating-point summation order.

Matrices are passed as raw CSR arrays ``(indptr, indices, data)`` with
sorted, duplicate-free column indices per row.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "TWEETPURPOSE_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numba_requested() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


USE_NUMBA = numba is not None and _numba_requested()

# 31-bit LCG; products stay below 2**62 so int64 and Python ints agree.
LCG_MUL = 1103515245
LCG_INC = 12345
LCG_MOD = 2147483648


# --------------------------------------------------------------------------
# loop versions (numba targets)


def _dual_cd_loops(indptr, indices, data, y, C, tol, max_iter, seed, n_features):
    n = y.shape[0]
    w = np.zeros(n_features + 1)
    alpha = np.zeros(n)
    qd = np.empty(n)
    for i in range(n):
        sq = 1.0
        for p in range(indptr[i], indptr[i + 1]):
            sq += data[p] * data[p]
        qd[i] = sq
    order = np.arange(n)
    state = seed % LCG_MOD
    n_iter = 0
    for it in range(max_iter):
        n_iter = it + 1
        for s in range(n - 1, 0, -1):
            state = (state * LCG_MUL + LCG_INC) % LCG_MOD
            j = state % (s + 1)
            tmp = order[s]
            order[s] = order[j]
            order[j] = tmp
        pg_max = -np.inf
        pg_min = np.inf
        for s in range(n):
            i = order[s]
            g = w[n_features]
            for p in range(indptr[i], indptr[i + 1]):
                g += w[indices[p]] * data[p]
            g = y[i] * g - 1.0
            pg = 0.0
            if alpha[i] == 0.0:
                if g < 0.0:
                    pg = g
            elif alpha[i] == C:
                if g > 0.0:
                    pg = g
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if pg != 0.0:
                old = alpha[i]
                a = old - g / qd[i]
                if a < 0.0:
                    a = 0.0
                elif a > C:
                    a = C
                alpha[i] = a
                d = (a - old) * y[i]
                if d != 0.0:
                    for p in range(indptr[i], indptr[i + 1]):
                        w[indices[p]] += d * data[p]
                    w[n_features] += d
        if pg_max - pg_min <= tol:
            break
    return w, alpha, n_iter


def _decision_loops(indptr, indices, data, weights, biases):
    n = indptr.shape[0] - 1
    k = biases.shape[0]
    out = np.empty((n, k))
    for i in range(n):
        for c in range(k):
            s = biases[c]
            for p in range(indptr[i], indptr[i + 1]):
                s += weights[c, indices[p]] * data[p]
            out[i, c] = s
    return out


# --------------------------------------------------------------------------
# numpy versions


def _dual_cd_numpy(indptr, indices, data, y, C, tol, max_iter, seed, n_features):
    n = y.shape[0]
    w = np.zeros(n_features + 1)
    alpha = np.zeros(n)
    rows = [(indices[indptr[i] : indptr[i + 1]], data[indptr[i] : indptr[i + 1]]) for i in range(n)]
    qd = np.array([1.0 + val @ val for _, val in rows])
    order = np.arange(n)
    state = int(seed) % LCG_MOD
    n_iter = 0
    for it in range(max_iter):
        n_iter = it + 1
        for s in range(n - 1, 0, -1):
            state = (state * LCG_MUL + LCG_INC) % LCG_MOD
            j = state % (s + 1)
            order[s], order[j] = order[j], order[s]
        pg_max = -np.inf
        pg_min = np.inf
        for i in order:
            idx, val = rows[i]
            g = y[i] * (w[n_features] + w[idx] @ val) - 1.0
            a_i = alpha[i]
            if a_i == 0.0:
                pg = min(g, 0.0)
            elif a_i == C:
                pg = max(g, 0.0)
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0:
                a = min(max(a_i - g / qd[i], 0.0), C)
                alpha[i] = a
                d = (a - a_i) * y[i]
                if d != 0.0:
                    w[idx] += d * val
                    w[n_features] += d
        if pg_max - pg_min <= tol:
            break
    return w, alpha, n_iter


def _decision_numpy(indptr, indices, data, weights, biases):
    n = indptr.shape[0] - 1
    out = np.tile(biases, (n, 1)).astype(np.float64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    np.add.at(out, rows, data[:, None] * weights[:, indices].T)
    return out


if USE_NUMBA:
    dual_cd_jit = numba.njit(cache=True, nogil=True)(_dual_cd_loops)
    decision_jit = numba.njit(cache=True, nogil=True)(_decision_loops)
    dual_cd = dual_cd_jit
    decision = decision_jit
else:
    dual_cd_jit = decision_jit = None
    dual_cd = _dual_cd_numpy
    decision = _decision_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
