"""Hot kernels for decision-tree building and traversal.

Two interchangeable backends: numba @njit kernels and pure-numpy fallbacks.
Selection defaults to numba when importable and not disabled via the
DRUGWATCH_NUMBA env var ("0"/"false"/"off"/"no" disable it). Both paths are
bitwise-identical: split scores are computed from exact int64 class counts
with the same float64 divisions, and ties resolve to the first candidate in
scan order (features ascending, thresholds ascending).

The split objective maximizes sum_side(S_side / n_side) where S = sum over
classes of count^2, which is equivalent to minimizing the children's
sample-weighted Gini impurity.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install-time choice
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def numba_enabled() -> bool:
    if not HAS_NUMBA:
        return False
    flag = os.environ.get("DRUGWATCH_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


def resolve_backend(name: str = "auto") -> str:
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return "numba"
    if name == "auto":
        return "numba" if numba_enabled() else "numpy"
    raise ValueError(f"unknown backend: {name!r}")


def best_split_numpy(X: np.ndarray, y: np.ndarray, sample_idx: np.ndarray,
                     feature_idx: np.ndarray, n_classes: int):
    """Best (feature, threshold, score) over the given samples and features.

    Returns feature -1 when no feature has two distinct values. Thresholds
    are midpoints of adjacent distinct sorted values, clamped down to the
    lower value when the midpoint rounds up to the upper one.
    """
    n = sample_idx.shape[0]
    best_f = -1
    best_thr = 0.0
    best_score = -np.inf
    if n < 2:
        return best_f, best_thr, best_score
    ysub = y[sample_idx]
    rows = np.arange(n)
    n_l = np.arange(1, n, dtype=np.int64)
    n_r = n - n_l
    for f in feature_idx:
        v = X[sample_idx, f]
        order = np.argsort(v, kind="mergesort")
        sv = v[order]
        valid = sv[:-1] < sv[1:]
        if not valid.any():
            continue
        sc = ysub[order]
        onehot = np.zeros((n, n_classes), dtype=np.int64)
        onehot[rows, sc] = 1
        left = np.cumsum(onehot, axis=0)
        tot = left[-1]
        right = tot[np.newaxis, :] - left
        s_l = np.sum(left * left, axis=1)[:-1]
        s_r = np.sum(right * right, axis=1)[:-1]
        score = s_l / n_l + s_r / n_r
        score[~valid] = -np.inf
        i = int(np.argmax(score))
        s = float(score[i])
        if s > best_score:
            thr = (sv[i] + sv[i + 1]) / 2.0
            if thr >= sv[i + 1]:
                thr = float(sv[i])
            best_f = int(f)
            best_thr = float(thr)
            best_score = s
    return best_f, best_thr, best_score


@njit(cache=True)
def _best_split_nb(X, y, sample_idx, feature_idx, n_classes):  # pragma: no cover
    n = sample_idx.shape[0]
    best_f = -1
    best_thr = 0.0
    best_score = -np.inf
    if n < 2:
        return best_f, best_thr, best_score
    vals = np.empty(n, dtype=np.float64)
    sv = np.empty(n, dtype=np.float64)
    sc = np.empty(n, dtype=np.int64)
    left = np.empty(n_classes, dtype=np.int64)
    right = np.empty(n_classes, dtype=np.int64)
    for fi in range(feature_idx.shape[0]):
        f = feature_idx[fi]
        for i in range(n):
            vals[i] = X[sample_idx[i], f]
        order = np.argsort(vals, kind="mergesort")
        for i in range(n):
            sv[i] = vals[order[i]]
            sc[i] = y[sample_idx[order[i]]]
        if sv[0] == sv[n - 1]:
            continue
        for j in range(n_classes):
            left[j] = 0
            right[j] = 0
        for i in range(n):
            right[sc[i]] += 1
        s_l = np.int64(0)
        s_r = np.int64(0)
        for j in range(n_classes):
            s_r += right[j] * right[j]
        for i in range(n - 1):
            c = sc[i]
            s_l += 2 * left[c] + 1
            left[c] += 1
            s_r += 1 - 2 * right[c]
            right[c] -= 1
            if sv[i] < sv[i + 1]:
                score = s_l / (i + 1) + s_r / (n - i - 1)
                if score > best_score:
                    thr = (sv[i] + sv[i + 1]) / 2.0
                    if thr >= sv[i + 1]:
                        thr = sv[i]
                    best_f = f
                    best_thr = thr
                    best_score = score
    return best_f, best_thr, best_score


def best_split_numba(X, y, sample_idx, feature_idx, n_classes):
    if not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    f, thr, score = _best_split_nb(X, y, sample_idx, feature_idx, n_classes)
    return int(f), float(thr), float(score)


def predict_leaf_numpy(feature: np.ndarray, threshold: np.ndarray,
                       left: np.ndarray, right: np.ndarray,
                       X: np.ndarray) -> np.ndarray:
    """Route every row of X to its leaf; returns leaf node ids."""
    n = X.shape[0]
    nodes = np.zeros(n, dtype=np.int64)
    while True:
        f = feature[nodes]
        mask = f >= 0
        if not mask.any():
            return nodes
        rows = np.nonzero(mask)[0]
        cur = nodes[rows]
        vals = X[rows, feature[cur]]
        go_left = vals <= threshold[cur]
        nodes[rows] = np.where(go_left, left[cur], right[cur])


@njit(cache=True)
def _predict_leaf_nb(feature, threshold, left, right, X):  # pragma: no cover
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def predict_leaf_numba(feature, threshold, left, right, X):
    if not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    return _predict_leaf_nb(feature, threshold, left, right, X)


def best_split(X, y, sample_idx, feature_idx, n_classes, backend: str):
    if backend == "numba":
        return best_split_numba(X, y, sample_idx, feature_idx, n_classes)
    return best_split_numpy(X, y, sample_idx, feature_idx, n_classes)


def predict_leaf(feature, threshold, left, right, X, backend: str):
    if backend == "numba":
        return predict_leaf_numba(feature, threshold, left, right, X)
    return predict_leaf_numpy(feature, threshold, left, right, X)
