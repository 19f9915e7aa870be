"""CART-style decision tree with Gini impurity and deterministic tie-breaks.

Candidate thresholds are midpoints of adjacent distinct sorted feature
values. A node splits while it is impure and splittable, even when the best
split has zero immediate Gini gain; with unlimited depth this drives any
consistent dataset to 100% training accuracy. Leaves predict the majority
class, ties going to the lowest class index.
"""

from __future__ import annotations

import numpy as np

from . import kernels


class DecisionTree:
    """Flat-array tree; feature[i] == -1 marks node i as a leaf."""

    def __init__(self, feature: np.ndarray, threshold: np.ndarray,
                 left: np.ndarray, right: np.ndarray, counts: np.ndarray,
                 n_classes: int, backend: str = "auto"):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.counts = counts  # per-node class histogram, int64 (n_nodes, k)
        self.n_classes = n_classes
        self.backend = backend

    @classmethod
    def build(cls, X: np.ndarray, y: np.ndarray, n_classes: int,
              max_depth: int | None = None, min_samples_split: int = 2,
              backend: str = "auto", max_features: int | None = None,
              rng: np.random.Generator | None = None,
              sample_idx: np.ndarray | None = None) -> "DecisionTree":
        """Grow a tree on X[sample_idx] (all rows when sample_idx is None).

        max_features, when set, draws that many feature candidates per split
        from rng (sorted ascending so scan order stays deterministic).
        """
        resolved = kernels.resolve_backend(backend)
        n_feat = X.shape[1]
        if sample_idx is None:
            sample_idx = np.arange(X.shape[0], dtype=np.int64)
        all_features = np.arange(n_feat, dtype=np.int64)
        subsample = max_features is not None and max_features < n_feat
        if subsample and rng is None:
            raise ValueError("max_features subsampling requires an rng")

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        counts: list[np.ndarray] = []

        # LIFO with right pushed first = preorder, left-first traversal;
        # rng draws therefore happen in a backend-independent order.
        stack: list[tuple[np.ndarray, int, int, bool]] = [(sample_idx, 0, -1, False)]
        while stack:
            idx, depth, parent, is_right = stack.pop()
            node_id = len(feature)
            if parent >= 0:
                if is_right:
                    right[parent] = node_id
                else:
                    left[parent] = node_id
            hist = np.bincount(y[idx], minlength=n_classes).astype(np.int64)
            counts.append(hist)
            pure = int((hist > 0).sum()) <= 1
            depth_capped = max_depth is not None and depth >= max_depth
            if pure or depth_capped or idx.shape[0] < min_samples_split:
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                continue
            if subsample:
                cand = np.sort(rng.choice(n_feat, size=max_features, replace=False))
                cand = cand.astype(np.int64)
            else:
                cand = all_features
            f, thr, _ = kernels.best_split(X, y, idx, cand, n_classes, resolved)
            if f < 0:
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                continue
            feature.append(f)
            threshold.append(thr)
            left.append(-1)
            right.append(-1)
            mask = X[idx, f] <= thr
            stack.append((idx[~mask], depth + 1, node_id, True))
            stack.append((idx[mask], depth + 1, node_id, False))

        return cls(
            np.asarray(feature, dtype=np.int64),
            np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int64),
            np.asarray(right, dtype=np.int64),
            np.vstack(counts),
            n_classes,
            backend,
        )

    def leaf_ids(self, X: np.ndarray) -> np.ndarray:
        resolved = kernels.resolve_backend(self.backend)
        return kernels.predict_leaf(self.feature, self.threshold, self.left,
                                    self.right, X, resolved)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.counts[self.leaf_ids(X)], axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        hist = self.counts[self.leaf_ids(X)].astype(np.float64)
        return hist / hist.sum(axis=1, keepdims=True)

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
            "n_classes": self.n_classes,
            "backend": self.backend,
        }

    @classmethod
    def from_payload(cls, d: dict) -> "DecisionTree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["counts"], dtype=np.int64),
            d["n_classes"],
            d.get("backend", "auto"),
        )
