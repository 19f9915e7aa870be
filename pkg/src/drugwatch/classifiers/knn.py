"""k-nearest-neighbors with cosine distance over L2-normalized vectors.

Fit just stores the training data. Distance is 1 - dot product after row
normalization (zero rows stay zero, giving distance 1 to everything).
Neighbor ties at equal distance resolve to the lower training index via a
stable argsort; vote ties resolve to the lowest class index.
"""

from __future__ import annotations

import numpy as np


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return X / safe


class KNearestNeighbors:
    def __init__(self, X: np.ndarray, y: np.ndarray, n_classes: int, k: int):
        self.X = _normalize_rows(np.asarray(X, dtype=np.float64))
        self.y = np.asarray(y, dtype=np.int64)
        self.n_classes = n_classes
        self.k = k

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, n_classes: int,
            k: int = 5) -> "KNearestNeighbors":
        return cls(X, y, n_classes, k)

    def _neighbor_labels(self, X: np.ndarray) -> np.ndarray:
        k = min(self.k, self.X.shape[0])
        dist = 1.0 - _normalize_rows(np.asarray(X, dtype=np.float64)) @ self.X.T
        order = np.argsort(dist, axis=1, kind="mergesort")[:, :k]
        return self.y[order]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        labels = self._neighbor_labels(X)
        k = labels.shape[1]
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.float64)
        for i in range(labels.shape[0]):
            votes[i] = np.bincount(labels[i], minlength=self.n_classes)
        return votes / k

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_payload(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(),
                "n_classes": self.n_classes, "k": self.k}

    @classmethod
    def from_payload(cls, d: dict) -> "KNearestNeighbors":
        return cls(np.asarray(d["X"], dtype=np.float64),
                   np.asarray(d["y"], dtype=np.int64),
                   d["n_classes"], d["k"])
