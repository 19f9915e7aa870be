"""Random forest: bagged decision trees with per-split feature subsampling.

Per-tree RNG streams come from numpy SeedSequence spawning, so the forest is
reproducible for a fixed seed regardless of how many trees run. Prediction
aggregates tree votes; predict_proba is the vote fraction per class.
"""

from __future__ import annotations

import math

import numpy as np

from .tree import DecisionTree


def _resolve_max_features(mode, n_feat: int) -> int | None:
    if mode in (None, "all"):
        return None
    if mode == "sqrt":
        return max(1, int(math.sqrt(n_feat)))
    m = int(mode)
    if m < 1:
        raise ValueError("max_features must be >= 1")
    return None if m >= n_feat else m


class RandomForest:
    def __init__(self, trees: list[DecisionTree], n_classes: int):
        self.trees = trees
        self.n_classes = n_classes

    @classmethod
    def build(cls, X: np.ndarray, y: np.ndarray, n_classes: int,
              n_trees: int = 100, max_features="sqrt", bootstrap: bool = True,
              max_depth: int | None = None, min_samples_split: int = 2,
              backend: str = "auto", seed: int = 0) -> "RandomForest":
        n = X.shape[0]
        m = _resolve_max_features(max_features, X.shape[1])
        children = np.random.SeedSequence(seed).spawn(n_trees)
        trees = []
        for t in range(n_trees):
            rng = np.random.default_rng(children[t])
            idx = (rng.integers(0, n, size=n).astype(np.int64) if bootstrap
                   else np.arange(n, dtype=np.int64))
            trees.append(DecisionTree.build(
                X, y, n_classes, max_depth=max_depth,
                min_samples_split=min_samples_split, backend=backend,
                max_features=m, rng=rng, sample_idx=idx))
        return cls(trees, n_classes)

    def _votes(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, tree.predict(X)] += 1
        return votes

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self._votes(X), axis=1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self._votes(X) / float(len(self.trees))

    def to_payload(self) -> dict:
        return {"n_classes": self.n_classes,
                "trees": [t.to_payload() for t in self.trees]}

    @classmethod
    def from_payload(cls, d: dict) -> "RandomForest":
        return cls([DecisionTree.from_payload(t) for t in d["trees"]],
                   d["n_classes"])
