"""Model specs, the trained-model wrapper, and the JSON model envelope.

Every algorithm trains on a dense float64 matrix plus integer class ids and
is wrapped in a TrainedModel carrying the class list; ties always resolve to
the lowest class index, i.e. class-list order. Model files are a versioned
envelope {version, spec, class_list, payload} with an algorithm-specific
payload (kNN embeds its training vectors).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..features import SparseVector, to_matrix
from ..labels import DRUG_INDEX
from .forest import RandomForest
from .knn import KNearestNeighbors
from .logreg import LogisticRegression
from .naive_bayes import MultinomialNaiveBayes
from .tree import DecisionTree

ENVELOPE_VERSION = 1

ALGORITHMS = ("logistic_regression", "naive_bayes", "knn", "decision_tree",
              "random_forest")

# needs >= 2 distinct classes to fit
DISCRIMINATIVE = ("logistic_regression", "decision_tree", "random_forest")

_DEFAULTS: dict[str, dict] = {
    "logistic_regression": {"learning_rate": 0.1, "max_iters": 500,
                            "l2": 1e-4, "tol": 1e-6},
    "naive_bayes": {"alpha": 1.0},
    "knn": {"k": 5},
    "decision_tree": {"max_depth": None, "min_samples_split": 2,
                      "backend": "auto"},
    "random_forest": {"n_trees": 100, "max_features": "sqrt",
                      "bootstrap": True, "max_depth": None,
                      "min_samples_split": 2, "backend": "auto"},
}


def _validate_hp(algorithm: str, hp: dict) -> None:
    if algorithm == "logistic_regression":
        if hp["learning_rate"] <= 0:
            raise ValueError("learning_rate must be > 0")
        if hp["max_iters"] < 1:
            raise ValueError("max_iters must be >= 1")
        if hp["l2"] < 0:
            raise ValueError("l2 must be >= 0")
        if hp["tol"] < 0:
            raise ValueError("tol must be >= 0")
    elif algorithm == "naive_bayes":
        if hp["alpha"] <= 0:
            raise ValueError("alpha must be > 0")
    elif algorithm == "knn":
        if not isinstance(hp["k"], int) or hp["k"] < 1:
            raise ValueError("k must be an integer >= 1")
    else:
        if hp["max_depth"] is not None and hp["max_depth"] < 1:
            raise ValueError("max_depth must be >= 1 or unlimited (null)")
        if hp["min_samples_split"] < 2:
            raise ValueError("min_samples_split must be >= 2")
        if hp["backend"] not in ("auto", "numba", "numpy"):
            raise ValueError(f"unknown backend: {hp['backend']!r}")
        if algorithm == "random_forest":
            if hp["n_trees"] < 1:
                raise ValueError("n_trees must be >= 1")
            mf = hp["max_features"]
            if mf not in ("sqrt", "all") and (not isinstance(mf, int) or mf < 1):
                raise ValueError("max_features must be 'sqrt', 'all', or an int >= 1")


@dataclass(frozen=True)
class ModelSpec:
    """Algorithm choice + hyperparameter overrides + seed.

    Unset hyperparameters take documented defaults; resolved() returns the
    merged, validated dict.
    """

    algorithm: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm: {self.algorithm!r}")
        unknown = set(self.hyperparameters) - set(_DEFAULTS[self.algorithm])
        if unknown:
            raise ValueError(
                f"unknown hyperparameters for {self.algorithm}: {sorted(unknown)}"
            )
        self.resolved()

    def resolved(self) -> dict:
        hp = dict(_DEFAULTS[self.algorithm])
        hp.update(self.hyperparameters)
        _validate_hp(self.algorithm, hp)
        return hp

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm,
                "hyperparameters": self.resolved(), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(algorithm=d["algorithm"],
                   hyperparameters=dict(d.get("hyperparameters", {})),
                   seed=d.get("seed", 0))


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, np.ndarray):
        return np.ascontiguousarray(X, dtype=np.float64)
    return to_matrix(list(X))


def _as_row(x, dim: int) -> np.ndarray:
    if isinstance(x, SparseVector):
        if x.dim != dim:
            raise ValueError(f"dimension mismatch: vector dim {x.dim}, model dim {dim}")
        return x.to_dense()[np.newaxis, :]
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: vector shape {arr.shape}, model dim {dim}")
    return arr[np.newaxis, :]


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    class_list: tuple[str, ...]
    impl: object
    dim: int

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.dim:
            raise ValueError(
                f"dimension mismatch: matrix has {X.shape[1]} columns, model dim {self.dim}"
            )
        return self.impl.predict(np.ascontiguousarray(X, dtype=np.float64))

    def predict_proba_matrix(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.dim:
            raise ValueError(
                f"dimension mismatch: matrix has {X.shape[1]} columns, model dim {self.dim}"
            )
        return self.impl.predict_proba(np.ascontiguousarray(X, dtype=np.float64))

    def predict(self, x) -> str:
        idx = int(self.predict_matrix(_as_row(x, self.dim))[0])
        return self.class_list[idx]

    def predict_proba(self, x) -> np.ndarray:
        return self.predict_proba_matrix(_as_row(x, self.dim))[0]

    def predict_many(self, xs: Sequence) -> list[str]:
        X = _as_matrix(xs)
        return [self.class_list[int(i)] for i in self.predict_matrix(X)]

    def to_dict(self) -> dict:
        payload = self.impl.to_payload()
        payload["dim"] = self.dim
        return {"version": ENVELOPE_VERSION, "spec": self.spec.to_dict(),
                "class_list": list(self.class_list), "payload": payload}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("version") != ENVELOPE_VERSION:
            raise ValueError(f"unsupported model envelope version: {d.get('version')!r}")
        spec = ModelSpec.from_dict(d["spec"])
        impl_cls = _IMPLS[spec.algorithm]
        payload = d["payload"]
        return cls(spec=spec, class_list=tuple(d["class_list"]),
                   impl=impl_cls.from_payload(payload), dim=payload["dim"])


_IMPLS = {
    "logistic_regression": LogisticRegression,
    "naive_bayes": MultinomialNaiveBayes,
    "knn": KNearestNeighbors,
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
}


def _default_class_list(y: Sequence[str]) -> tuple[str, ...]:
    present = set(y)
    if present <= set(DRUG_INDEX):
        return tuple(sorted(present, key=DRUG_INDEX.__getitem__))
    return tuple(sorted(present))


def fit(spec: ModelSpec, X, y: Sequence[str],
        class_list: Sequence[str] | None = None) -> TrainedModel:
    """Train spec.algorithm on (X, y); y entries are class-name strings.

    class_list fixes the class order (ties break toward its start); when
    omitted it is the observed classes in drug-class order, alphabetical for
    non-drug labels.
    """
    Xm = _as_matrix(X)
    if Xm.shape[0] != len(y) or len(y) == 0:
        raise ValueError("X and y must be the same non-zero length")
    classes = tuple(class_list) if class_list is not None else _default_class_list(y)
    index = {c: i for i, c in enumerate(classes)}
    unknown = [c for c in y if c not in index]
    if unknown:
        raise ValueError(f"labels not in class list: {sorted(set(unknown))[:5]}")
    if spec.algorithm in DISCRIMINATIVE and len(set(y)) < 2:
        raise ValueError(f"{spec.algorithm} requires >= 2 distinct classes")
    yi = np.asarray([index[c] for c in y], dtype=np.int64)
    n_classes = len(classes)
    hp = spec.resolved()

    if spec.algorithm == "logistic_regression":
        impl = LogisticRegression.fit(Xm, yi, n_classes, **hp)
    elif spec.algorithm == "naive_bayes":
        impl = MultinomialNaiveBayes.fit(Xm, yi, n_classes, alpha=hp["alpha"])
    elif spec.algorithm == "knn":
        impl = KNearestNeighbors.fit(Xm, yi, n_classes, k=hp["k"])
    elif spec.algorithm == "decision_tree":
        impl = DecisionTree.build(Xm, yi, n_classes, max_depth=hp["max_depth"],
                                  min_samples_split=hp["min_samples_split"],
                                  backend=hp["backend"])
    else:
        impl = RandomForest.build(Xm, yi, n_classes, n_trees=hp["n_trees"],
                                  max_features=hp["max_features"],
                                  bootstrap=hp["bootstrap"],
                                  max_depth=hp["max_depth"],
                                  min_samples_split=hp["min_samples_split"],
                                  backend=hp["backend"], seed=spec.seed)
    return TrainedModel(spec=spec, class_list=classes, impl=impl, dim=Xm.shape[1])


def save_model(model: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, ensure_ascii=False, sort_keys=True)


def load_model(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as f:
        return TrainedModel.from_dict(json.load(f))
