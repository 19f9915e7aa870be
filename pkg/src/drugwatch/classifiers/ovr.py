"""One-vs-rest bundle for multi-label symptom prediction.

One binary model per symptom label, trained on presence/absence; a label
missing either polarity in the training data gets a constant-negative stub
and is listed in bundle.degenerate. Prediction keeps every label whose
positive probability reaches the decision threshold tau (inclusive).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..labels import SymptomVocabulary
from .base import ENVELOPE_VERSION, ModelSpec, TrainedModel, _as_matrix, _as_row, fit

NEGATIVE, POSITIVE = "absent", "present"


@dataclass(frozen=True)
class OvrBundle:
    members: tuple[TrainedModel | None, ...]  # None = constant-negative stub
    labels: tuple[str, ...]
    tau: float
    degenerate: tuple[str, ...]
    dim: int

    def __post_init__(self):
        if len(self.members) != len(self.labels):
            raise ValueError("one member slot per label required")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")
        for m in self.members:
            if m is not None and m.dim != self.dim:
                raise ValueError("all members must share the bundle feature dimension")


def _label_index_sets(Y: Sequence[Iterable], vocab: SymptomVocabulary) -> list[frozenset[int]]:
    out = []
    for row in Y:
        idxs = set()
        for s in row:
            idxs.add(vocab.index(s) if isinstance(s, str) else int(s))
        for i in idxs:
            if not 0 <= i < len(vocab):
                raise ValueError(f"symptom index {i} outside vocabulary")
        out.append(frozenset(idxs))
    return out


def ovr_fit(spec: ModelSpec, X, Y: Sequence[Iterable],
            vocab: SymptomVocabulary, tau: float = 0.5) -> OvrBundle:
    """Train one presence/absence model per vocabulary label.

    Y rows are symptom sets (label strings or vocabulary indices).
    """
    Xm = _as_matrix(X)
    sets = _label_index_sets(Y, vocab)
    if Xm.shape[0] != len(sets):
        raise ValueError("X and Y must be the same length")
    members: list[TrainedModel | None] = []
    degenerate: list[str] = []
    for j, label in enumerate(vocab.labels):
        yj = [POSITIVE if j in s else NEGATIVE for s in sets]
        n_pos = sum(1 for v in yj if v == POSITIVE)
        if n_pos == 0 or n_pos == len(yj):
            members.append(None)
            degenerate.append(label)
            continue
        members.append(fit(spec, Xm, yj, class_list=(NEGATIVE, POSITIVE)))
    return OvrBundle(tuple(members), vocab.labels, tau, tuple(degenerate),
                     Xm.shape[1])


def ovr_proba_matrix(bundle: OvrBundle, X: np.ndarray) -> np.ndarray:
    """(n, L) matrix of positive-class probabilities; stub columns are 0."""
    out = np.zeros((X.shape[0], len(bundle.labels)), dtype=np.float64)
    for j, member in enumerate(bundle.members):
        if member is not None:
            out[:, j] = member.predict_proba_matrix(X)[:, 1]
    return out


def ovr_predict_matrix(bundle: OvrBundle, X: np.ndarray) -> list[frozenset[int]]:
    proba = ovr_proba_matrix(bundle, X)
    return [frozenset(np.nonzero(row >= bundle.tau)[0].tolist()) for row in proba]


def ovr_predict_proba(bundle: OvrBundle, x) -> np.ndarray:
    return ovr_proba_matrix(bundle, _as_row(x, bundle.dim))[0]


def ovr_predict(bundle: OvrBundle, x) -> frozenset[int]:
    return ovr_predict_matrix(bundle, _as_row(x, bundle.dim))[0]


def save_bundle(bundle: OvrBundle, path: str) -> None:
    doc = {
        "version": ENVELOPE_VERSION,
        "kind": "ovr_bundle",
        "tau": bundle.tau,
        "labels": list(bundle.labels),
        "degenerate": list(bundle.degenerate),
        "dim": bundle.dim,
        "members": [None if m is None else m.to_dict() for m in bundle.members],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, ensure_ascii=False, sort_keys=True)


def load_bundle(path: str) -> OvrBundle:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("version") != ENVELOPE_VERSION or doc.get("kind") != "ovr_bundle":
        raise ValueError("not an ovr bundle file")
    members = tuple(None if m is None else TrainedModel.from_dict(m)
                    for m in doc["members"])
    return OvrBundle(members, tuple(doc["labels"]), doc["tau"],
                     tuple(doc["degenerate"]), doc["dim"])
