"""TF-IDF feature extraction over stemmed token lists.

idf(t) = ln((1 + N) / (1 + df(t))) + 1 with raw term counts for tf, then
L2 normalization per document. Vocabulary is fit on training docs only;
column indices follow lexicographic token order so the mapping is invariant
to document order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SparseVector:
    """Sorted-index sparse row; indices strictly increasing, values nonzero."""

    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices/values length mismatch")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if self.indices and not 0 <= self.indices[-1] < self.dim:
            raise ValueError("index out of range")

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        if self.indices:
            out[list(self.indices)] = self.values
        return out


def to_matrix(rows: Sequence[SparseVector]) -> np.ndarray:
    """Stack sparse rows into a dense (n_docs, dim) float64 matrix."""
    if not rows:
        return np.zeros((0, 0), dtype=np.float64)
    dim = rows[0].dim
    if any(r.dim != dim for r in rows):
        raise ValueError("rows have mixed dimensionality")
    out = np.zeros((len(rows), dim), dtype=np.float64)
    for i, r in enumerate(rows):
        if r.indices:
            out[i, list(r.indices)] = r.values
    return out


@dataclass(frozen=True)
class TfidfParams:
    min_df: int = 2
    max_features: int | None = None

    def __post_init__(self):
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1 when set")


class TfidfModel:
    """Fitted vocabulary + document frequencies; transform is stateless after fit."""

    def __init__(self, params: TfidfParams, vocab: dict[str, int],
                 df: dict[str, int], n_docs: int):
        self.params = params
        self.vocab = vocab
        self.df = df
        self.n_docs = n_docs
        self._idf = {
            t: math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in vocab
        }

    @property
    def dim(self) -> int:
        return len(self.vocab)

    def idf_of(self, token: str) -> float:
        """The fitted idf weight for a vocabulary token."""
        return self._idf[token]

    @classmethod
    def fit(cls, docs: Sequence[Sequence[str]], params: TfidfParams = TfidfParams()) -> "TfidfModel":
        n_docs = len(docs)
        df: dict[str, int] = {}
        for doc in docs:
            for t in set(doc):
                df[t] = df.get(t, 0) + 1
        kept = [t for t, c in df.items() if c >= params.min_df]
        if params.max_features is not None and len(kept) > params.max_features:
            # highest-df terms survive; ties broken by token ascending
            kept.sort(key=lambda t: (-df[t], t))
            kept = kept[: params.max_features]
        kept.sort()
        vocab = {t: i for i, t in enumerate(kept)}
        return cls(params, vocab, {t: df[t] for t in kept}, n_docs)

    def transform(self, doc: Sequence[str]) -> SparseVector:
        counts: dict[int, float] = {}
        for t in doc:
            j = self.vocab.get(t)
            if j is not None:
                counts[j] = counts.get(j, 0.0) + 1.0
        if not counts:
            return SparseVector((), (), self.dim)
        idf_by_index = self._idf_by_index
        items = sorted((j, c * idf_by_index[j]) for j, c in counts.items())
        norm = math.sqrt(sum(v * v for _, v in items))
        return SparseVector(
            tuple(j for j, _ in items),
            tuple(v / norm for _, v in items),
            self.dim,
        )

    @property
    def _idf_by_index(self) -> dict[int, float]:
        cached = getattr(self, "_idf_idx_cache", None)
        if cached is None:
            cached = {self.vocab[t]: w for t, w in self._idf.items()}
            self._idf_idx_cache = cached
        return cached

    def transform_many(self, docs: Sequence[Sequence[str]]) -> list[SparseVector]:
        return [self.transform(d) for d in docs]

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "params": {"min_df": self.params.min_df,
                       "max_features": self.params.max_features},
            "vocab": [[t, self.vocab[t], self.df[t]] for t in sorted(self.vocab)],
            "n_docs": self.n_docs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported tfidf format version: {d.get('version')!r}")
        params = TfidfParams(min_df=d["params"]["min_df"],
                             max_features=d["params"]["max_features"])
        vocab = {t: i for t, i, _ in d["vocab"]}
        df = {t: c for t, _, c in d["vocab"]}
        return cls(params, vocab, df, d["n_docs"])

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "TfidfModel":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))
