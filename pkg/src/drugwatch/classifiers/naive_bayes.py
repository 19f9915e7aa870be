"""Multinomial naive Bayes with Laplace smoothing.

Feature values act as (possibly fractional) event counts, so TF-IDF weights
work directly. Posteriors are normalized in log space; a zero vector falls
back to the class priors.
"""

from __future__ import annotations

import numpy as np


class MultinomialNaiveBayes:
    def __init__(self, log_prior: np.ndarray, log_lik: np.ndarray):
        self.log_prior = log_prior  # (k,)
        self.log_lik = log_lik  # (k, d)

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, n_classes: int,
            alpha: float = 1.0) -> "MultinomialNaiveBayes":
        if np.any(X < 0):
            raise ValueError("multinomial NB requires non-negative features")
        n, d = X.shape
        counts = np.zeros((n_classes, d), dtype=np.float64)
        class_n = np.zeros(n_classes, dtype=np.float64)
        for c in range(n_classes):
            mask = y == c
            class_n[c] = mask.sum()
            counts[c] = X[mask].sum(axis=0)
        if np.any(class_n == 0):
            raise ValueError("every class must appear in the training data")
        log_prior = np.log(class_n / n)
        log_lik = np.log((counts + alpha)
                         / (counts.sum(axis=1, keepdims=True) + alpha * d))
        return cls(log_prior, log_lik)

    def log_posterior(self, X: np.ndarray) -> np.ndarray:
        scores = self.log_prior + X @ self.log_lik.T
        m = scores.max(axis=1, keepdims=True)
        return scores - (m + np.log(np.exp(scores - m).sum(axis=1, keepdims=True)))

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.exp(self.log_posterior(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.log_posterior(X), axis=1)

    def to_payload(self) -> dict:
        return {"log_prior": self.log_prior.tolist(),
                "log_lik": self.log_lik.tolist()}

    @classmethod
    def from_payload(cls, d: dict) -> "MultinomialNaiveBayes":
        return cls(np.asarray(d["log_prior"], dtype=np.float64),
                   np.asarray(d["log_lik"], dtype=np.float64))
