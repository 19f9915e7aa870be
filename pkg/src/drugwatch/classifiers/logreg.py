"""Multinomial logistic regression trained by full-batch gradient descent.

Loss is mean cross-entropy plus (l2/2)*||W||^2 over the weight matrix only
(bias excluded from the penalty). Weights start at zero, so training is
deterministic and independent of any seed. loss_and_grad is exposed
separately so the analytic gradient can be checked against finite
differences.
"""

from __future__ import annotations

import numpy as np


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(W: np.ndarray, b: np.ndarray, X: np.ndarray,
                  y: np.ndarray, l2: float):
    """Mean cross-entropy + L2 penalty, with gradients wrt W (d,k) and b (k,)."""
    n = X.shape[0]
    P = softmax(X @ W + b)
    eps = 1e-15  # clip so a saturated softmax cannot produce log(0)
    ll = -np.log(np.clip(P[np.arange(n), y], eps, None)).mean()
    loss = ll + 0.5 * l2 * float((W * W).sum())
    G = P.copy()
    G[np.arange(n), y] -= 1.0
    gW = X.T @ G / n + l2 * W
    gb = G.mean(axis=0)
    return loss, gW, gb


class LogisticRegression:
    def __init__(self, W: np.ndarray, b: np.ndarray):
        self.W = W
        self.b = b

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, n_classes: int,
            learning_rate: float = 0.1, max_iters: int = 500,
            l2: float = 1e-4, tol: float = 1e-6) -> "LogisticRegression":
        d = X.shape[1]
        W = np.zeros((d, n_classes), dtype=np.float64)
        b = np.zeros(n_classes, dtype=np.float64)
        prev = np.inf
        for _ in range(max_iters):
            loss, gW, gb = loss_and_grad(W, b, X, y, l2)
            W -= learning_rate * gW
            b -= learning_rate * gb
            if abs(prev - loss) < tol:
                break
            prev = loss
        return cls(W, b)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(X @ self.W + self.b)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_payload(self) -> dict:
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_payload(cls, d: dict) -> "LogisticRegression":
        return cls(np.asarray(d["W"], dtype=np.float64),
                   np.asarray(d["b"], dtype=np.float64))
