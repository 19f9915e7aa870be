"""From-scratch classifiers: LR, NB, kNN, decision tree, random forest,
plus the one-vs-rest bundle for multi-label symptom prediction."""

from .base import (ALGORITHMS, ENVELOPE_VERSION, ModelSpec, TrainedModel, fit,
                   load_model, save_model)
from .forest import RandomForest
from .knn import KNearestNeighbors
from .logreg import LogisticRegression, loss_and_grad, softmax
from .naive_bayes import MultinomialNaiveBayes
from .ovr import (OvrBundle, load_bundle, ovr_fit, ovr_predict,
                  ovr_predict_matrix, ovr_predict_proba, ovr_proba_matrix,
                  save_bundle)
from .tree import DecisionTree

__all__ = [
    "ALGORITHMS", "ENVELOPE_VERSION", "ModelSpec", "TrainedModel", "fit",
    "load_model", "save_model", "RandomForest", "KNearestNeighbors",
    "LogisticRegression", "loss_and_grad", "softmax",
    "MultinomialNaiveBayes", "OvrBundle", "load_bundle", "ovr_fit",
    "ovr_predict", "ovr_predict_matrix", "ovr_predict_proba",
    "ovr_proba_matrix", "save_bundle", "DecisionTree",
]
