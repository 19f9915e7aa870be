"""Evaluation metrics: one-vs-rest confusion counts, precision/recall/F1
with micro/macro/weighted aggregates, multi-label extras (subset accuracy,
Hamming loss), and Fleiss' kappa with banded interpretation.

Zero-denominator conventions, applied throughout: precision and recall are 0
when their denominator is 0, and F1 is 0 when P + R = 0. These affect macro
averages on rare classes, so they are part of the contract, not a footnote.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Sequence

import numpy as np

from .labels import SymptomVocabulary


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_counts(gold: Sequence, pred: Sequence, target) -> ConfusionCounts:
    """One-vs-rest counts for the target class."""
    if len(gold) != len(pred):
        raise ValueError("gold and pred must be the same length")
    tp = fp = tn = fn = 0
    for g, p in zip(gold, pred):
        if p == target:
            if g == target:
                tp += 1
            else:
                fp += 1
        elif g == target:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def precision(c: ConfusionCounts) -> float:
    denom = c.tp + c.fp
    return c.tp / denom if denom else 0.0


def recall(c: ConfusionCounts) -> float:
    denom = c.tp + c.fn
    return c.tp / denom if denom else 0.0


def f1(c: ConfusionCounts) -> float:
    p, r = precision(c), recall(c)
    return 2 * p * r / (p + r) if p + r else 0.0


def accuracy(c: ConfusionCounts) -> float:
    return (c.tp + c.tn) / c.total if c.total else 0.0


@dataclass(frozen=True)
class EvalReport:
    task: str  # "multiclass" or "multilabel"
    classes: tuple[str, ...]
    per_class: dict  # class -> {precision, recall, f1, accuracy, support}
    micro: dict  # {precision, recall, f1}
    macro: dict
    weighted: dict
    accuracy: float
    n: int
    subset_accuracy: float | None = None
    hamming_loss: float | None = None

    def to_dict(self) -> dict:
        d = {
            "task": self.task,
            "classes": list(self.classes),
            "per_class": {c: dict(v) for c, v in self.per_class.items()},
            "micro": dict(self.micro),
            "macro": dict(self.macro),
            "weighted": dict(self.weighted),
            "accuracy": self.accuracy,
            "n": self.n,
        }
        if self.task == "multilabel":
            d["subset_accuracy"] = self.subset_accuracy
            d["hamming_loss"] = self.hamming_loss
        return d


def _aggregate(counts: dict[str, ConfusionCounts]) -> tuple[dict, dict, dict]:
    micro_c = ConfusionCounts(
        tp=sum(c.tp for c in counts.values()),
        fp=sum(c.fp for c in counts.values()),
        tn=sum(c.tn for c in counts.values()),
        fn=sum(c.fn for c in counts.values()),
    )
    micro = {"precision": precision(micro_c), "recall": recall(micro_c),
             "f1": f1(micro_c)}
    ks = list(counts)
    macro = {
        "precision": sum(precision(counts[c]) for c in ks) / len(ks),
        "recall": sum(recall(counts[c]) for c in ks) / len(ks),
        "f1": sum(f1(counts[c]) for c in ks) / len(ks),
    }
    supports = {c: counts[c].tp + counts[c].fn for c in ks}
    total = sum(supports.values())
    if total:
        weighted = {
            m: sum(supports[c] * fn_(counts[c]) for c in ks) / total
            for m, fn_ in (("precision", precision), ("recall", recall), ("f1", f1))
        }
    else:
        weighted = {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    return micro, macro, weighted


def evaluate_multiclass(gold: Sequence[str], pred: Sequence[str],
                        classes: Sequence[str]) -> EvalReport:
    if len(gold) != len(pred):
        raise ValueError("gold and pred must be the same length")
    if not gold:
        raise ValueError("nothing to evaluate")
    counts = {c: confusion_counts(gold, pred, c) for c in classes}
    micro, macro, weighted = _aggregate(counts)
    per_class = {
        c: {"precision": precision(counts[c]), "recall": recall(counts[c]),
            "f1": f1(counts[c]), "accuracy": accuracy(counts[c]),
            "support": counts[c].tp + counts[c].fn}
        for c in classes
    }
    acc = sum(1 for g, p in zip(gold, pred) if g == p) / len(gold)
    return EvalReport(task="multiclass", classes=tuple(classes),
                      per_class=per_class, micro=micro, macro=macro,
                      weighted=weighted, accuracy=acc, n=len(gold))


def _index_sets(rows: Sequence[AbstractSet], vocab: SymptomVocabulary) -> list[frozenset[int]]:
    out = []
    for row in rows:
        s = set()
        for v in row:
            i = vocab.index(v) if isinstance(v, str) else int(v)
            if not 0 <= i < len(vocab):
                raise ValueError(f"symptom index {i} outside vocabulary")
            s.add(i)
        out.append(frozenset(s))
    return out


def evaluate_multilabel(gold: Sequence[AbstractSet], pred: Sequence[AbstractSet],
                        vocab: SymptomVocabulary) -> EvalReport:
    """Per-label binary metrics over the indicator matrix, plus subset
    accuracy and Hamming loss. The accuracy field is cell-level (micro)
    accuracy, i.e. 1 - hamming_loss."""
    if len(gold) != len(pred):
        raise ValueError("gold and pred must be the same length")
    if not gold:
        raise ValueError("nothing to evaluate")
    g = _index_sets(gold, vocab)
    p = _index_sets(pred, vocab)
    n, L = len(g), len(vocab)
    counts: dict[str, ConfusionCounts] = {}
    for j, label in enumerate(vocab.labels):
        gj = [j in s for s in g]
        pj = [j in s for s in p]
        counts[label] = confusion_counts(gj, pj, True)
    micro, macro, weighted = _aggregate(counts)
    per_class = {
        c: {"precision": precision(counts[c]), "recall": recall(counts[c]),
            "f1": f1(counts[c]), "accuracy": accuracy(counts[c]),
            "support": counts[c].tp + counts[c].fn}
        for c in vocab.labels
    }
    subset = sum(1 for a, b in zip(g, p) if a == b) / n
    wrong_cells = sum(len(a ^ b) for a, b in zip(g, p))
    hamming = wrong_cells / (n * L)
    return EvalReport(task="multilabel", classes=vocab.labels,
                      per_class=per_class, micro=micro, macro=macro,
                      weighted=weighted, accuracy=1.0 - hamming, n=n,
                      subset_accuracy=subset, hamming_loss=hamming)


@dataclass(frozen=True)
class KappaReport:
    kappa: float
    p_bar: float
    p_e: float
    n_items: int
    n_raters: int
    n_categories: int
    interpretation: str

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "p_bar": self.p_bar, "p_e": self.p_e,
                "n_items": self.n_items, "n_raters": self.n_raters,
                "n_categories": self.n_categories,
                "interpretation": self.interpretation}


def interpret_kappa(kappa: float) -> str:
    """Band labels; intervals are left-closed/right-open with 1.0 its own band."""
    if kappa > 1.0:
        raise ValueError("kappa cannot exceed 1")
    if kappa == 1.0:
        return "Perfect agreement"
    if kappa >= 0.80:
        return "Substantial agreement"
    if kappa >= 0.60:
        return "Moderate agreement"
    if kappa >= 0.40:
        return "Fair agreement"
    return "Poor agreement"


def fleiss_kappa(table, n_raters: int) -> KappaReport:
    """Fleiss' kappa over an (items x categories) rating-count table.

    Every row must sum to n_raters >= 2. When expected agreement P_e is 1
    (everyone used a single category throughout) kappa is defined as 1.0.
    """
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] < 1:
        raise ValueError("table must be 2-D with at least one item row")
    if np.any(t < 0):
        raise ValueError("rating counts must be non-negative")
    if n_raters < 2:
        raise ValueError("need at least 2 raters")
    sums = t.sum(axis=1)
    bad = np.nonzero(sums != n_raters)[0]
    if bad.size:
        raise ValueError(
            f"row {int(bad[0])} sums to {int(sums[bad[0]])}, expected {n_raters}"
        )
    n_items, n_cat = t.shape
    n = n_raters
    p_i = ((t * t).sum(axis=1) - n) / (n * (n - 1))
    p_bar = float(p_i.mean())
    p_j = t.sum(axis=0) / (n_items * n)
    p_e = float((p_j * p_j).sum())
    kappa = 1.0 if p_e == 1.0 else (p_bar - p_e) / (1.0 - p_e)
    return KappaReport(kappa=float(kappa), p_bar=p_bar, p_e=p_e,
                       n_items=n_items, n_raters=n, n_categories=n_cat,
                       interpretation=interpret_kappa(float(kappa)))


@dataclass(frozen=True)
class MultilabelKappaReport:
    per_label: dict  # label -> KappaReport (zero-variance labels excluded)
    excluded: tuple[str, ...]  # zero-variance labels
    macro_kappa: float | None
    interpretation: str | None

    def to_dict(self) -> dict:
        return {
            "per_label": {k: v.to_dict() for k, v in self.per_label.items()},
            "excluded": list(self.excluded),
            "macro_kappa": self.macro_kappa,
            "interpretation": self.interpretation,
        }


def multilabel_kappa(annotations: Sequence[Sequence[AbstractSet]],
                     vocab: SymptomVocabulary) -> MultilabelKappaReport:
    """Per-label binary Fleiss' kappa over {present, absent}, macro-averaged.

    annotations[a][i] is annotator a's symptom set for item i; all annotators
    must cover the same items. Labels nobody ever varied on (always present
    or always absent for every rater and item) are excluded from the macro
    mean and listed separately.
    """
    if len(annotations) < 2:
        raise ValueError("need at least 2 annotators")
    n_items = len(annotations[0])
    short = [a for a, rows in enumerate(annotations) if len(rows) != n_items]
    if short:
        raise ValueError(f"annotator {short[0]} covers {len(annotations[short[0]])} "
                         f"items, expected {n_items}")
    if n_items == 0:
        raise ValueError("no items to compare")
    n_raters = len(annotations)
    sets = [_index_sets(rows, vocab) for rows in annotations]
    per_label: dict[str, KappaReport] = {}
    excluded: list[str] = []
    for j, label in enumerate(vocab.labels):
        present = np.zeros(n_items, dtype=np.int64)
        for rows in sets:
            for i, s in enumerate(rows):
                if j in s:
                    present[i] += 1
        table = np.stack([present, n_raters - present], axis=1)
        report = fleiss_kappa(table, n_raters)
        if report.p_e == 1.0:
            excluded.append(label)
        else:
            per_label[label] = report
    if per_label:
        macro = sum(r.kappa for r in per_label.values()) / len(per_label)
        interp = interpret_kappa(macro)
    else:
        macro, interp = None, None
    return MultilabelKappaReport(per_label=per_label, excluded=tuple(excluded),
                                 macro_kappa=macro, interpretation=interp)


def render_eval_table(report: EvalReport, model_name: str) -> str:
    """Aligned-column text table: Class | Model | Precision | Recall |
    F1-Score | Accuracy, one row per class plus aggregate rows."""
    header = ["Class", "Model", "Precision", "Recall", "F1-Score", "Accuracy"]
    rows = []
    for c in report.classes:
        m = report.per_class[c]
        rows.append([c, model_name, f"{m['precision']:.4f}", f"{m['recall']:.4f}",
                     f"{m['f1']:.4f}", f"{m['accuracy']:.4f}"])
    for name in ("micro", "macro", "weighted"):
        agg = getattr(report, name)
        rows.append([name, model_name, f"{agg['precision']:.4f}",
                     f"{agg['recall']:.4f}", f"{agg['f1']:.4f}",
                     f"{report.accuracy:.4f}" if name == "micro" else ""])
    if report.task == "multilabel":
        rows.append(["subset_accuracy", model_name, "", "",
                     "", f"{report.subset_accuracy:.4f}"])
        rows.append(["hamming_loss", model_name, "", "",
                     "", f"{report.hamming_loss:.4f}"])
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    def fmt(row):
        return " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
    lines = [fmt(header), "-+-".join("-" * w for w in widths)]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines) + "\n"
