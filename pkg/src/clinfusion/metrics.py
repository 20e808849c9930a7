"""Per-class one-vs-rest ROC and PR curves with macro-averaged AUCs.

Conventions, fixed here because they change the numbers:

* Tied scores are grouped at a single threshold. With that grouping the
  trapezoidal AUC-ROC equals the tie-corrected Mann–Whitney statistic
  (#concordant + 0.5·#tied) / (P·N).
* AUC-PR uses the step-wise (right-continuous) rule, summing
  ΔR·precision over the threshold sweep. Linear interpolation of
  precision is deliberately avoided; it is optimistic.
* Macro averages are unweighted means over classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError

__all__ = [
    "ScoredSample",
    "ClassReport",
    "EvalReport",
    "roc_curve",
    "pr_curve",
    "one_vs_rest_report",
]


@dataclass(frozen=True)
class ScoredSample:
    """True class index plus the model's probability vector."""

    label: int
    probabilities: np.ndarray


def _binary_counts(scores: np.ndarray, labels: np.ndarray):
    """Cumulative TP/FP at each distinct score, swept descending."""
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    # last index of each tie group
    boundary = np.flatnonzero(np.diff(s) != 0.0)
    last = np.concatenate([boundary, [s.size - 1]])
    tp = np.cumsum(y)[last].astype(np.float64)
    fp = np.cumsum(~y)[last].astype(np.float64)
    return tp, fp


def roc_curve(scores, labels) -> tuple[np.ndarray, float]:
    """ROC points (FPR, TPR) over the descending threshold sweep, plus the
    trapezoidal AUC. The curve starts at (0, 0) and ends at (1, 1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DegenerateInputError(
            f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors"
        )
    pos = int(labels.sum())
    neg = labels.size - pos
    if pos == 0 or neg == 0:
        raise DegenerateInputError(
            f"ROC needs both classes, got {pos} positives and {neg} negatives"
        )
    tp, fp = _binary_counts(scores, labels)
    tpr = np.concatenate([[0.0], tp / pos])
    fpr = np.concatenate([[0.0], fp / neg])
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) * 0.5))
    return np.column_stack([fpr, tpr]), auc


def pr_curve(scores, labels) -> tuple[np.ndarray, float]:
    """Precision/recall at each distinct threshold (descending), plus the
    step-wise AUC sum(ΔR·P)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DegenerateInputError(
            f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors"
        )
    pos = int(labels.sum())
    if pos == 0:
        raise DegenerateInputError("PR curve needs at least one positive label")
    tp, fp = _binary_counts(scores, labels)
    recall = tp / pos
    precision = tp / (tp + fp)
    auc = float(np.sum(np.diff(np.concatenate([[0.0], recall])) * precision))
    return np.column_stack([recall, precision]), auc


@dataclass
class ClassReport:
    name: str
    roc_points: np.ndarray
    pr_points: np.ndarray
    auc_roc: float
    auc_pr: float


@dataclass
class EvalReport:
    """Per-class curves and AUCs plus unweighted macro averages."""

    classes: list[ClassReport]
    macro_auc_roc: float
    macro_auc_pr: float
    sample_count: int

    def class_report(self, name: str) -> ClassReport:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "macro_auc_roc": self.macro_auc_roc,
            "macro_auc_pr": self.macro_auc_pr,
            "classes": [
                {
                    "name": c.name,
                    "auc_roc": c.auc_roc,
                    "auc_pr": c.auc_pr,
                    "roc_points": [[float(a), float(b)] for a, b in c.roc_points],
                    "pr_points": [[float(a), float(b)] for a, b in c.pr_points],
                }
                for c in self.classes
            ],
        }

    def summary_rows(self) -> list[tuple[str, float, float]]:
        rows = [(c.name, c.auc_roc, c.auc_pr) for c in self.classes]
        rows.append(("macro", self.macro_auc_roc, self.macro_auc_pr))
        return rows


def one_vs_rest_report(samples, class_names) -> EvalReport:
    """Score each class against the rest using its probability column.

    Every class must occur at least once in the labels; anything else
    would make that class's curves meaningless.
    """
    samples = list(samples)
    if not samples:
        raise DegenerateInputError("no samples to evaluate")
    class_names = list(class_names)
    k = len(class_names)
    labels = np.array([s.label for s in samples], dtype=np.int64)
    probs = np.vstack([np.asarray(s.probabilities, dtype=np.float64) for s in samples])
    if probs.shape[1] != k:
        raise DegenerateInputError(
            f"probability vectors have {probs.shape[1]} entries for {k} classes"
        )
    sums = probs.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise DegenerateInputError(
            f"probabilities must sum to 1 within 1e-9 (worst deviation {worst:.3e})"
        )

    reports = []
    for idx, name in enumerate(class_names):
        positives = labels == idx
        if not positives.any():
            raise DegenerateInputError(f"class '{name}' absent from labels")
        roc_pts, auc_roc = roc_curve(probs[:, idx], positives)
        pr_pts, auc_pr = pr_curve(probs[:, idx], positives)
        reports.append(ClassReport(name, roc_pts, pr_pts, auc_roc, auc_pr))

    return EvalReport(
        classes=reports,
        macro_auc_roc=float(np.mean([c.auc_roc for c in reports])),
        macro_auc_pr=float(np.mean([c.auc_pr for c in reports])),
        sample_count=len(samples),
    )
