"""Cross-validation, F1 metrics, false-uncertainty, and the 2D overview.

The false-uncertainty rate is the share of results that were classified
correctly yet still flagged for review; it measures the overhead the
engine imposes on operators, so evaluation tracks it alongside F1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

from .classifier import EuclideanBaseline, Model, classify
from .config import EngineConfig
from .types import Classification, Label, LabeledEvent


class EvaluationError(ValueError):
    pass


# --- stratified splitting -----------------------------------------------------

def stratified_kfold(
    data: Sequence[LabeledEvent],
    k_folds: int = 5,
    seed: int = 0,
) -> tuple[list[tuple[list[LabeledEvent], list[LabeledEvent]]], list[str]]:
    """Per-class proportional splits with a seeded shuffle.

    Classes with fewer than ``k_folds`` samples cannot be spread across
    folds; they go into every train split, appear in no test split, and
    are reported in the returned warnings list.
    """

    if k_folds < 2:
        raise EvaluationError("k_folds must be at least 2")
    classes: dict[str, list[int]] = {}
    for i, le in enumerate(data):
        classes.setdefault(le.label.class_id, []).append(i)
    if len(classes) < 2:
        raise EvaluationError("stratified folds need at least two classes")

    rng = random.Random(seed)
    fold_test: list[list[int]] = [[] for _ in range(k_folds)]
    always_train: list[int] = []
    warnings: list[str] = []
    for class_id in sorted(classes):
        indices = classes[class_id][:]
        if len(indices) < k_folds:
            warnings.append(
                f"class {class_id} has only {len(indices)} samples (< {k_folds} folds); "
                "train-only")
            always_train.extend(indices)
            continue
        rng.shuffle(indices)
        base, extra = divmod(len(indices), k_folds)
        start = 0
        for f in range(k_folds):
            size = base + (1 if f < extra else 0)
            fold_test[f].extend(indices[start:start + size])
            start += size

    splits: list[tuple[list[LabeledEvent], list[LabeledEvent]]] = []
    for f in range(k_folds):
        test_idx = sorted(fold_test[f])
        test_set = set(test_idx)
        train_idx = [i for i in range(len(data)) if i not in test_set]
        splits.append(([data[i] for i in train_idx], [data[i] for i in test_idx]))
    return splits, warnings


# --- metrics -------------------------------------------------------------------

def confusion_matrix(y_true: Sequence[str], y_pred: Sequence[str]) -> dict[str, dict[str, int]]:
    """Counts keyed as confusion[true_class][predicted_class]."""
    if len(y_true) != len(y_pred):
        raise EvaluationError("y_true and y_pred must have equal length")
    out: dict[str, dict[str, int]] = {}
    for t, p in zip(y_true, y_pred):
        row = out.setdefault(t, {})
        row[p] = row.get(p, 0) + 1
    return out


def f1_scores(
    y_true: Sequence[str], y_pred: Sequence[str]
) -> tuple[float, float, dict[str, float]]:
    """(weighted F1, macro F1, per-class F1).

    Per class: precision = TP/(TP+FP), recall = TP/(TP+FN), each 0 when
    its denominator is 0, F1 = 2PR/(P+R) (0 when P+R = 0). Macro
    averages over classes present in y_true only; weighted weights them
    by true-class support. Classes appearing only in y_pred contribute
    false positives but are excluded from both averages.
    """

    if len(y_true) != len(y_pred):
        raise EvaluationError("y_true and y_pred must have equal length")
    if not y_true:
        raise EvaluationError("cannot score empty label lists")
    tp: dict[str, int] = {}
    fp: dict[str, int] = {}
    fn: dict[str, int] = {}
    support: dict[str, int] = {}
    for t, p in zip(y_true, y_pred):
        support[t] = support.get(t, 0) + 1
        if t == p:
            tp[t] = tp.get(t, 0) + 1
        else:
            fn[t] = fn.get(t, 0) + 1
            fp[p] = fp.get(p, 0) + 1
    per_class: dict[str, float] = {}
    for cls in sorted(support):
        tp_c = tp.get(cls, 0)
        denom_p = tp_c + fp.get(cls, 0)
        denom_r = tp_c + fn.get(cls, 0)
        precision = tp_c / denom_p if denom_p else 0.0
        recall = tp_c / denom_r if denom_r else 0.0
        per_class[cls] = (
            2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    macro = sum(per_class.values()) / len(per_class)
    total = sum(support.values())
    weighted = sum(per_class[c] * support[c] for c in per_class) / total
    return weighted, macro, per_class


def accuracy(y_true: Sequence[str], y_pred: Sequence[str]) -> float:
    if len(y_true) != len(y_pred) or not y_true:
        raise EvaluationError("label lists must be equal-length and non-empty")
    return sum(t == p for t, p in zip(y_true, y_pred)) / len(y_true)


def false_uncertainty_rate(results: Sequence[tuple[Classification, Label]]) -> float:
    """Fraction classified correctly but still flagged uncertain."""
    if not results:
        raise EvaluationError("cannot compute false uncertainty over no results")
    hits = sum(
        1 for c, truth in results
        if c.predicted.class_id == truth.class_id and c.uncertain)
    return hits / len(results)


def outcome_breakdown(results: Sequence[tuple[Classification, Label]]) -> dict[str, float]:
    """Fractions of the four (correct?, uncertain?) outcomes; they sum to 1."""
    if not results:
        raise EvaluationError("cannot compute outcomes over no results")
    counts = {"correct_certain": 0, "correct_uncertain": 0,
              "wrong_certain": 0, "wrong_uncertain": 0}
    for c, truth in results:
        correct = c.predicted.class_id == truth.class_id
        key = ("correct_" if correct else "wrong_") + ("uncertain" if c.uncertain else "certain")
        counts[key] += 1
    n = len(results)
    return {k: v / n for k, v in counts.items()}


# --- cross-validation ----------------------------------------------------------

@dataclass(frozen=True)
class FoldMetrics:
    fold: int
    train_size: int
    test_size: int
    weighted_f1: float
    macro_f1: float
    accuracy: float
    false_uncertainty_rate: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "fold": self.fold,
            "train_size": self.train_size,
            "test_size": self.test_size,
            "weighted_f1": self.weighted_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "false_uncertainty_rate": self.false_uncertainty_rate,
        }


@dataclass(frozen=True)
class EvaluationReport:
    folds: tuple[FoldMetrics, ...]
    weighted_f1: float
    macro_f1: float
    accuracy: float
    false_uncertainty_rate: float
    per_class_f1: dict[str, float]
    confusion: dict[str, dict[str, int]]
    warnings: tuple[str, ...]
    config_echo: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "folds": [f.to_dict() for f in self.folds],
            "weighted_f1": self.weighted_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "false_uncertainty_rate": self.false_uncertainty_rate,
            "per_class_f1": self.per_class_f1,
            "confusion": self.confusion,
            "warnings": list(self.warnings),
            "config": self.config_echo,
        }


class FoldError(RuntimeError):
    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold} failed: {cause}")
        self.fold = fold
        self.__cause__ = cause


def cross_validate(
    data: Sequence[LabeledEvent],
    config: EngineConfig,
    k_folds: int = 5,
    seed: int = 0,
    baseline: Literal["custom", "euclidean"] = "custom",
) -> EvaluationReport:
    """Stratified k-fold evaluation of the classifier (or the ED baseline).

    Each sample of every class large enough to stratify is tested
    exactly once, so the pooled confusion matrix covers the whole
    eligible dataset.
    """

    from .classifier import fit as fit_model  # local alias for clarity

    splits, warnings = stratified_kfold(data, k_folds=k_folds, seed=seed)
    fold_metrics: list[FoldMetrics] = []
    pooled: list[tuple[Classification, Label]] = []
    y_true_all: list[str] = []
    y_pred_all: list[str] = []
    for f, (train, test) in enumerate(splits):
        if not test:
            warnings.append(f"fold {f} has no test samples; skipped")
            continue
        try:
            if baseline == "euclidean":
                ed = EuclideanBaseline.fit(train, config)
                results = [ed.classify(le.event) for le in test]
            else:
                model = fit_model(train, config)
                results = [classify(model, le.event) for le in test]
        except Exception as exc:
            raise FoldError(f, exc) from exc
        y_true = [le.label.class_id for le in test]
        y_pred = [c.predicted.class_id for c in results]
        paired = list(zip(results, [le.label for le in test]))
        w, m, _ = f1_scores(y_true, y_pred)
        fold_metrics.append(FoldMetrics(
            fold=f,
            train_size=len(train),
            test_size=len(test),
            weighted_f1=w,
            macro_f1=m,
            accuracy=accuracy(y_true, y_pred),
            false_uncertainty_rate=false_uncertainty_rate(paired),
        ))
        pooled.extend(paired)
        y_true_all.extend(y_true)
        y_pred_all.extend(y_pred)

    if not fold_metrics:
        raise EvaluationError("no fold produced test results")
    _, _, per_class = f1_scores(y_true_all, y_pred_all)
    n = len(fold_metrics)
    return EvaluationReport(
        folds=tuple(fold_metrics),
        weighted_f1=sum(fm.weighted_f1 for fm in fold_metrics) / n,
        macro_f1=sum(fm.macro_f1 for fm in fold_metrics) / n,
        accuracy=sum(fm.accuracy for fm in fold_metrics) / n,
        false_uncertainty_rate=sum(fm.false_uncertainty_rate for fm in fold_metrics) / n,
        per_class_f1=per_class,
        confusion=confusion_matrix(y_true_all, y_pred_all),
        warnings=tuple(warnings),
        config_echo={
            "k": config.k,
            "weights": config.weights.to_dict(),
            "thresholds": config.thresholds.to_dict(),
            "min_term_frequency": config.min_term_frequency,
            "folds": k_folds,
            "seed": seed,
            "baseline": baseline,
        },
    )


# --- 2D overview ----------------------------------------------------------------

# Above this dense size the projection switches to sparse iterative SVD.
_DENSE_PCA_LIMIT = 100_000_000  # bytes


def project_2d(model: Model) -> list[tuple[int, str, float, float]]:
    """Deterministic 2-component PCA of the training message vectors.

    Components are ordered by explained variance; each component's sign
    is fixed so its largest-magnitude loading is positive, making the
    output stable across runs and platforms. Returns one
    (training_row_id, class_id, x, y) tuple per training row.
    """

    n = len(model.rows)
    if n < 3:
        raise EvaluationError("projection needs at least 3 training rows")
    dim = model.vectorizer.dimension
    cache = model._cache  # type: ignore[attr-defined]
    matrix = cache.matrix

    if dim == 0:
        coords = np.zeros((n, 2))
    elif n * max(dim, 1) * 8 <= _DENSE_PCA_LIMIT:
        dense = np.asarray(matrix.todense())[:, :dim]
        centered = dense - dense.mean(axis=0, keepdims=True)
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        comps = vt[:2]
        coords = _signed_scores(centered @ comps.T, comps, n)
    else:
        from scipy.sparse.linalg import LinearOperator, svds

        mean = np.asarray(matrix.mean(axis=0)).ravel()

        def matvec(v: np.ndarray) -> np.ndarray:
            return matrix.dot(v) - float(mean @ v) * np.ones(n)

        def rmatvec(v: np.ndarray) -> np.ndarray:
            return matrix.T.dot(v) - mean * float(v.sum())

        op = LinearOperator((n, matrix.shape[1]), matvec=matvec, rmatvec=rmatvec)
        k = min(2, min(n, matrix.shape[1]) - 1)
        _, s, vt = svds(op, k=k, v0=np.ones(matrix.shape[1]))
        order = np.argsort(s)[::-1]
        comps = vt[order]
        scores = np.column_stack([matvec(c) for c in comps])
        coords = _signed_scores(scores, comps, n)

    return [
        (row.row_id, row.label.class_id, float(coords[i, 0]), float(coords[i, 1]))
        for i, row in enumerate(model.rows)
    ]


def _signed_scores(scores: np.ndarray, comps: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, 2))
    for j in range(min(2, comps.shape[0])):
        v = comps[j]
        lead = int(np.argmax(np.abs(v)))
        sign = -1.0 if v[lead] < 0 else 1.0
        out[:, j] = sign * scores[:, j]
    return out
