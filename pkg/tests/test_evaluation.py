from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_event, make_labeled

from mira.classifier import fit
from mira.config import EngineConfig
from mira.evaluation import (
    EvaluationError,
    confusion_matrix,
    cross_validate,
    f1_scores,
    false_uncertainty_rate,
    outcome_breakdown,
    project_2d,
    stratified_kfold,
)
from mira.types import Classification, Label, LabelKind


def cfg(**kw) -> EngineConfig:
    kw.setdefault("k", 3)
    kw.setdefault("min_term_frequency", 1)
    return EngineConfig(**kw)


def labeled_batch(counts: dict[str, int]):
    out = []
    i = 0
    for cls, n in counts.items():
        for _ in range(n):
            out.append(make_labeled(
                make_event(f"e{i}", error_code=cls, error_message=f"msg {cls} {i % 3}"),
                cls))
            i += 1
    return out


# --- stratified folds ---------------------------------------------------------

def test_kfold_proportional_allocation():
    data = labeled_batch({"A": 100, "B": 50})
    splits, warnings = stratified_kfold(data, k_folds=5, seed=0)
    assert warnings == []
    assert len(splits) == 5
    for train, test in splits:
        test_counts = Counter(le.label.class_id for le in test)
        assert test_counts == {"A": 20, "B": 10}
        assert len(train) + len(test) == len(data)


def test_kfold_degenerate_class_goes_train_only():
    data = labeled_batch({"A": 40, "B": 40, "tiny": 3})
    splits, warnings = stratified_kfold(data, k_folds=5, seed=0)
    assert any("tiny" in w for w in warnings)
    for train, test in splits:
        assert all(le.label.class_id != "tiny" for le in test)
        assert sum(1 for le in train if le.label.class_id == "tiny") == 3


def test_kfold_partition_property():
    data = labeled_batch({"A": 23, "B": 17, "C": 9})
    splits, _ = stratified_kfold(data, k_folds=4, seed=3)
    seen = Counter()
    for _, test in splits:
        for le in test:
            seen[le.event.event_id] += 1
    # every eligible sample appears in exactly one test fold
    assert set(seen) == {le.event.event_id for le in data}
    assert all(v == 1 for v in seen.values())


def test_kfold_determinism_and_seed_sensitivity():
    data = labeled_batch({"A": 30, "B": 30})
    a1, _ = stratified_kfold(data, 5, seed=42)
    a2, _ = stratified_kfold(data, 5, seed=42)
    b, _ = stratified_kfold(data, 5, seed=43)
    ids = lambda s: [[le.event.event_id for le in test] for _, test in s]  # noqa: E731
    assert ids(a1) == ids(a2)
    assert ids(a1) != ids(b)


def test_kfold_errors():
    data = labeled_batch({"A": 10})
    with pytest.raises(EvaluationError):
        stratified_kfold(data, 5, 0)
    with pytest.raises(EvaluationError):
        stratified_kfold(labeled_batch({"A": 5, "B": 5}), 1, 0)


# --- F1 -------------------------------------------------------------------------

def test_f1_perfect():
    w, m, per = f1_scores(["A", "B", "A"], ["A", "B", "A"])
    assert w == 1.0 and m == 1.0
    assert per == {"A": 1.0, "B": 1.0}


def test_f1_hand_example():
    w, m, per = f1_scores(["A", "A", "B", "B"], ["A", "B", "B", "B"])
    assert per["A"] == pytest.approx(2 / 3, abs=1e-12)
    assert per["B"] == pytest.approx(0.8, abs=1e-12)
    assert m == pytest.approx((2 / 3 + 0.8) / 2, abs=1e-12)
    assert w == pytest.approx((2 / 3 + 0.8) / 2, abs=1e-12)  # equal support


def test_f1_pred_only_class_excluded_from_macro():
    w, m, per = f1_scores(["A", "A", "B"], ["A", "ghost", "B"])
    assert "ghost" not in per
    assert set(per) == {"A", "B"}
    cm = confusion_matrix(["A", "A", "B"], ["A", "ghost", "B"])
    assert cm["A"]["ghost"] == 1


def test_f1_errors():
    with pytest.raises(EvaluationError):
        f1_scores(["A"], [])
    with pytest.raises(EvaluationError):
        f1_scores([], [])


labels_strategy = st.lists(st.sampled_from(["A", "B", "C", "D"]), min_size=1, max_size=60)


@given(labels_strategy, st.randoms(use_true_random=False))
def test_f1_matches_bruteforce_confusion(y_true, rng):
    y_pred = [rng.choice(["A", "B", "C", "D"]) for _ in y_true]
    w, m, per = f1_scores(y_true, y_pred)

    # Independent brute-force recomputation straight from the confusion matrix.
    cm = confusion_matrix(y_true, y_pred)
    classes = sorted(set(y_true))
    per_expected = {}
    for c in classes:
        tp = cm.get(c, {}).get(c, 0)
        fp = sum(cm.get(t, {}).get(c, 0) for t in cm if t != c)
        fn = sum(v for p, v in cm.get(c, {}).items() if p != c)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        per_expected[c] = (
            2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    support = Counter(y_true)
    assert per == pytest.approx(per_expected, abs=1e-12)
    assert m == pytest.approx(sum(per_expected.values()) / len(classes), abs=1e-12)
    assert w == pytest.approx(
        sum(per_expected[c] * support[c] for c in classes) / len(y_true), abs=1e-12)


# --- false uncertainty ------------------------------------------------------------

def fake_result(cls: str, truth: str, uncertain: bool):
    label = Label(class_id=cls, kind=LabelKind.FALSE_POSITIVE)
    c = Classification(
        event_id="e", predicted=label, probability=0.5 if uncertain else 1.0,
        confidence=1.0, uncertain=uncertain, neighbors=())
    return (c, Label(class_id=truth, kind=LabelKind.FALSE_POSITIVE))


def test_false_uncertainty_examples():
    assert false_uncertainty_rate([fake_result("A", "A", False)] * 10) == 0.0
    results = [fake_result("A", "A", False)] * 98 + [fake_result("A", "A", True)] * 2
    assert false_uncertainty_rate(results) == pytest.approx(0.02, abs=1e-12)
    # wrong-and-uncertain is NOT false uncertainty
    assert false_uncertainty_rate([fake_result("A", "B", True)]) == 0.0


def test_outcome_breakdown_partitions():
    results = (
        [fake_result("A", "A", False)] * 5
        + [fake_result("A", "A", True)] * 2
        + [fake_result("A", "B", False)] * 1
        + [fake_result("A", "B", True)] * 2
    )
    frac = outcome_breakdown(results)
    assert sum(frac.values()) == pytest.approx(1.0, abs=1e-12)
    assert frac["correct_uncertain"] == pytest.approx(0.2, abs=1e-12)
    assert frac["correct_uncertain"] == pytest.approx(
        false_uncertainty_rate(results), abs=1e-12)


# --- cross_validate -----------------------------------------------------------------

def test_cross_validate_shapes_and_determinism(small_corpus, default_config):
    events, _ = small_corpus
    r1 = cross_validate(events, cfg(k=5), k_folds=5, seed=1)
    r2 = cross_validate(events, cfg(k=5), k_folds=5, seed=1)
    assert len(r1.folds) == 5
    assert r1.to_dict() == r2.to_dict()
    assert 0.0 <= r1.weighted_f1 <= 1.0
    # confusion rows sum to per-class test counts
    truth_counts = Counter(le.label.class_id for le in events)
    for cls, row in r1.confusion.items():
        assert sum(row.values()) == truth_counts[cls]


def test_cross_validate_baseline_shape(small_corpus):
    events, _ = small_corpus
    report = cross_validate(events, cfg(k=5), k_folds=3, seed=1, baseline="euclidean")
    assert len(report.folds) == 3
    assert report.config_echo["baseline"] == "euclidean"


def test_cross_validate_annotates_fold_errors():
    # k exceeds every train split size -> fit fails, annotated with the fold.
    data = labeled_batch({"A": 5, "B": 5})
    from mira.evaluation import FoldError

    with pytest.raises(FoldError, match="fold 0"):
        cross_validate(data, cfg(k=9), k_folds=5, seed=0)


# --- projection -----------------------------------------------------------------------

def test_project_identical_vectors_identical_coords():
    data = labeled_batch({"A": 3, "B": 3})
    # identical messages per class, two distinct message patterns
    model = fit(data, cfg(k=2))
    points = project_2d(model)
    assert len(points) == len(model.rows)
    by_msg: dict[tuple, list] = {}
    for (rid, cls, x, y), row in zip(points, model.rows):
        by_msg.setdefault(tuple(row.message_tokens), []).append((x, y))
    for coords in by_msg.values():
        assert all(c == coords[0] for c in coords)


def test_project_two_clusters_separate():
    rng = random.Random(5)
    data = (
        [make_labeled(make_event(f"a{i}", error_message="alpha beta gamma common"), "A")
         for i in range(10)]
        + [make_labeled(make_event(f"b{i}", error_message="delta epsilon zeta other"), "B")
           for i in range(10)]
    )
    rng.shuffle(data)
    model = fit(data, cfg(k=3))
    points = project_2d(model)
    xs = {"A": [], "B": []}
    for rid, cls, x, y in points:
        xs[cls].append(x)
    # linearly separable on the first component
    assert max(xs["A"]) < min(xs["B"]) or max(xs["B"]) < min(xs["A"])


def test_project_requires_three_rows():
    data = labeled_batch({"A": 1, "B": 1})
    model = fit(data, cfg(k=1))
    with pytest.raises(EvaluationError):
        project_2d(model)


def test_project_deterministic(small_corpus):
    events, _ = small_corpus
    model = fit(events[:100], cfg(k=3))
    assert project_2d(model) == project_2d(model)
