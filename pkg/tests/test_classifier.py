from __future__ import annotations

import random

import pytest

from conftest import make_event, make_labeled, random_labeled_events
from naive_reference import naive_classify

from mira.classifier import (
    BatchItemError,
    EuclideanBaseline,
    ModelError,
    _vote,
    classify,
    classify_baseline_ed,
    classify_batch,
    fit,
)
from mira.config import EngineConfig
from mira.distance import custom_distance
from mira.types import FeatureWeights, Thresholds


def two_class_training():
    return [
        make_labeled(make_event("t1", error_code="100", error_message="volume missing"), "A"),
        make_labeled(make_event("t2", error_code="200", error_message="table missing"), "B"),
    ]


def cfg(**kw) -> EngineConfig:
    kw.setdefault("k", 1)
    kw.setdefault("min_term_frequency", 1)
    return EngineConfig(**kw)


def test_fit_minimal_two_rows():
    model = fit(two_class_training(), cfg())
    assert len(model.rows) == 2
    assert model.version == 1
    assert model.k == 1


def test_fit_rejects_bad_training():
    with pytest.raises(ModelError):
        fit([], cfg())
    with pytest.raises(ModelError):
        fit([two_class_training()[0]], cfg())  # single class
    with pytest.raises(ModelError):
        fit(two_class_training(), cfg(k=3))  # k > n


def test_exact_training_match_is_certain():
    training = two_class_training()
    model = fit(training, cfg(k=2))
    got = classify(model, training[0].event)
    assert got.predicted.class_id == "A"
    assert got.probability == 1.0
    assert got.confidence == 1.0
    assert not got.uncertain
    assert got.neighbors[0].distance == 0.0


def test_vote_hand_example():
    # (A, 0.1), (A, 0.2), (B, 0.4): votes A = 10+5, B = 2.5
    predicted, probability = _vote([0.1, 0.2, 0.4], ["A", "A", "B"])
    assert predicted == "A"
    assert probability == pytest.approx(15.0 / 17.5, abs=1e-12)
    # Confidence per the nearest same-class neighbor over max distance 1.0.
    assert 1.0 - 0.1 / 1.0 == pytest.approx(0.9, abs=1e-12)
    # p = 0.857 < 0.9, so this classification is routed to an operator.
    assert Thresholds().is_uncertain(probability, 0.9)


def test_vote_zero_distance_neighbors_are_authoritative():
    predicted, probability = _vote([0.0, 0.0, 0.3], ["A", "B", "B"])
    # Only the two exact matches vote, equally.
    assert predicted == "A"  # tie on votes, lexicographic tie-break
    assert probability == 0.5


def test_vote_argmax_tie_breaks_lexicographically():
    predicted, _ = _vote([0.2, 0.2], ["zeta", "alpha"])
    assert predicted == "alpha"


def test_far_unanimous_neighborhood_is_uncertain():
    # All neighbors one class but remote: probability 1.0, confidence low.
    training = [
        make_labeled(make_event(f"t{i}", error_code="100",
                                error_message="volume missing entirely"), "A")
        for i in range(3)
    ] + [make_labeled(make_event("t9", error_code="200",
                                 error_message="other thing"), "B")]
    model = fit(training, cfg(k=3))
    probe = make_event("q", error_code="999", error_message="qqq zzz unseen",
                       sql_type="9", sql_subtype="9", request_type="Type9")
    got = classify(model, probe)
    assert got.probability == 1.0
    assert got.confidence < 0.3
    assert got.uncertain


def test_k_nearest_matches_full_stable_argsort():
    import numpy as np

    from mira.classifier import _k_nearest

    rng = random.Random(33)
    for _ in range(300):
        n = rng.randint(1, 40)
        # coarse values force heavy ties
        d = np.array([rng.choice([0.0, 0.1, 0.1, 0.25, 0.5, 1.0]) for _ in range(n)])
        k = rng.randint(1, n)
        expected = np.argsort(d, kind="stable")[:k]
        got = _k_nearest(d, k)
        assert got.tolist() == expected.tolist()


def test_kth_distance_tie_broken_by_row_id():
    # Three identical B rows at the same distance; k=2 must take the two
    # lowest row ids.
    training = [
        make_labeled(make_event("a", error_code="1", error_message="alpha"), "A"),
        make_labeled(make_event("b1", error_code="2", error_message="beta"), "B"),
        make_labeled(make_event("b2", error_code="2", error_message="beta"), "B"),
        make_labeled(make_event("b3", error_code="2", error_message="beta"), "B"),
    ]
    model = fit(training, cfg(k=2))
    got = classify(model, training[0].event)
    assert [n.training_row_id for n in got.neighbors] == [0, 1]


def test_classify_batch_shapes_and_determinism():
    training = two_class_training()
    model = fit(training, cfg(k=2))
    assert classify_batch(model, []) == []
    event = training[0].event
    results = classify_batch(model, [event] * 5)
    assert len(results) == 5
    assert all(r == results[0] for r in results)


def test_classify_deterministic_bitwise():
    rng = random.Random(5)
    training = random_labeled_events(rng, 60)
    model = fit(training, cfg(k=7))
    probes = random_labeled_events(rng, 10, id_prefix="probe")
    for le in probes:
        a = classify(model, le.event)
        b = classify(model, le.event)
        assert a == b


def test_probabilities_sum_to_one_and_argmax():
    rng = random.Random(6)
    training = random_labeled_events(rng, 80)
    model = fit(training, cfg(k=9))
    for le in random_labeled_events(rng, 30, id_prefix="p"):
        got = classify(model, le.event)
        votes: dict[str, float] = {}
        exact = [n for n in got.neighbors if n.distance < 1e-12]
        pool = exact if exact else got.neighbors
        for n in pool:
            w = 1.0 if exact else 1.0 / n.distance
            votes[n.label.class_id] = votes.get(n.label.class_id, 0.0) + w
        total = sum(votes.values())
        assert got.probability == pytest.approx(max(votes.values()) / total, abs=1e-9)
        assert sum(v / total for v in votes.values()) == pytest.approx(1.0, abs=1e-9)
        assert votes[got.predicted.class_id] == max(votes.values())


def test_confidence_monotone_in_nearest_same_class_distance():
    rng = random.Random(8)
    training = random_labeled_events(rng, 50)
    model = fit(training, cfg(k=5))
    for le in random_labeled_events(rng, 20, id_prefix="m"):
        got = classify(model, le.event)
        nearest_same = min(
            n.distance for n in got.neighbors
            if n.label.class_id == got.predicted.class_id)
        assert got.confidence == pytest.approx(1.0 - nearest_same, abs=1e-12)
        assert (got.confidence == 1.0) == (nearest_same == 0.0)


def test_weight_scaling_never_changes_results():
    rng = random.Random(9)
    training = random_labeled_events(rng, 60)
    w = FeatureWeights(2.0, 3.0, 1.0, 1.0, 1.0)
    scaled = FeatureWeights(8.0, 12.0, 4.0, 4.0, 4.0)
    m1 = fit(training, cfg(k=5, weights=w))
    m2 = fit(training, cfg(k=5, weights=scaled))
    for le in random_labeled_events(rng, 25, id_prefix="s"):
        a = classify(m1, le.event)
        b = classify(m2, le.event)
        assert a.predicted == b.predicted
        assert a.probability == b.probability
        assert a.confidence == b.confidence
        assert [n.training_row_id for n in a.neighbors] == [n.training_row_id for n in b.neighbors]


def test_bulk_distances_agree_with_pairwise():
    rng = random.Random(10)
    training = random_labeled_events(rng, 40)
    model = fit(training, cfg(k=3))
    from mira.classifier import build_event_features

    for le in random_labeled_events(rng, 10, id_prefix="bulk"):
        features = build_event_features(le.event, model.vectorizer, model.trace_rules)
        bulk = model.all_distances(features)
        for row in model.rows:
            pairwise = custom_distance(features, row.features, model.weights)
            assert bulk[row.row_id] == pytest.approx(pairwise, abs=1e-12)


def test_naive_oracle_agreement_small():
    rng = random.Random(11)
    training = random_labeled_events(rng, 70)
    model = fit(training, cfg(k=7))
    for le in random_labeled_events(rng, 25, id_prefix="o"):
        got = classify(model, le.event)
        n_cls, n_p, n_c, n_u, _ = naive_classify(model, le.event)
        assert got.predicted.class_id == n_cls
        assert got.probability == pytest.approx(n_p, abs=1e-9)
        assert got.confidence == pytest.approx(n_c, abs=1e-9)
        assert got.uncertain == n_u


def test_batch_error_entries_do_not_abort():
    training = two_class_training()
    model = fit(training, cfg(k=2))

    class Broken:
        event_id = "broken"
        error_code = "x"
        error_message = None  # blows up in normalization
        sql_type = "1"
        sql_subtype = "1"
        request_type = "T"
        trace_excerpt = None

    results = classify_batch(model, [training[0].event, Broken(), training[1].event])
    assert isinstance(results[0], type(results[2]))
    assert isinstance(results[1], BatchItemError)
    assert results[1].event_id == "broken"


def test_fit_production_scale_profile():
    # 93-class long-tail profile at the downsampled production size.
    from mira.synthgen import CorpusSpec, generate_corpus

    spec = CorpusSpec(seed=93, n_classes=93, n_events=25600,
                      false_positive_fraction=73 / 93, overlap_pairs=4)
    corpus, _ = generate_corpus(spec)
    model = fit(corpus, EngineConfig())  # defaults: k=11, min_term_frequency=3
    assert model.version == 1
    assert model.k == 11
    assert len(model.rows) == 25600
    assert len(model.class_counts) == 93


def test_classify_batch_replay_scale():
    from mira.synthgen import CorpusSpec, generate_corpus, generate_replay
    from mira.types import Classification

    spec = CorpusSpec(seed=131, n_classes=6, n_events=300)
    corpus, _ = generate_corpus(spec)
    model = fit(corpus, EngineConfig(min_term_frequency=2))
    events, truth = generate_replay(spec, 13000, seed=4)
    results = classify_batch(model, events)
    assert len(results) == 13000
    assert all(isinstance(r, Classification) for r in results)
    correct = sum(1 for r in results if r.predicted.class_id == truth[r.event_id])
    assert correct / len(results) > 0.95


# --- Euclidean baseline -------------------------------------------------------

def test_baseline_exact_match_probability_one():
    training = two_class_training()
    got = classify_baseline_ed(training, training[0].event, k=1,
                               config=cfg(min_term_frequency=1))
    assert got.predicted.class_id == "A"
    assert got.probability == 1.0


def test_baseline_message_only_ranking_matches_cosine_order():
    # Identical categoricals: ED over unit vectors is monotone in cosine
    # distance, so the neighbor ranking must match the cosine ranking.
    training = [
        make_labeled(make_event("r0", error_message="alpha beta"), "A"),
        make_labeled(make_event("r1", error_message="alpha gamma"), "B"),
        make_labeled(make_event("r2", error_message="delta gamma"), "C"),
    ]
    config = cfg(k=3, min_term_frequency=1)
    probe = make_event("q", error_message="alpha beta")
    ed = EuclideanBaseline.fit(training, config).classify(probe)
    cd = classify(fit(training, config), probe)
    assert [n.training_row_id for n in ed.neighbors] == \
        [n.training_row_id for n in cd.neighbors]


def test_baseline_diverges_from_custom_distance_on_categoricals():
    # Under ED, four categorical mismatches can outweigh a message match;
    # under the weighted custom distance the message keeps more influence.
    training = [
        make_labeled(make_event(
            "same_msg", error_code="900", sql_type="9", sql_subtype="9",
            request_type="Type9", error_message="alpha beta gamma delta"), "MSG"),
        make_labeled(make_event(
            "same_cats", error_code="100", sql_type="1", sql_subtype="1",
            request_type="Type1", error_message="entirely unrelated words here"), "CAT"),
        make_labeled(make_event(
            "filler", error_code="500", sql_type="5", sql_subtype="5",
            request_type="Type5", error_message="alpha beta gamma delta"), "MSG"),
    ]
    config = cfg(k=1, min_term_frequency=1,
                 weights=FeatureWeights(1.0, 10.0, 1.0, 1.0, 1.0))
    probe = make_event("q", error_code="100", sql_type="1", sql_subtype="1",
                       request_type="Type1", error_message="alpha beta gamma delta")
    cd = classify(fit(training, config), probe)
    ed = EuclideanBaseline.fit(training, config).classify(probe)
    assert cd.predicted.class_id == "MSG"   # message dominates custom distance
    assert ed.predicted.class_id == "CAT"   # one-hot blocks dominate ED
