"""Independent naive reimplementation of the classification pipeline.

Deliberately simple: dict-based tf-idf, per-pair cosine over dicts, a
full sort of all training rows, and hand-coded voting and confidence.
It shares nothing with the production distance sweep (no numpy, no
sparse matrices), so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

import math

from mira.preprocess import augment_with_trace, normalize_message

ZERO_EPS = 1e-12


def naive_vectorize(tokens, vocabulary, idf_by_token):
    counts: dict[str, int] = {}
    for t in tokens:
        if t in vocabulary:
            counts[t] = counts.get(t, 0) + 1
    vec = {t: n * idf_by_token[t] for t, n in counts.items()}
    norm = math.sqrt(sum(v * v for v in vec.values()))
    if norm == 0.0:
        return {}
    return {t: v / norm for t, v in vec.items()}


def naive_cosine_distance(u: dict, v: dict) -> float:
    if not u and not v:
        return 0.0
    if not u or not v:
        return 1.0
    if u == v:
        return 0.0
    # Accumulate in ascending vocabulary order, like a column-sorted sweep.
    dot = 0.0
    for t in sorted(u):
        if t in v:
            dot += u[t] * v[t]
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    d = 1.0 - dot / (nu * nv)
    return min(1.0, max(0.0, d))


def naive_custom_distance(x_cats, x_vec, y_cats, y_vec, weights) -> float:
    w_code, w_msg, w_type, w_subtype, w_request = weights
    numerator = (
        w_code * (0.0 if x_cats[0] == y_cats[0] else 1.0)
        + w_msg * naive_cosine_distance(x_vec, y_vec)
        + w_type * (0.0 if x_cats[1] == y_cats[1] else 1.0)
        + w_subtype * (0.0 if x_cats[2] == y_cats[2] else 1.0)
        + w_request * (0.0 if x_cats[3] == y_cats[3] else 1.0)
    )
    return numerator / (w_code + w_msg + w_type + w_subtype + w_request)


class NaiveClassifier:
    """Recomputes everything from a Model's raw data, the slow way.

    Only the model's *data* is consumed (vocabulary, idf, row tokens,
    labels, weights, k, thresholds); row vectors are rebuilt once here
    and every query runs the full sort-all-rows pipeline.
    """

    def __init__(self, model):
        self.model = model
        self.vocab = set(model.vectorizer.vocabulary)
        self.idf_by_token = {
            t: float(model.vectorizer.idf[i])
            for t, i in model.vectorizer.vocabulary.items()}
        self.weights = model.weights.as_tuple()
        self.rows = [
            (
                row.row_id,
                tuple(tok for _, tok in row.features.categorical),
                naive_vectorize(row.message_tokens, self.vocab, self.idf_by_token),
                row.label,
            )
            for row in model.rows
        ]

    def classify(self, event):
        """Returns (class_id, probability, confidence, uncertain, neighbor row ids)."""
        model = self.model
        message = augment_with_trace(event.error_message, event.trace_excerpt, model.trace_rules)
        q_vec = naive_vectorize(normalize_message(message), self.vocab, self.idf_by_token)
        q_cats = (event.error_code, event.sql_type, event.sql_subtype, event.request_type)

        scored = []
        for row_id, cats, vec, label in self.rows:
            d = naive_custom_distance(q_cats, q_vec, cats, vec, self.weights)
            scored.append((d, row_id, label))
        scored.sort(key=lambda t: (t[0], t[1]))
        top = scored[: model.k]

        exact = [t for t in top if t[0] < ZERO_EPS]
        votes: dict[str, float] = {}
        if exact:
            for _, _, label in exact:
                votes[label.class_id] = votes.get(label.class_id, 0.0) + 1.0
        else:
            for d, _, label in top:
                votes[label.class_id] = votes.get(label.class_id, 0.0) + 1.0 / d
        best = max(votes.values())
        predicted = min(c for c, v in votes.items() if v == best)
        probability = votes[predicted] / sum(votes.values())
        confidence = 1.0 - min(d for d, _, label in top if label.class_id == predicted) / 1.0
        uncertain = (
            probability < model.thresholds.min_probability
            or confidence < model.thresholds.min_confidence)
        return predicted, probability, confidence, uncertain, [t[1] for t in top]


def naive_classify(model, event):
    """One-shot convenience wrapper around NaiveClassifier."""
    return NaiveClassifier(model).classify(event)
