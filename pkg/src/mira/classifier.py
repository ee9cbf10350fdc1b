"""Distance-weighted KNN over the custom event distance.

Classification is exhaustive: every training row's distance to the
query is computed (no approximate index), the k nearest vote with
weight 1/distance, and two uncertainty measures accompany the verdict:

* probability - the predicted class's share of the distance-weighted
  vote. Low when several classes contribute comparably.
* confidence - one minus the distance to the nearest neighbor of the
  predicted class, normalized by the maximum possible distance. Low
  when the whole neighborhood is far away, which catches events that
  are unanimously but remotely matched (probability alone reads 1.0
  there).

A Euclidean-distance baseline over one-hot categoricals plus the
message vector is included for evaluation comparisons only.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .config import EngineConfig
from .distance import CATEGORICAL_ATTRIBUTES, EventFeatures, max_distance
from .preprocess import TraceExtractionRules, augment_with_trace, normalize_message
from .types import (
    Classification,
    Event,
    FeatureWeights,
    Label,
    LabeledEvent,
    Neighbor,
    Thresholds,
)
from .vectorizer import MessageVector, VectorizerModel

# Distances below this count as exact matches for voting purposes.
ZERO_DISTANCE_EPS = 1e-12


class ModelError(ValueError):
    pass


def build_event_features(
    event: Event,
    vectorizer: VectorizerModel,
    trace_rules: TraceExtractionRules | None,
) -> EventFeatures:
    """Run the full feature pipeline for one event: augment, normalize, vectorize."""
    message = augment_with_trace(event.error_message, event.trace_excerpt, trace_rules)
    tokens = normalize_message(message)
    return EventFeatures(
        categorical=(
            ("error_code", event.error_code),
            ("sql_type", event.sql_type),
            ("sql_subtype", event.sql_subtype),
            ("request_type", event.request_type),
        ),
        message_vector=vectorizer.transform(tokens),
    )


@dataclass(frozen=True)
class TrainingRow:
    """One training example: features, label, and the normalized tokens
    the message vector was built from (kept for serialization and
    explanations)."""

    row_id: int
    features: EventFeatures
    label: Label
    message_tokens: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class Model:
    """Immutable trained state: vectorizer, feature rows, and settings.

    Construction precomputes the dense/sparse caches used by the brute
    force distance sweep, so a Model is safe to share across threads.
    """

    vectorizer: VectorizerModel
    rows: tuple[TrainingRow, ...]
    weights: FeatureWeights
    k: int
    thresholds: Thresholds
    trace_rules: TraceExtractionRules | None
    min_term_frequency: int
    version: int
    created_at: str

    def __post_init__(self) -> None:
        if not self.rows:
            raise ModelError("model must contain at least one training row")
        if not 1 <= self.k <= len(self.rows):
            raise ModelError(f"k must be in [1, {len(self.rows)}], got {self.k}")
        ids = [r.row_id for r in self.rows]
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ModelError("training rows must have strictly increasing row ids")
        dim = self.vectorizer.dimension
        for r in self.rows:
            if r.features.message_vector.dimension != dim:
                raise ModelError(f"row {r.row_id} vector dimension does not match the vectorizer")
        object.__setattr__(self, "_cache", _DistanceCache(self.rows, dim))

    @property
    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.rows:
            counts[r.label.class_id] = counts.get(r.label.class_id, 0) + 1
        return counts

    def all_distances(self, features: EventFeatures) -> np.ndarray:
        """Custom distance from ``features`` to every training row."""
        cache: _DistanceCache = self._cache  # type: ignore[attr-defined]
        return cache.distances(features, self.weights)


class _DistanceCache:
    """Columnar training features for the vectorized distance sweep."""

    def __init__(self, rows: Sequence[TrainingRow], dimension: int):
        self.n = len(rows)
        self.dimension = dimension
        self.cat_codes: list[np.ndarray] = []
        self.cat_index: list[dict[str, int]] = []
        for pos in range(len(CATEGORICAL_ATTRIBUTES)):
            index: dict[str, int] = {}
            codes = np.empty(self.n, dtype=np.int32)
            for i, row in enumerate(rows):
                token = row.features.categorical[pos][1]
                codes[i] = index.setdefault(token, len(index))
            self.cat_codes.append(codes)
            self.cat_index.append(index)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for i, row in enumerate(rows):
            indptr[i + 1] = indptr[i] + row.features.message_vector.indices.size
        indices = np.concatenate(
            [row.features.message_vector.indices for row in rows]
        ) if self.n else np.empty(0, dtype=np.int32)
        data = np.concatenate(
            [row.features.message_vector.values for row in rows]
        ) if self.n else np.empty(0, dtype=np.float64)
        self.matrix = sparse.csr_matrix(
            (data, indices, indptr), shape=(self.n, max(dimension, 1)))
        self.row_is_zero = np.diff(indptr) == 0

    def distances(self, features: EventFeatures, weights: FeatureWeights) -> np.ndarray:
        w_code, w_msg, w_type, w_subtype, w_request = weights.as_tuple()

        q = features.message_vector
        if q.dimension != self.dimension:
            raise ModelError(f"query vector dimension {q.dimension} != model {self.dimension}")
        if q.is_zero:
            d_msg = np.where(self.row_is_zero, 0.0, 1.0)
        else:
            dense = np.zeros(max(self.dimension, 1), dtype=np.float64)
            dense[q.indices] = q.values
            d_msg = 1.0 - self.matrix.dot(dense)
            np.clip(d_msg, 0.0, 1.0, out=d_msg)
            d_msg[self.row_is_zero] = 1.0

        # Accumulation order matches the pairwise function: code, message,
        # type, subtype, request.
        total = w_code * (self.cat_codes[0] != self._code(0, features)).astype(np.float64)
        total += w_msg * d_msg
        for pos, w_attr in ((1, w_type), (2, w_subtype), (3, w_request)):
            total += w_attr * (self.cat_codes[pos] != self._code(pos, features)).astype(np.float64)
        return total / (w_code + w_msg + w_type + w_subtype + w_request)

    def _code(self, pos: int, features: EventFeatures) -> int:
        # Unseen tokens get -1, which mismatches every stored code.
        return self.cat_index[pos].get(features.categorical[pos][1], -1)


def fit(
    training: Sequence[LabeledEvent],
    config: EngineConfig,
    version: int = 1,
) -> Model:
    """Train a model: fit the vectorizer over all messages, build feature rows.

    Requires at least two distinct classes and k <= len(training). Rows
    get ids 0..n-1 in input order.
    """

    if not training:
        raise ModelError("training data is empty")
    classes = {le.label.class_id for le in training}
    if len(classes) < 2:
        raise ModelError("training data must contain at least two classes")
    if config.k > len(training):
        raise ModelError(f"k={config.k} exceeds the number of training rows ({len(training)})")

    token_lists = [
        normalize_message(
            augment_with_trace(le.event.error_message, le.event.trace_excerpt, config.trace_rules))
        for le in training
    ]
    vectorizer = VectorizerModel.fit(token_lists, config.min_term_frequency)
    rows = tuple(
        TrainingRow(
            row_id=i,
            features=EventFeatures(
                categorical=(
                    ("error_code", le.event.error_code),
                    ("sql_type", le.event.sql_type),
                    ("sql_subtype", le.event.sql_subtype),
                    ("request_type", le.event.request_type),
                ),
                message_vector=vectorizer.transform(tokens),
            ),
            label=le.label,
            message_tokens=tuple(tokens),
        )
        for i, (le, tokens) in enumerate(zip(training, token_lists))
    )
    return Model(
        vectorizer=vectorizer,
        rows=rows,
        weights=config.weights,
        k=config.k,
        thresholds=config.thresholds,
        trace_rules=config.trace_rules,
        min_term_frequency=config.min_term_frequency,
        version=version,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def _vote(
    neighbor_distances: Sequence[float],
    neighbor_classes: Sequence[str],
) -> tuple[str, float]:
    """Distance-weighted vote; returns (predicted class, its vote share).

    Neighbors at (numerically) zero distance are authoritative: when any
    exist, only they vote, each with equal weight. Otherwise each
    neighbor votes 1/distance. Vote ties pick the lexicographically
    smallest class id.
    """

    votes: dict[str, float] = {}
    exact = [i for i, d in enumerate(neighbor_distances) if d < ZERO_DISTANCE_EPS]
    if exact:
        for i in exact:
            votes[neighbor_classes[i]] = votes.get(neighbor_classes[i], 0.0) + 1.0
    else:
        for d, cls in zip(neighbor_distances, neighbor_classes):
            votes[cls] = votes.get(cls, 0.0) + 1.0 / d
    best = max(votes.values())
    predicted = min(cls for cls, v in votes.items() if v == best)
    return predicted, votes[predicted] / sum(votes.values())


def _k_nearest(d: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest distances; ties break by ascending index.

    Equivalent to np.argsort(d, kind="stable")[:k] but only sorts the
    candidate set at or below the kth distance.
    """

    if k >= d.shape[0]:
        return np.argsort(d, kind="stable")[:k]
    kth = np.partition(d, k - 1)[k - 1]
    candidates = np.flatnonzero(d <= kth)  # ascending index order
    return candidates[np.argsort(d[candidates], kind="stable")][:k]


def classify_features(model: Model, event_id: str, features: EventFeatures) -> Classification:
    """Classify pre-built features (shared by classify and the evaluators)."""
    d = model.all_distances(features)
    # Sub-epsilon distances are exact matches by definition; snap them so
    # reported distances and confidence come out as true zeros and ones.
    d[d < ZERO_DISTANCE_EPS] = 0.0
    # Ties at the kth distance break by ascending row id.
    order = _k_nearest(d, model.k)
    neighbor_distances = [float(d[i]) for i in order]
    neighbor_labels = [model.rows[int(i)].label for i in order]
    neighbor_ids = [model.rows[int(i)].row_id for i in order]

    predicted_class, probability = _vote(
        neighbor_distances, [l.class_id for l in neighbor_labels])
    same_class = [dist for dist, lab in zip(neighbor_distances, neighbor_labels)
                  if lab.class_id == predicted_class]
    # The argmax class always has at least one voting neighbor.
    assert same_class, "predicted class missing from the neighbor set"
    confidence = 1.0 - min(same_class) / max_distance(model.weights)

    predicted = next(l for l in neighbor_labels if l.class_id == predicted_class)
    return Classification(
        event_id=event_id,
        predicted=predicted,
        probability=probability,
        confidence=confidence,
        uncertain=model.thresholds.is_uncertain(probability, confidence),
        neighbors=tuple(
            Neighbor(training_row_id=rid, label=lab, distance=dist)
            for rid, lab, dist in zip(neighbor_ids, neighbor_labels, neighbor_distances)
        ),
    )


def classify(model: Model, event: Event) -> Classification:
    features = build_event_features(event, model.vectorizer, model.trace_rules)
    return classify_features(model, event.event_id, features)


@dataclass(frozen=True)
class BatchItemError:
    """Per-item failure inside a batch; never aborts the other items."""

    event_id: str
    error: str


def classify_batch(
    model: Model, events: Iterable[Event]
) -> list[Classification | BatchItemError]:
    """Elementwise classify; output order matches input order."""
    results: list[Classification | BatchItemError] = []
    for event in events:
        try:
            results.append(classify(model, event))
        except Exception as exc:  # noqa: BLE001 - contract: report, don't abort
            results.append(BatchItemError(event_id=event.event_id, error=str(exc)))
    return results


# --- Euclidean-distance baseline (evaluation only) --------------------------

#: Squared Euclidean distance is bounded by 2 per one-hot block (two
#: distinct unit indicators) and 2 for the unit-norm message block.
_ED_MAX_DISTANCE = math.sqrt(4 * 2.0 + 2.0)


@dataclass(frozen=True, eq=False)
class EuclideanBaseline:
    """KNN over one-hot categoricals concatenated with the message vector."""

    vectorizer: VectorizerModel
    cat_values: tuple[dict[str, int], ...]
    matrix: sparse.csr_matrix
    sq_norms: np.ndarray
    labels: tuple[Label, ...]
    k: int
    thresholds: Thresholds
    trace_rules: TraceExtractionRules | None

    @classmethod
    def fit(cls, training: Sequence[LabeledEvent], config: EngineConfig) -> "EuclideanBaseline":
        if not training:
            raise ModelError("training data is empty")
        if config.k > len(training):
            raise ModelError(f"k={config.k} exceeds the number of training rows ({len(training)})")
        token_lists = [
            normalize_message(
                augment_with_trace(le.event.error_message, le.event.trace_excerpt, config.trace_rules))
            for le in training
        ]
        vectorizer = VectorizerModel.fit(token_lists, config.min_term_frequency)
        cat_values: tuple[dict[str, int], ...] = tuple(
            {tok: i for i, tok in enumerate(sorted({getattr(le.event, attr) for le in training}))}
            for attr in CATEGORICAL_ATTRIBUTES
        )
        dim = sum(len(v) for v in cat_values) + vectorizer.dimension
        encoded = [
            cls._encode(le.event, vectorizer.transform(tokens), cat_values, dim)
            for le, tokens in zip(training, token_lists)
        ]
        matrix = sparse.vstack(encoded, format="csr") if encoded else sparse.csr_matrix((0, dim))
        sq = np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel()
        return cls(
            vectorizer=vectorizer,
            cat_values=cat_values,
            matrix=matrix,
            sq_norms=sq,
            labels=tuple(le.label for le in training),
            k=config.k,
            thresholds=config.thresholds,
            trace_rules=config.trace_rules,
        )

    @staticmethod
    def _encode(
        event: Event,
        msg: MessageVector,
        cat_values: tuple[dict[str, int], ...],
        dim: int,
    ) -> sparse.csr_matrix:
        cols: list[int] = []
        vals: list[float] = []
        offset = 0
        for pos, attr in enumerate(CATEGORICAL_ATTRIBUTES):
            idx = cat_values[pos].get(getattr(event, attr))
            if idx is not None:
                cols.append(offset + idx)
                vals.append(1.0)
            offset += len(cat_values[pos])
        for i, v in zip(msg.indices, msg.values):
            cols.append(offset + int(i))
            vals.append(float(v))
        return sparse.csr_matrix((vals, ([0] * len(cols), cols)), shape=(1, dim))

    def classify(self, event: Event) -> Classification:
        message = augment_with_trace(event.error_message, event.trace_excerpt, self.trace_rules)
        msg_vec = self.vectorizer.transform(normalize_message(message))
        dim = self.matrix.shape[1]
        q = self._encode(event, msg_vec, self.cat_values, dim)
        dots = np.asarray(self.matrix.dot(q.T).todense()).ravel()
        q_sq = float(q.multiply(q).sum())
        d = np.sqrt(np.maximum(self.sq_norms + q_sq - 2.0 * dots, 0.0))
        d[d < ZERO_DISTANCE_EPS] = 0.0

        order = _k_nearest(d, self.k)
        neighbor_distances = [float(d[i]) for i in order]
        neighbor_labels = [self.labels[int(i)] for i in order]
        predicted_class, probability = _vote(
            neighbor_distances, [l.class_id for l in neighbor_labels])
        same = [dist for dist, lab in zip(neighbor_distances, neighbor_labels)
                if lab.class_id == predicted_class]
        confidence = max(0.0, 1.0 - min(same) / _ED_MAX_DISTANCE)
        predicted = next(l for l in neighbor_labels if l.class_id == predicted_class)
        return Classification(
            event_id=event.event_id,
            predicted=predicted,
            probability=probability,
            confidence=confidence,
            uncertain=self.thresholds.is_uncertain(probability, confidence),
            neighbors=tuple(
                Neighbor(training_row_id=int(i), label=lab, distance=dist)
                for i, lab, dist in zip(order, neighbor_labels, neighbor_distances)
            ),
        )


def classify_baseline_ed(
    training: Sequence[LabeledEvent],
    event: Event,
    k: int,
    config: EngineConfig | None = None,
) -> Classification:
    """One-shot Euclidean-baseline classification (fits on every call)."""
    cfg = dataclasses.replace(config or EngineConfig(), k=k)
    return EuclideanBaseline.fit(training, cfg).classify(event)
