"""Weighted mixed categorical/text distance between events.

Each event compares attribute by attribute: binary mismatch (0/1) for
the four categorical attributes, cosine distance for the vectorized
error message. The total is the weighted mean of the five per-attribute
distances, which keeps the result in [0, 1] for any nonnegative weights
and makes the maximum possible distance a constant 1.0 (two events with
no matching attribute at all). With all-equal weights this degrades to
the plain mean of the per-attribute distances.

The result is not claimed to satisfy the triangle inequality; neighbor
search is exhaustive and never relies on metric-tree pruning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .types import FeatureWeights
from .vectorizer import MessageVector

CATEGORICAL_ATTRIBUTES = ("error_code", "sql_type", "sql_subtype", "request_type")


class DistanceError(ValueError):
    pass


@dataclass(frozen=True)
class EventFeatures:
    """An event prepared for distance computation.

    ``categorical`` holds exactly four (attribute, token) pairs in the
    fixed order error_code, sql_type, sql_subtype, request_type;
    ``message_vector`` is the event's tf-idf vector under the model that
    built these features.
    """

    categorical: tuple[tuple[str, str], ...]
    message_vector: MessageVector

    def __post_init__(self) -> None:
        names = tuple(name for name, _ in self.categorical)
        if names != CATEGORICAL_ATTRIBUTES:
            raise DistanceError(f"categorical attributes must be {CATEGORICAL_ATTRIBUTES}, got {names}")

    @property
    def tokens(self) -> tuple[str, str, str, str]:
        return tuple(tok for _, tok in self.categorical)  # type: ignore[return-value]


def cosine_distance(u: MessageVector, v: MessageVector) -> float:
    """Cosine distance in [0, 1] between nonnegative sparse vectors.

    Conventions for degenerate inputs: two zero vectors are identical
    (distance 0); a zero vector against a nonzero one is maximally far
    (distance 1). So two fully out-of-vocabulary messages count as
    similar, while out-of-vocabulary versus known counts as dissimilar.
    """

    if u.dimension != v.dimension:
        raise DistanceError(f"dimension mismatch: {u.dimension} vs {v.dimension}")
    u_zero, v_zero = u.is_zero, v.is_zero
    if u_zero and v_zero:
        return 0.0
    if u_zero or v_zero:
        return 1.0
    if u == v:
        return 0.0  # the formula's exact value; avoids rounding residue
    d = 1.0 - u.dot(v) / (u.norm() * v.norm())
    if d < 0.0:
        return 0.0
    if d > 1.0:
        return 1.0
    return d


def custom_distance(x: EventFeatures, y: EventFeatures, w: FeatureWeights) -> float:
    """Weighted mean of per-attribute distances, in [0, 1].

    Accumulation runs in the canonical attribute order (error_code,
    error_message, sql_type, sql_subtype, request_type) so independent
    implementations can reproduce results bit for bit.
    """

    w_code, w_msg, w_type, w_subtype, w_request = w.as_tuple()
    x_code, x_type, x_subtype, x_request = x.tokens
    y_code, y_type, y_subtype, y_request = y.tokens
    d_msg = cosine_distance(x.message_vector, y.message_vector)
    numerator = (
        w_code * (0.0 if x_code == y_code else 1.0)
        + w_msg * d_msg
        + w_type * (0.0 if x_type == y_type else 1.0)
        + w_subtype * (0.0 if x_subtype == y_subtype else 1.0)
        + w_request * (0.0 if x_request == y_request else 1.0)
    )
    denominator = w_code + w_msg + w_type + w_subtype + w_request
    return numerator / denominator


def max_distance(w: FeatureWeights) -> float:
    """Largest value custom_distance can take under these weights.

    Constant 1.0 under the weighted-mean formulation (every
    per-attribute distance is at most 1); exposed as an operation so the
    confidence denominator is explicit and testable.
    """

    w.as_tuple()
    return 1.0
