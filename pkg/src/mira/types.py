"""Domain types shared by every part of the engine.

All types are immutable after construction and validate their own
invariants, so a constructed value is always well-formed. The JSON
codecs here define the canonical wire format: flat objects with fixed
field names, one object per line in JSONL collections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator, TextIO


class ValidationError(ValueError):
    """Raised when a record or field violates a type invariant.

    ``field`` names the offending field when one can be identified.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def _require_token(value: Any, name: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{name} must be a string, got {type(value).__name__}", field=name)
    if not value:
        raise ValidationError(f"{name} must be a non-empty string", field=name)
    return value


@dataclass(frozen=True)
class Event:
    """One failed replay event: categorical attributes plus free text.

    ``error_message`` may be empty (some failure categories emit a fixed,
    possibly blank message); every categorical attribute must be a
    non-empty token. ``trace_excerpt`` is optional raw trace text.
    """

    event_id: str
    error_code: str
    error_message: str
    sql_type: str
    sql_subtype: str
    request_type: str
    trace_excerpt: str | None = None

    def __post_init__(self) -> None:
        _require_token(self.event_id, "event_id")
        _require_token(self.error_code, "error_code")
        _require_token(self.sql_type, "sql_type")
        _require_token(self.sql_subtype, "sql_subtype")
        _require_token(self.request_type, "request_type")
        if not isinstance(self.error_message, str):
            raise ValidationError("error_message must be a string", field="error_message")
        if self.trace_excerpt is not None and not isinstance(self.trace_excerpt, str):
            raise ValidationError("trace_excerpt must be a string or null", field="trace_excerpt")


class LabelKind(str, Enum):
    """Whether a root cause represents a real regression or a replay artifact."""

    TRUE_POSITIVE = "true_positive"
    FALSE_POSITIVE = "false_positive"


@dataclass(frozen=True)
class Label:
    """A root-cause assignment: class identifier, kind, optional bug id."""

    class_id: str
    kind: LabelKind
    bug_id: str | None = None

    def __post_init__(self) -> None:
        _require_token(self.class_id, "class_id")
        if not isinstance(self.kind, LabelKind):
            object.__setattr__(self, "kind", LabelKind(self.kind))
        if self.bug_id is not None and not isinstance(self.bug_id, str):
            raise ValidationError("bug_id must be a string or null", field="bug_id")


@dataclass(frozen=True)
class LabeledEvent:
    event: Event
    label: Label

    def __post_init__(self) -> None:
        if not isinstance(self.event, Event):
            raise ValidationError("event must be an Event", field="event")
        if not isinstance(self.label, Label):
            raise ValidationError("label must be a Label", field="label")


@dataclass(frozen=True)
class FeatureWeights:
    """Per-attribute weights for the mixed categorical/text distance.

    Defaults give the error code and the error message more influence
    than the remaining attributes; all weights must be nonnegative and
    at least one must be positive.
    """

    w_error_code: float = 2.0
    w_error_message: float = 3.0
    w_sql_type: float = 1.0
    w_sql_subtype: float = 1.0
    w_request_type: float = 1.0

    def __post_init__(self) -> None:
        vals = self.as_tuple()
        if any(not isinstance(v, (int, float)) for v in vals):
            raise ValidationError("weights must be numbers")
        if any(v < 0 for v in vals):
            raise ValidationError("weights must be nonnegative")
        if sum(vals) <= 0:
            raise ValidationError("at least one weight must be positive")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        """Weights in canonical attribute order: code, message, type, subtype, request."""
        return (
            float(self.w_error_code),
            float(self.w_error_message),
            float(self.w_sql_type),
            float(self.w_sql_subtype),
            float(self.w_request_type),
        )

    def to_dict(self) -> dict[str, float]:
        return {
            "w_error_code": float(self.w_error_code),
            "w_error_message": float(self.w_error_message),
            "w_sql_type": float(self.w_sql_type),
            "w_sql_subtype": float(self.w_sql_subtype),
            "w_request_type": float(self.w_request_type),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "FeatureWeights":
        return cls(**{k: float(v) for k, v in raw.items()})


@dataclass(frozen=True)
class Thresholds:
    """Cutoffs below which a classification is routed to an operator."""

    min_probability: float = 0.9
    min_confidence: float = 0.7

    def __post_init__(self) -> None:
        for name in ("min_probability", "min_confidence"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1]", field=name)

    def is_uncertain(self, probability: float, confidence: float) -> bool:
        return probability < self.min_probability or confidence < self.min_confidence

    def to_dict(self) -> dict[str, float]:
        return {
            "min_probability": float(self.min_probability),
            "min_confidence": float(self.min_confidence),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Thresholds":
        return cls(**{k: float(v) for k, v in raw.items()})


@dataclass(frozen=True)
class Neighbor:
    """One training row that contributed to a classification."""

    training_row_id: int
    label: Label
    distance: float


@dataclass(frozen=True)
class Classification:
    """The engine's verdict for one event, with its supporting evidence.

    ``neighbors`` holds the k nearest training rows sorted by ascending
    distance; ``uncertain`` is always recomputable from probability,
    confidence and the thresholds that produced the result.
    """

    event_id: str
    predicted: Label
    probability: float
    confidence: float
    uncertain: bool
    neighbors: tuple[Neighbor, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValidationError("probability must be in [0, 1]", field="probability")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError("confidence must be in [0, 1]", field="confidence")
        if not isinstance(self.neighbors, tuple):
            object.__setattr__(self, "neighbors", tuple(self.neighbors))
        dists = [n.distance for n in self.neighbors]
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise ValidationError("neighbors must be sorted ascending by distance", field="neighbors")


def validate_event(raw: dict[str, Any]) -> Event:
    """Build an Event from an external key-value record.

    Raises ValidationError (naming the field) on missing or malformed
    fields. Unknown keys are ignored: replay pipelines collect more
    attributes per event than the model consumes.
    """

    if not isinstance(raw, dict):
        raise ValidationError("event record must be an object")
    for name in ("event_id", "error_code", "error_message", "sql_type", "sql_subtype", "request_type"):
        if name not in raw:
            raise ValidationError(f"missing required field {name}", field=name)
    return Event(
        event_id=raw["event_id"],
        error_code=raw["error_code"],
        error_message=raw["error_message"],
        sql_type=raw["sql_type"],
        sql_subtype=raw["sql_subtype"],
        request_type=raw["request_type"],
        trace_excerpt=raw.get("trace_excerpt"),
    )


# --- canonical JSON codecs -------------------------------------------------

def event_to_dict(e: Event) -> dict[str, Any]:
    return {
        "event_id": e.event_id,
        "error_code": e.error_code,
        "error_message": e.error_message,
        "sql_type": e.sql_type,
        "sql_subtype": e.sql_subtype,
        "request_type": e.request_type,
        "trace_excerpt": e.trace_excerpt,
    }


def event_from_dict(raw: dict[str, Any]) -> Event:
    return Event(
        event_id=raw["event_id"],
        error_code=raw["error_code"],
        error_message=raw["error_message"],
        sql_type=raw["sql_type"],
        sql_subtype=raw["sql_subtype"],
        request_type=raw["request_type"],
        trace_excerpt=raw.get("trace_excerpt"),
    )


def label_to_dict(l: Label) -> dict[str, Any]:
    return {"class_id": l.class_id, "kind": l.kind.value, "bug_id": l.bug_id}


def label_from_dict(raw: dict[str, Any]) -> Label:
    return Label(class_id=raw["class_id"], kind=LabelKind(raw["kind"]), bug_id=raw.get("bug_id"))


def labeled_event_to_dict(le: LabeledEvent) -> dict[str, Any]:
    """Flat object: event fields and label fields side by side."""
    d = event_to_dict(le.event)
    d.update(label_to_dict(le.label))
    return d


def labeled_event_from_dict(raw: dict[str, Any]) -> LabeledEvent:
    """Inverse of labeled_event_to_dict; extra keys (e.g. provenance) are ignored."""
    event = Event(
        event_id=raw["event_id"],
        error_code=raw["error_code"],
        error_message=raw["error_message"],
        sql_type=raw["sql_type"],
        sql_subtype=raw["sql_subtype"],
        request_type=raw["request_type"],
        trace_excerpt=raw.get("trace_excerpt"),
    )
    return LabeledEvent(event=event, label=label_from_dict(raw))


def classification_to_dict(c: Classification) -> dict[str, Any]:
    d: dict[str, Any] = {"event_id": c.event_id}
    d.update(label_to_dict(c.predicted))
    d["probability"] = c.probability
    d["confidence"] = c.confidence
    d["uncertain"] = c.uncertain
    d["neighbors"] = [
        {"training_row_id": n.training_row_id, "distance": n.distance, **label_to_dict(n.label)}
        for n in c.neighbors
    ]
    return d


def classification_from_dict(raw: dict[str, Any]) -> Classification:
    return Classification(
        event_id=raw["event_id"],
        predicted=label_from_dict(raw),
        probability=raw["probability"],
        confidence=raw["confidence"],
        uncertain=raw["uncertain"],
        neighbors=tuple(
            Neighbor(
                training_row_id=n["training_row_id"],
                label=label_from_dict(n),
                distance=n["distance"],
            )
            for n in raw["neighbors"]
        ),
    )


def to_json(obj: dict[str, Any]) -> str:
    """Canonical single-line JSON: sorted keys, no trailing spaces."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(records: Iterable[dict[str, Any]], fp: TextIO) -> int:
    n = 0
    for rec in records:
        fp.write(to_json(rec))
        fp.write("\n")
        n += 1
    return n


def read_jsonl(fp: TextIO) -> Iterator[dict[str, Any]]:
    for line in fp:
        line = line.strip()
        if line:
            yield json.loads(line)
