"""Training-data store, model artifacts, corrections, and downsampling.

The store is append-only: corrections and new samples only ever add
rows, and retraining produces a fresh immutable Model whose artifact is
written with an atomic rename, so a crash never leaves a partial model
and concurrent readers always see either the old or the new version in
its entirety.
"""

from __future__ import annotations

import gzip
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

from .classifier import Model, TrainingRow, fit
from .config import EngineConfig
from .distance import EventFeatures, custom_distance
from .preprocess import TraceExtractionRules, augment_with_trace, normalize_message
from .types import (
    Event,
    FeatureWeights,
    Label,
    LabeledEvent,
    Thresholds,
    ValidationError,
    event_to_dict,
    label_to_dict,
    labeled_event_from_dict,
    labeled_event_to_dict,
    read_jsonl,
    to_json,
)
from .vectorizer import VectorizerModel

MODEL_SCHEMA_FIELD = "mira_model_schema"
MODEL_SCHEMA_VERSION = 1

TRAINING_FILE = "training.jsonl"
MODEL_FILE = "model.json.gz"

PROVENANCE_SOURCES = ("seed", "correction", "new_class")


class StoreError(RuntimeError):
    pass


class ModelArtifactError(RuntimeError):
    """Unreadable, truncated, or wrong-schema model artifact."""


@dataclass(frozen=True)
class Correction:
    """An operator's verdict on one classification.

    ``corrected`` may equal ``predicted`` (a confirmation); both are
    kept so the engine can learn from confirmations too.
    """

    event: Event
    predicted: Label
    corrected: Label
    operator_id: str
    note: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "event": event_to_dict(self.event),
            "predicted": label_to_dict(self.predicted),
            "corrected": label_to_dict(self.corrected),
            "operator_id": self.operator_id,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Correction":
        from .types import event_from_dict, label_from_dict

        return cls(
            event=event_from_dict(raw["event"]),
            predicted=label_from_dict(raw["predicted"]),
            corrected=label_from_dict(raw["corrected"]),
            operator_id=raw["operator_id"],
            note=raw.get("note"),
        )


@dataclass(frozen=True)
class StoredRow:
    labeled: LabeledEvent
    source: str
    added_at: str

    def __post_init__(self) -> None:
        if self.source not in PROVENANCE_SOURCES:
            raise ValidationError(f"unknown provenance source {self.source!r}", field="source")


@dataclass(frozen=True)
class CorrectionReceipt:
    added: int
    duplicates: int
    new_classes: tuple[str, ...]


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class TrainingStore:
    """Append-only labeled-event store bound to a directory.

    Layout: ``training.jsonl`` (one labeled event with provenance per
    line) and ``model.json.gz`` (the current model artifact). A single
    writer at a time is assumed; readers may share the loaded model
    freely.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.training_path = self.directory / TRAINING_FILE
        self.model_path = self.directory / MODEL_FILE
        self._rows: list[StoredRow] = []
        self._model: Model | None = None
        if self.training_path.exists():
            with open(self.training_path, encoding="utf-8") as fp:
                for raw in read_jsonl(fp):
                    self._rows.append(StoredRow(
                        labeled=labeled_event_from_dict(raw),
                        source=raw.get("source", "seed"),
                        added_at=raw.get("added_at", ""),
                    ))
        if self.model_path.exists():
            self._model = load_model(self.model_path)

    # -- read side ----------------------------------------------------------

    @property
    def rows(self) -> tuple[StoredRow, ...]:
        return tuple(self._rows)

    @property
    def model(self) -> Model | None:
        """Current serving model; reference swap on retrain is atomic."""
        return self._model

    @property
    def current_model_version(self) -> int:
        return self._model.version if self._model is not None else 0

    def labeled_events(self) -> list[LabeledEvent]:
        return [r.labeled for r in self._rows]

    def class_ids(self) -> set[str]:
        return {r.labeled.label.class_id for r in self._rows}

    def __len__(self) -> int:
        return len(self._rows)

    # -- write side (single writer) ------------------------------------------

    def _append_rows(self, rows: Sequence[StoredRow]) -> None:
        with open(self.training_path, "a", encoding="utf-8") as fp:
            for row in rows:
                rec = labeled_event_to_dict(row.labeled)
                rec["source"] = row.source
                rec["added_at"] = row.added_at
                fp.write(to_json(rec))
                fp.write("\n")
        self._rows.extend(rows)

    def add_seed(self, labeled: Iterable[LabeledEvent]) -> int:
        rows = [StoredRow(le, "seed", _utc_now()) for le in labeled]
        self._append_rows(rows)
        return len(rows)

    def add_corrections(self, corrections: Sequence[Correction]) -> CorrectionReceipt:
        """Append corrections as labeled events with correction provenance.

        Identical corrections (same event content and corrected label)
        are appended once per submission; repeats are counted as
        duplicates in the receipt. A correction whose class is not yet
        in the store is recorded with ``new_class`` provenance.
        """

        known = self.class_ids()
        seen: set[str] = set()
        rows: list[StoredRow] = []
        new_classes: list[str] = []
        duplicates = 0
        now = _utc_now()
        for corr in corrections:
            labeled = LabeledEvent(event=corr.event, label=corr.corrected)
            key = to_json(labeled_event_to_dict(labeled))
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            cls = corr.corrected.class_id
            if cls in known:
                source = "correction"
            else:
                source = "new_class"
                known.add(cls)
                new_classes.append(cls)
            rows.append(StoredRow(labeled, source, now))
        self._append_rows(rows)
        return CorrectionReceipt(
            added=len(rows), duplicates=duplicates, new_classes=tuple(new_classes))

    def retrain(self, config: EngineConfig) -> Model:
        """Fit on the full labeled set and atomically swap the serving model.

        On any fit failure the store keeps serving the previous model.
        Downsampling is an explicit offline step unless
        ``config.downsample_on_retrain`` opts in.
        """

        if len(self.class_ids()) < 2:
            raise StoreError("retraining requires at least two classes in the store")
        data = self.labeled_events()
        if config.downsample_on_retrain:
            data = downsample(data, config)
        model = fit(data, config, version=self.current_model_version + 1)
        save_model(model, self.model_path)
        self._model = model
        return model


# --- downsampling ------------------------------------------------------------

def downsample(labeled: Sequence[LabeledEvent], config: EngineConfig) -> list[LabeledEvent]:
    """Trim near-duplicate groups per class, keeping every pattern alive.

    Within each class (independently, with a vectorizer fitted on just
    that class's messages) rows are scanned in stable order and greedily
    clustered: a row joins the first existing cluster leader within
    ``group_distance_threshold`` of it, else becomes a new leader. At
    most ``per_group_cap`` rows per cluster survive, and a cluster never
    loses its leader, so no error pattern disappears entirely.

    Returns a new list in the original order; the input is not touched.
    """

    if not labeled:
        raise StoreError("cannot downsample an empty dataset")
    threshold = config.downsample.group_distance_threshold
    cap = config.downsample.per_group_cap

    by_class: dict[str, list[int]] = {}
    for i, le in enumerate(labeled):
        by_class.setdefault(le.label.class_id, []).append(i)

    keep = [False] * len(labeled)
    for class_id, indices in by_class.items():
        token_lists = [
            normalize_message(augment_with_trace(
                labeled[i].event.error_message, labeled[i].event.trace_excerpt,
                config.trace_rules))
            for i in indices
        ]
        vectorizer = VectorizerModel.fit(token_lists, config.min_term_frequency)
        leaders: list[tuple[EventFeatures, int]] = []
        for i, tokens in zip(indices, token_lists):
            features = build_event_features_from_tokens(
                labeled[i].event, tokens, vectorizer)
            assigned = False
            for li, (leader, count) in enumerate(leaders):
                if custom_distance(features, leader, config.weights) <= threshold:
                    if count < cap:
                        leaders[li] = (leader, count + 1)
                        keep[i] = True
                    assigned = True
                    break
            if not assigned:
                leaders.append((features, 1))
                keep[i] = True
    return [le for i, le in enumerate(labeled) if keep[i]]


def build_event_features_from_tokens(
    event: Event, tokens: list[str], vectorizer: VectorizerModel
) -> EventFeatures:
    return EventFeatures(
        categorical=(
            ("error_code", event.error_code),
            ("sql_type", event.sql_type),
            ("sql_subtype", event.sql_subtype),
            ("request_type", event.request_type),
        ),
        message_vector=vectorizer.transform(tokens),
    )


# --- model artifact ----------------------------------------------------------

def _model_to_artifact(model: Model) -> dict[str, Any]:
    rows = []
    for row in model.rows:
        rec: dict[str, Any] = {"training_row_id": row.row_id}
        rec.update({name: tok for name, tok in row.features.categorical})
        # Stored post-normalization; vectors are rebuilt deterministically on load.
        rec["message_tokens"] = list(row.message_tokens)
        rec.update(label_to_dict(row.label))
        rows.append(rec)
    return {
        MODEL_SCHEMA_FIELD: MODEL_SCHEMA_VERSION,
        "version": model.version,
        "created_at": model.created_at,
        "k": model.k,
        "min_term_frequency": model.min_term_frequency,
        "weights": model.weights.to_dict(),
        "thresholds": model.thresholds.to_dict(),
        "trace_rules": model.trace_rules.to_dict() if model.trace_rules else None,
        "vectorizer": model.vectorizer.to_dict(),
        "rows": rows,
    }


def save_model(model: Model, path: str | Path) -> None:
    """Write the artifact via a temp file + rename so readers never see a partial file."""
    path = Path(path)
    payload = json.dumps(_model_to_artifact(model), sort_keys=True).encode("utf-8")
    tmp = path.with_name(path.name + ".tmp")
    with gzip.open(tmp, "wb") as fp:
        fp.write(payload)
    os.replace(tmp, path)


def load_model(path: str | Path) -> Model:
    """Read and reconstruct a model artifact; refuses partial or unknown files."""
    path = Path(path)
    try:
        with gzip.open(path, "rb") as fp:
            raw = json.loads(fp.read().decode("utf-8"))
    except FileNotFoundError:
        raise
    except (OSError, EOFError, ValueError) as exc:
        raise ModelArtifactError(f"unreadable model artifact {path}: {exc}") from exc
    schema = raw.get(MODEL_SCHEMA_FIELD)
    if schema != MODEL_SCHEMA_VERSION:
        raise ModelArtifactError(
            f"unsupported model schema {schema!r} (expected {MODEL_SCHEMA_VERSION})")
    vectorizer = VectorizerModel.from_dict(raw["vectorizer"])
    trace_rules = (
        TraceExtractionRules.from_dict(raw["trace_rules"]) if raw.get("trace_rules") else None)
    rows = tuple(
        TrainingRow(
            row_id=int(rec["training_row_id"]),
            features=EventFeatures(
                categorical=(
                    ("error_code", rec["error_code"]),
                    ("sql_type", rec["sql_type"]),
                    ("sql_subtype", rec["sql_subtype"]),
                    ("request_type", rec["request_type"]),
                ),
                message_vector=vectorizer.transform(rec["message_tokens"]),
            ),
            label=Label(class_id=rec["class_id"], kind=rec["kind"], bug_id=rec.get("bug_id")),
            message_tokens=tuple(rec["message_tokens"]),
        )
        for rec in raw["rows"]
    )
    return Model(
        vectorizer=vectorizer,
        rows=rows,
        weights=FeatureWeights.from_dict(raw["weights"]),
        k=int(raw["k"]),
        thresholds=Thresholds.from_dict(raw["thresholds"]),
        trace_rules=trace_rules,
        min_term_frequency=int(raw["min_term_frequency"]),
        version=int(raw["version"]),
        created_at=raw["created_at"],
    )
