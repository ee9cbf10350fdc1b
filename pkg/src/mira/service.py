"""JSON/HTTP facade: replay ingestion, triage queue, corrections, retraining.

A single Engine owns the store and the serving model. Reads take one
snapshot of the model reference and use it for the whole request, so a
response is always produced by exactly one model version even while a
retrain swaps the reference. Corrections and retraining go through a
single writer lock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .classifier import BatchItemError, Model, classify_batch
from .config import EngineConfig
from .evaluation import project_2d
from .store import Correction, StoreError, TrainingStore
from .types import (
    Classification,
    Event,
    ValidationError,
    classification_to_dict,
    event_to_dict,
    validate_event,
)

REPLAYS_DIR = "replays"


class NoModelError(RuntimeError):
    """No trained model is available to serve classifications."""


class UnknownReplayError(KeyError):
    pass


class RetrainInProgressError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReplayRecord:
    replay_id: str
    capture_id: str
    received_at: str
    model_version_used: int
    events: tuple[Event, ...]
    classifications: tuple[Classification, ...]
    item_errors: tuple[BatchItemError, ...]

    def summary(self) -> dict[str, Any]:
        per_class: dict[str, int] = {}
        uncertain = 0
        for c in self.classifications:
            per_class[c.predicted.class_id] = per_class.get(c.predicted.class_id, 0) + 1
            uncertain += 1 if c.uncertain else 0
        return {
            "total": len(self.events),
            "per_class": dict(sorted(per_class.items())),
            "uncertain": uncertain,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "replay_id": self.replay_id,
            "capture_id": self.capture_id,
            "received_at": self.received_at,
            "model_version_used": self.model_version_used,
            "events": [event_to_dict(e) for e in self.events],
            "classifications": [classification_to_dict(c) for c in self.classifications],
            "item_errors": [{"event_id": e.event_id, "error": e.error} for e in self.item_errors],
        }


class Engine:
    """Thread-safe core behind the HTTP routes (and usable directly)."""

    def __init__(self, store: TrainingStore, config: EngineConfig):
        self.store = store
        self.config = config
        self._write_lock = threading.Lock()
        self._retrain_busy = threading.Lock()
        self._replays: dict[str, ReplayRecord] = {}
        self._replay_lock = threading.Lock()
        self._projection_cache: tuple[int, list[dict[str, Any]]] | None = None
        self.replays_dir = store.directory / REPLAYS_DIR
        self.replays_dir.mkdir(parents=True, exist_ok=True)
        self._replay_seq = self._scan_replay_seq()

    def _scan_replay_seq(self) -> int:
        top = 0
        for p in self.replays_dir.glob("r-*.json"):
            try:
                top = max(top, int(p.stem.split("-")[1]))
            except (IndexError, ValueError):
                continue
        return top

    def current_model(self) -> Model:
        model = self.store.model
        if model is None:
            raise NoModelError("no trained model available")
        return model

    # -- replays ---------------------------------------------------------------

    def submit_replay(self, capture_id: str, raw_events: list[dict[str, Any]]) -> dict[str, Any]:
        if not isinstance(capture_id, str) or not capture_id:
            raise ValidationError("capture_id must be a non-empty string", field="capture_id")
        if not raw_events:
            raise ValidationError("events must be a non-empty array", field="events")
        model = self.current_model()  # one snapshot for the whole submission
        events: list[Event] = []
        seen_ids: set[str] = set()
        for i, raw in enumerate(raw_events):
            try:
                event = validate_event(raw)
            except ValidationError as exc:
                field = f"events[{i}].{exc.field}" if exc.field else f"events[{i}]"
                raise ValidationError(str(exc), field=field) from exc
            if event.event_id in seen_ids:
                raise ValidationError(
                    f"duplicate event_id {event.event_id!r} in submission",
                    field=f"events[{i}].event_id")
            seen_ids.add(event.event_id)
            events.append(event)

        results = classify_batch(model, events)
        classifications = tuple(r for r in results if isinstance(r, Classification))
        item_errors = tuple(r for r in results if isinstance(r, BatchItemError))
        with self._replay_lock:
            self._replay_seq += 1
            replay_id = f"r-{self._replay_seq:06d}"
        record = ReplayRecord(
            replay_id=replay_id,
            capture_id=capture_id,
            received_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            model_version_used=model.version,
            events=tuple(events),
            classifications=classifications,
            item_errors=item_errors,
        )
        self._persist_replay(record)
        with self._replay_lock:
            self._replays[replay_id] = record
        return {
            "replay_id": replay_id,
            "model_version": model.version,
            "summary": record.summary(),
        }

    def _persist_replay(self, record: ReplayRecord) -> None:
        path = self.replays_dir / f"{record.replay_id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(record.to_dict(), sort_keys=True), encoding="utf-8")
        tmp.replace(path)

    def _load_replay(self, replay_id: str) -> ReplayRecord:
        with self._replay_lock:
            if replay_id in self._replays:
                return self._replays[replay_id]
        path = self.replays_dir / f"{replay_id}.json"
        if not path.exists():
            raise UnknownReplayError(replay_id)
        raw = json.loads(path.read_text(encoding="utf-8"))
        from .types import classification_from_dict, event_from_dict

        record = ReplayRecord(
            replay_id=raw["replay_id"],
            capture_id=raw["capture_id"],
            received_at=raw["received_at"],
            model_version_used=raw["model_version_used"],
            events=tuple(event_from_dict(e) for e in raw["events"]),
            classifications=tuple(classification_from_dict(c) for c in raw["classifications"]),
            item_errors=tuple(
                BatchItemError(event_id=e["event_id"], error=e["error"])
                for e in raw["item_errors"]),
        )
        with self._replay_lock:
            self._replays[replay_id] = record
        return record

    def list_replays(self) -> list[dict[str, Any]]:
        out = []
        for path in sorted(self.replays_dir.glob("r-*.json")):
            record = self._load_replay(path.stem)
            s = record.summary()
            out.append({
                "replay_id": record.replay_id,
                "capture_id": record.capture_id,
                "received_at": record.received_at,
                "model_version": record.model_version_used,
                "total": s["total"],
                "uncertain": s["uncertain"],
            })
        return out

    def get_classifications(
        self,
        replay_id: str,
        uncertain: bool | None = None,
        class_id: str | None = None,
        page: int = 1,
        page_size: int = 100,
    ) -> dict[str, Any]:
        record = self._load_replay(replay_id)
        if page < 1 or page_size < 1:
            raise ValidationError("page and page_size must be positive", field="page")
        by_event = {e.event_id: e for e in record.events}
        items = sorted(record.classifications, key=lambda c: c.event_id)
        if uncertain is not None:
            items = [c for c in items if c.uncertain == uncertain]
        if class_id is not None:
            items = [c for c in items if c.predicted.class_id == class_id]
        total = len(items)
        start = (page - 1) * page_size
        page_items = items[start:start + page_size]
        return {
            "replay_id": replay_id,
            "capture_id": record.capture_id,
            "model_version": record.model_version_used,
            "total": total,
            "page": page,
            "page_size": page_size,
            "items": [
                {**classification_to_dict(c), "event": event_to_dict(by_event[c.event_id])}
                for c in page_items
            ],
        }

    # -- corrections and retraining ---------------------------------------------

    def add_corrections(self, raw: list[dict[str, Any]]) -> dict[str, Any]:
        corrections = []
        for i, rec in enumerate(raw):
            try:
                corrections.append(Correction.from_dict(rec))
            except (KeyError, TypeError, ValidationError) as exc:
                raise ValidationError(
                    f"invalid correction at index {i}: {exc}", field=f"corrections[{i}]") from exc
        with self._write_lock:
            receipt = self.store.add_corrections(corrections)
        return {
            "accepted": receipt.added,
            "duplicates": receipt.duplicates,
            "new_classes": list(receipt.new_classes),
        }

    def retrain(self) -> dict[str, Any]:
        if not self._retrain_busy.acquire(blocking=False):
            raise RetrainInProgressError("a retrain is already running")
        try:
            with self._write_lock:
                old_version = self.store.current_model_version
                model = self.store.retrain(self.config)
            self._projection_cache = None
            return {
                "old_version": old_version,
                "new_version": model.version,
                "training_size": len(model.rows),
            }
        finally:
            self._retrain_busy.release()

    # -- model metadata -----------------------------------------------------------

    def model_info(self) -> dict[str, Any]:
        model = self.current_model()
        kinds = {r.label.class_id: r.label.kind.value for r in model.rows}
        return {
            "version": model.version,
            "created_at": model.created_at,
            "training_size": len(model.rows),
            "classes": [
                {"class_id": cid, "kind": kinds[cid], "count": count}
                for cid, count in sorted(model.class_counts.items())
            ],
            "weights": model.weights.to_dict(),
            "k": model.k,
            "thresholds": model.thresholds.to_dict(),
        }

    def projection(self) -> dict[str, Any]:
        model = self.current_model()
        cached = self._projection_cache
        if cached is None or cached[0] != model.version:
            points = [
                {"training_row_id": rid, "class_id": cid, "x": x, "y": y}
                for rid, cid, x, y in project_2d(model)
            ]
            cached = (model.version, points)
            self._projection_cache = cached
        return {"version": cached[0], "points": cached[1]}


def create_app(engine: Engine, ui_dir: str | Path | None = None):
    """Build the FastAPI application over an Engine."""
    from fastapi import FastAPI, HTTPException, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="mira", version="1")

    @app.exception_handler(ValidationError)
    def _validation_handler(_request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=400, content={"detail": {"error": str(exc), "field": exc.field}})

    def _engine_call(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NoModelError as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        except UnknownReplayError as exc:
            raise HTTPException(status_code=404, detail=f"unknown replay {exc.args[0]}") from exc
        except RetrainInProgressError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except StoreError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    @app.post("/v1/replays")
    def post_replays(body: dict):
        if not isinstance(body.get("events"), list):
            raise ValidationError("events must be an array", field="events")
        return _engine_call(engine.submit_replay, body.get("capture_id", ""), body["events"])

    @app.get("/v1/replays")
    def get_replays():
        return _engine_call(engine.list_replays)

    @app.get("/v1/replays/{replay_id}/classifications")
    def get_classifications(
        replay_id: str,
        uncertain: bool | None = None,
        class_id: str | None = None,
        page: int = 1,
        page_size: int = 100,
    ):
        return _engine_call(
            engine.get_classifications, replay_id,
            uncertain=uncertain, class_id=class_id, page=page, page_size=page_size)

    @app.post("/v1/corrections")
    def post_corrections(body: list[dict]):
        return _engine_call(engine.add_corrections, body)

    @app.post("/v1/retrain")
    def post_retrain():
        try:
            return _engine_call(engine.retrain)
        except HTTPException:
            raise
        except Exception as exc:  # fit failures keep the old model serving
            raise HTTPException(status_code=500, detail=str(exc)) from exc

    @app.get("/v1/model")
    def get_model():
        return _engine_call(engine.model_info)

    @app.get("/v1/projection")
    def get_projection():
        return _engine_call(engine.projection)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    store_dir: str | Path,
    config: EngineConfig,
    host: str = "127.0.0.1",
    port: int = 8750,
    ui_dir: str | Path | None = None,
) -> None:
    """Run the HTTP service (blocking)."""
    import uvicorn

    engine = Engine(TrainingStore(store_dir), config)
    app = create_app(engine, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
