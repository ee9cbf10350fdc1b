#!/usr/bin/env python3
"""Capture real service responses as UI test fixtures.

Runs the engine against a seeded synthetic corpus and dumps the JSON
bodies the frontend consumes, so the vitest suite exercises the exact
wire shapes the service produces. Re-run after any API change:

    python frontend/scripts/capture_fixtures.py
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from mira.config import EngineConfig
from mira.service import Engine, create_app
from mira.store import TrainingStore
from mira.synthgen import CorpusSpec, generate_corpus, generate_replay
from mira.types import event_to_dict

SPEC = CorpusSpec(seed=2024, n_classes=8, n_events=700, overlap_pairs=1)
REPLAY_SEED = 14
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    corpus, _ = generate_corpus(SPEC)
    with tempfile.TemporaryDirectory() as tmp:
        store = TrainingStore(tmp)
        store.add_seed(corpus)
        engine = Engine(store, EngineConfig())
        with TestClient(create_app(engine)) as client:
            client.post("/v1/retrain")
            events, _ = generate_replay(
                SPEC, 80, novel_class_rate=0.2, seed=REPLAY_SEED, novel_seed=3)
            submit = client.post("/v1/replays", json={
                "capture_id": "capture-7",
                "events": [event_to_dict(e) for e in events],
            }).json()
            replay_id = submit["replay_id"]

            fixtures = {
                "model.json": client.get("/v1/model").json(),
                "projection.json": client.get("/v1/projection").json(),
                "replays.json": client.get("/v1/replays").json(),
                "classifications_uncertain.json": client.get(
                    f"/v1/replays/{replay_id}/classifications",
                    params={"uncertain": "true", "page_size": 1000}).json(),
                "submit.json": submit,
            }
            # A second retrain response, for the version-increment fixture.
            fixtures["retrain.json"] = client.post("/v1/retrain").json()

    for name, payload in fixtures.items():
        (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {OUT / name}")
    uncertain = fixtures["classifications_uncertain.json"]["total"]
    print(f"uncertain items in fixture: {uncertain}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
