#!/usr/bin/env python3
"""Walk the full operator loop on synthetic data, in one process.

Phase 1: train on the seed corpus, classify a replay containing events
from classes the model has never seen; those come back uncertain.
Phase 2: apply operator corrections (using generator ground truth as
the 'operator'), retrain, and classify a fresh replay drawn from the
same previously-unseen classes. Prints before/after accuracy and
uncertainty, mirroring a two-replay correction cycle.
"""

from __future__ import annotations

import argparse
import tempfile

from mira.classifier import classify_batch
from mira.config import EngineConfig
from mira.store import Correction, TrainingStore
from mira.synthgen import CorpusSpec, generate_corpus, generate_replay
from mira.types import Label, LabelKind


def replay_stats(results, truth) -> tuple[float, float]:
    correct = sum(1 for r in results if r.predicted.class_id == truth[r.event_id])
    uncertain = sum(1 for r in results if r.uncertain)
    return correct / len(results), uncertain / len(results)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=20240801)
    parser.add_argument("--store", help="store directory (default: a temp dir)")
    args = parser.parse_args()

    spec = CorpusSpec(seed=args.seed, n_classes=25, n_events=5000, overlap_pairs=2)
    corpus, _ = generate_corpus(spec)

    with tempfile.TemporaryDirectory() as tmp:
        store = TrainingStore(args.store or tmp)
        store.add_seed(corpus)
        config = EngineConfig()
        model = store.retrain(config)
        print(f"trained version {model.version} on {len(model.rows)} events")

        replay1, truth1 = generate_replay(
            spec, 1000, novel_class_rate=0.3, seed=6, novel_seed=42)
        results1 = classify_batch(model, replay1)
        acc1, unc1 = replay_stats(results1, truth1)
        print(f"\nreplay 1 (with unseen failure classes): "
              f"accuracy {acc1:.3f}, uncertain {unc1:.3f}")

        corrections = [
            Correction(
                event=e,
                predicted=r.predicted,
                corrected=Label(class_id=truth1[e.event_id], kind=LabelKind.TRUE_POSITIVE),
                operator_id="demo-operator",
            )
            for r, e in zip(results1, replay1) if r.uncertain
        ]
        receipt = store.add_corrections(corrections)
        print(f"operator corrected {receipt.added} uncertain events "
              f"({len(receipt.new_classes)} new classes: {', '.join(receipt.new_classes)})")

        model = store.retrain(config)
        print(f"retrained to version {model.version} on {len(model.rows)} events")

        replay2, truth2 = generate_replay(
            spec, 1000, novel_class_rate=0.3, seed=7, novel_seed=42)
        results2 = classify_batch(model, replay2)
        acc2, unc2 = replay_stats(results2, truth2)
        print(f"\nreplay 2 (same failure classes, fresh events): "
              f"accuracy {acc2:.3f}, uncertain {unc2:.3f}")
        print(f"\naccuracy {acc1:.3f} -> {acc2:.3f}; "
              f"operator workload {unc1:.3f} -> {unc2:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
