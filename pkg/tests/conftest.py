from __future__ import annotations

import random

import pytest

from mira.config import EngineConfig
from mira.synthgen import CorpusSpec, generate_corpus
from mira.types import Event, Label, LabeledEvent, LabelKind


@pytest.fixture(scope="session")
def default_config() -> EngineConfig:
    return EngineConfig()


@pytest.fixture(scope="session")
def small_corpus():
    """300 events, 6 classes; shared by tests that just need plausible data."""
    spec = CorpusSpec(seed=11, n_classes=6, n_events=300, overlap_pairs=1)
    return generate_corpus(spec)


def make_event(
    event_id: str = "e1",
    error_code: str = "250986",
    error_message: str = "invalid argument: cannot determine volume id",
    sql_type: str = "1",
    sql_subtype: str = "1",
    request_type: str = "Type1",
    trace_excerpt: str | None = None,
) -> Event:
    return Event(
        event_id=event_id,
        error_code=error_code,
        error_message=error_message,
        sql_type=sql_type,
        sql_subtype=sql_subtype,
        request_type=request_type,
        trace_excerpt=trace_excerpt,
    )


def make_labeled(event: Event, class_id: str, kind: LabelKind = LabelKind.FALSE_POSITIVE,
                 bug_id: str | None = None) -> LabeledEvent:
    return LabeledEvent(event=event, label=Label(class_id=class_id, kind=kind, bug_id=bug_id))


def random_labeled_events(
    rng: random.Random,
    n: int,
    n_classes: int = 8,
    token_pool_size: int = 40,
    id_prefix: str = "f",
) -> list[LabeledEvent]:
    """Fuzzed training data over a small token pool (duplicates are common)."""
    pool = [f"w{th}" for th in range(token_pool_size)]
    codes = [str(100 + i) for i in range(12)]
    types = [str(i + 1) for i in range(4)]
    subtypes = [str(i + 1) for i in range(6)]
    requests = [f"Type{i+1}" for i in range(4)]
    out = []
    for i in range(n):
        words = rng.choices(pool, k=rng.randint(0, 9))
        cls = f"k{rng.randrange(n_classes):02d}"
        out.append(LabeledEvent(
            event=Event(
                event_id=f"{id_prefix}{i:05d}",
                error_code=rng.choice(codes),
                error_message=" ".join(words),
                sql_type=rng.choice(types),
                sql_subtype=rng.choice(subtypes),
                request_type=rng.choice(requests),
            ),
            label=Label(class_id=cls, kind=LabelKind.FALSE_POSITIVE, bug_id=None),
        ))
    return out
