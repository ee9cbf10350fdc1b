"""Seeded synthetic corpus and replay generation with known ground truth.

Real replay failures are proprietary, so verification runs against
generated corpora whose statistical shape mirrors the production data:
a long-tailed class distribution, small categorical vocabularies with
collisions between classes, message templates with location numbers and
generated table names, one-off temporary tokens, designated class pairs
that share categoricals and much of their vocabulary (the hard cases),
and classes distinguishable only through trace lines.

Everything is a pure function of the spec and seed: same inputs, byte
identical outputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from .preprocess import stopwords
from .types import Event, Label, LabeledEvent, LabelKind


class SynthError(ValueError):
    pass


# Realistic message vocabulary; every word survives normalization.
COMMON_WORDS = (
    "invalid", "argument", "cannot", "determine", "volume", "identifier",
    "table", "view", "column", "index", "schema", "constraint", "unique",
    "violated", "insufficient", "privilege", "memory", "allocation",
    "failed", "connection", "timeout", "transaction", "rollback",
    "serialization", "partition", "replica", "handle", "syntax",
    "unexpected", "token", "missing", "parameter", "overflow", "internal",
    "metadata", "catalog", "plan", "segment", "checkpoint", "recovery",
)

SHARED_BASE_MESSAGE = "further analysis is required to identify the root cause of the failure"

_SKELETONS = (
    ("error", "{B}", "{P}", "cannot", "determine", "{C}", "for", "table", "{TABLE}"),
    ("{B}", "failed", "{P}", "on", "table", "{TABLE}", "at", "line", "{LINE}", "pos", "{POS}"),
    ("internal", "error", "{P}", "{B}", "in", "{C}", "handler", "at", "line", "{LINE}"),
)

_TRACE_NOISE_LINES = (
    "open files limit raised to 65536",
    "checkpoint completed in 412 ms",
    "background merge scheduled",
    "session recovered after reconnect",
)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class CorpusSpec:
    """Shape parameters for a generated corpus."""

    seed: int = 7
    n_classes: int = 25
    n_events: int = 5000
    false_positive_fraction: float = 73 / 93
    min_patterns_per_class: int = 1
    max_patterns_per_class: int = 4
    zipf_exponent: float = 1.1
    min_class_size: int = 12
    n_error_codes: int = 63
    n_sql_types: int = 5
    n_sql_subtypes: int = 16
    n_request_types: int = 9
    temp_token_rate: float = 0.3
    trace_class_count: int = 0
    overlap_pairs: int = 2

    def __post_init__(self) -> None:
        if self.n_classes < 2:
            raise SynthError("n_classes must be at least 2")
        if not 0.0 <= self.false_positive_fraction <= 1.0:
            raise SynthError("false_positive_fraction must be in [0, 1]")
        if not 0.0 <= self.temp_token_rate <= 1.0:
            raise SynthError("temp_token_rate must be in [0, 1]")
        if not 1 <= self.min_patterns_per_class <= self.max_patterns_per_class:
            raise SynthError("patterns_per_class range is invalid")
        if self.trace_class_count > self.n_classes:
            raise SynthError("trace_class_count exceeds n_classes")
        if 2 * self.overlap_pairs > self.n_classes - self.trace_class_count:
            raise SynthError("too many overlap pairs for the class count")
        if self.n_events < self.n_classes * self.min_class_size:
            raise SynthError(
                f"n_events={self.n_events} cannot give {self.n_classes} classes "
                f"at least {self.min_class_size} events each")

    def to_dict(self) -> dict[str, Any]:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "CorpusSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise SynthError(f"unknown corpus spec fields: {sorted(extra)}")
        return cls(**raw)


@dataclass(frozen=True)
class PatternSpec:
    pattern_id: str
    skeleton: tuple[str, ...]
    base_words: tuple[str, ...]
    pattern_words: tuple[str, ...]
    common_word: str
    table_word: str
    line_no: int
    pos_no: int


@dataclass(frozen=True)
class ClassSpec:
    class_id: str
    label: Label
    error_code: str
    sql_type: str
    sql_subtype: str
    request_type: str
    patterns: tuple[PatternSpec, ...]
    trace_words: tuple[str, ...] = ()

    @property
    def uses_trace(self) -> bool:
        return bool(self.trace_words)


@dataclass(frozen=True)
class World:
    """All deterministic class structure derived from a spec."""

    spec: CorpusSpec
    classes: tuple[ClassSpec, ...]
    used_words: frozenset[str]


@dataclass(frozen=True)
class CorpusTruth:
    """Generator-side ground truth, consumed only by evaluation and tests."""

    class_by_event: dict[str, str]
    pattern_by_event: dict[str, str]
    classes: tuple[ClassSpec, ...] = ()


def _fresh_word(rng: random.Random, used: set[str]) -> str:
    stop = stopwords()
    while True:
        w = "".join(rng.choice(_LETTERS) for _ in range(rng.randint(4, 9)))
        if w not in used and w not in stop:
            used.add(w)
            return w


def _swap_one_word(
    rng: random.Random, used: set[str], words: tuple[str, ...]
) -> tuple[str, ...]:
    out = list(words)
    out[rng.randrange(len(out))] = _fresh_word(rng, used)
    return tuple(out)


def build_world(spec: CorpusSpec) -> World:
    """Derive class specs (categoricals, templates, trace markers) from the seed."""
    rng = random.Random(f"world:{spec.seed}")
    used: set[str] = set(COMMON_WORDS)

    error_codes = [str(210000 + 37 * i) for i in range(spec.n_error_codes)]
    sql_types = [str(i + 1) for i in range(spec.n_sql_types)]
    sql_subtypes = [str(i + 1) for i in range(spec.n_sql_subtypes)]
    request_types = [f"Type{i + 1}" for i in range(spec.n_request_types)]

    classes: list[ClassSpec] = []
    n_regular = spec.n_classes - spec.trace_class_count
    n_false_positive = round(spec.false_positive_fraction * spec.n_classes)
    trace_shared_cats: tuple[str, str, str, str] | None = None

    for idx in range(spec.n_classes):
        class_id = f"c{idx:02d}"
        kind = LabelKind.FALSE_POSITIVE if idx < n_false_positive else LabelKind.TRUE_POSITIVE
        bug_id = f"BUG-{1000 + idx}" if kind is LabelKind.TRUE_POSITIVE else None
        label = Label(class_id=class_id, kind=kind, bug_id=bug_id)
        is_trace = idx >= n_regular

        overlap_leader: ClassSpec | None = None
        if not is_trace and idx % 2 == 1 and idx // 2 < spec.overlap_pairs:
            overlap_leader = classes[idx - 1]

        if is_trace:
            if trace_shared_cats is None:
                trace_shared_cats = (
                    rng.choice(error_codes), rng.choice(sql_types),
                    rng.choice(sql_subtypes), rng.choice(request_types))
            cats = trace_shared_cats
        elif overlap_leader is not None:
            cats = (overlap_leader.error_code, overlap_leader.sql_type,
                    overlap_leader.sql_subtype, overlap_leader.request_type)
        else:
            cats = (rng.choice(error_codes), rng.choice(sql_types),
                    rng.choice(sql_subtypes), rng.choice(request_types))

        if is_trace:
            patterns = (PatternSpec(
                pattern_id=f"{class_id}/p0",
                skeleton=("{B}",),
                base_words=(SHARED_BASE_MESSAGE,),
                pattern_words=(),
                common_word="",
                table_word="",
                line_no=0,
                pos_no=0,
            ),)
            trace_words = tuple(_fresh_word(rng, used) for _ in range(3))
        elif overlap_leader is not None:
            # Hard case: identical categoricals and base vocabulary, patterns
            # that are near-twins of the leader's with one word swapped.
            patterns = tuple(
                PatternSpec(
                    pattern_id=f"{class_id}/p{p}",
                    skeleton=lp.skeleton,
                    base_words=lp.base_words,
                    pattern_words=_swap_one_word(rng, used, lp.pattern_words),
                    common_word=lp.common_word,
                    table_word=lp.table_word,
                    line_no=lp.line_no,
                    pos_no=rng.randint(1, 99),
                )
                for p, lp in enumerate(overlap_leader.patterns)
            )
            trace_words = ()
        else:
            base_words = tuple(_fresh_word(rng, used) for _ in range(3))
            n_patterns = rng.randint(spec.min_patterns_per_class, spec.max_patterns_per_class)
            patterns = tuple(
                PatternSpec(
                    pattern_id=f"{class_id}/p{p}",
                    skeleton=_SKELETONS[rng.randrange(len(_SKELETONS))],
                    base_words=base_words,
                    pattern_words=tuple(_fresh_word(rng, used) for _ in range(rng.randint(2, 3))),
                    common_word=rng.choice(COMMON_WORDS),
                    table_word=rng.choice(COMMON_WORDS),
                    line_no=rng.randint(1, 999),
                    pos_no=rng.randint(1, 99),
                )
                for p in range(n_patterns)
            )
            trace_words = ()

        classes.append(ClassSpec(
            class_id=class_id,
            label=label,
            error_code=cats[0],
            sql_type=cats[1],
            sql_subtype=cats[2],
            request_type=cats[3],
            patterns=patterns,
            trace_words=trace_words,
        ))
    return World(spec=spec, classes=tuple(classes), used_words=frozenset(used))


def _class_sizes(spec: CorpusSpec) -> list[int]:
    """Long-tailed allocation of n_events over classes (largest-remainder rounding)."""
    weights = [1.0 / (i + 1) ** spec.zipf_exponent for i in range(spec.n_classes)]
    total_w = sum(weights)
    raw = [w / total_w * spec.n_events for w in weights]
    sizes = [max(spec.min_class_size, int(r)) for r in raw]
    drift = spec.n_events - sum(sizes)
    order = sorted(range(spec.n_classes), key=lambda i: raw[i] - int(raw[i]), reverse=True)
    step = 1 if drift > 0 else -1
    i = 0
    while drift != 0:
        idx = order[i % spec.n_classes]
        if step < 0 and sizes[idx] <= spec.min_class_size:
            i += 1
            continue
        sizes[idx] += step
        drift -= step
        i += 1
    return sizes


class _Counters:
    """Monotonic source of unique suffixes within one generation call."""

    def __init__(self) -> None:
        self.n = 0

    def next(self) -> int:
        self.n += 1
        return self.n


def _render_message(
    rng: random.Random, pattern: PatternSpec, counters: _Counters,
    temp_token_rate: float, temp_tokens_out: list[str],
) -> str:
    words: list[str] = []
    for slot in pattern.skeleton:
        if slot == "{B}":
            words.extend(pattern.base_words)
        elif slot == "{P}":
            words.extend(pattern.pattern_words)
        elif slot == "{C}":
            words.append(pattern.common_word)
        elif slot == "{TABLE}":
            suffix = f"{counters.next()}{rng.choice(_LETTERS)}{rng.choice(_LETTERS)}"
            words.append(f"{pattern.table_word}_{suffix}")
        elif slot == "{LINE}":
            words.append(str(pattern.line_no))
        elif slot == "{POS}":
            # Small within-pattern jitter; the leading digits still signal the root cause.
            words.append(str(pattern.pos_no + rng.randrange(2)))
        else:
            words.append(slot)
    if rng.random() < 0.35:
        words.append(rng.choice(COMMON_WORDS))
    if rng.random() < 0.2:
        words.append(rng.choice(COMMON_WORDS))
    if rng.random() < temp_token_rate:
        token = f"tmp{counters.next()}{rng.choice(_LETTERS)}"
        temp_tokens_out.append(token)
        words.append(token)
    return " ".join(words)


def _render_trace(rng: random.Random, cls: ClassSpec) -> str:
    lines = [
        rng.choice(_TRACE_NOISE_LINES),
        f"Assertion failed: {' '.join(cls.trace_words)} in {rng.choice(COMMON_WORDS)} module",
        rng.choice(_TRACE_NOISE_LINES),
    ]
    return "\n".join(lines)


def generate_corpus(spec: CorpusSpec) -> tuple[list[LabeledEvent], CorpusTruth]:
    """Generate labeled events plus the pattern-level ground truth map."""
    world = build_world(spec)
    rng = random.Random(f"corpus:{spec.seed}")
    counters = _Counters()
    sizes = _class_sizes(spec)
    temp_tokens: list[str] = []

    events: list[LabeledEvent] = []
    class_by_event: dict[str, str] = {}
    pattern_by_event: dict[str, str] = {}
    seq = 0
    for cls, size in zip(world.classes, sizes):
        for _ in range(size):
            pattern = cls.patterns[rng.randrange(len(cls.patterns))]
            event_id = f"ev{seq:06d}"
            seq += 1
            message = (
                SHARED_BASE_MESSAGE if cls.uses_trace
                else _render_message(rng, pattern, counters, spec.temp_token_rate, temp_tokens))
            event = Event(
                event_id=event_id,
                error_code=cls.error_code,
                error_message=message,
                sql_type=cls.sql_type,
                sql_subtype=cls.sql_subtype,
                request_type=cls.request_type,
                trace_excerpt=_render_trace(rng, cls) if cls.uses_trace else None,
            )
            events.append(LabeledEvent(event=event, label=cls.label))
            class_by_event[event_id] = cls.class_id
            pattern_by_event[event_id] = pattern.pattern_id
    if len(set(temp_tokens)) != len(temp_tokens):
        raise SynthError("internal: generated temporary tokens are not unique")

    # Interleave classes so file order carries no label signal.
    order = list(range(len(events)))
    rng.shuffle(order)
    events = [events[i] for i in order]
    return events, CorpusTruth(
        class_by_event=class_by_event,
        pattern_by_event=pattern_by_event,
        classes=world.classes,
    )


def _novel_classes(world: World, rng: random.Random, count: int) -> list[ClassSpec]:
    used = set(world.used_words)
    spec = world.spec
    known_codes = {c.error_code for c in world.classes}
    novel: list[ClassSpec] = []
    for i in range(count):
        class_id = f"novel{i:02d}"
        # Most novel failures arrive with an unseen error code; some reuse one.
        if rng.random() < 0.25:
            code = rng.choice(sorted(known_codes))
        else:
            code = str(990000 + 13 * i)
        novel.append(ClassSpec(
            class_id=class_id,
            label=Label(class_id=class_id, kind=LabelKind.TRUE_POSITIVE, bug_id=None),
            error_code=code,
            sql_type=str(rng.randint(1, spec.n_sql_types)),
            sql_subtype=str(rng.randint(1, spec.n_sql_subtypes)),
            request_type=f"Type{rng.randint(1, spec.n_request_types)}",
            patterns=(PatternSpec(
                pattern_id=f"{class_id}/p0",
                skeleton=_SKELETONS[rng.randrange(len(_SKELETONS))],
                base_words=tuple(_fresh_word(rng, used) for _ in range(3)),
                pattern_words=tuple(_fresh_word(rng, used) for _ in range(3)),
                common_word=_fresh_word(rng, used),
                table_word=_fresh_word(rng, used),
                line_no=rng.randint(1, 999),
                pos_no=rng.randint(1, 99),
            ),),
        ))
    return novel


def generate_replay(
    spec: CorpusSpec,
    n_events: int,
    class_mix: dict[str, float] | None = None,
    novel_class_rate: float = 0.0,
    seed: int = 1,
    novel_seed: int | None = None,
) -> tuple[list[Event], dict[str, str]]:
    """Draw a replay batch from trained classes plus optionally novel ones.

    ``class_mix`` maps class ids to sampling weights (default: the
    corpus's own long-tailed distribution). Each event independently
    falls into a freshly generated unseen class with probability
    ``novel_class_rate``. Novel class structure is seeded separately by
    ``novel_seed`` (default: ``seed``), so two replays can draw fresh
    events from the same unseen classes — the recurring-new-failure
    scenario. Returns (events, hidden truth event_id -> class_id); the
    truth is for evaluation only.
    """

    if n_events < 1:
        raise SynthError("n_events must be positive")
    if not 0.0 <= novel_class_rate <= 1.0:
        raise SynthError("novel_class_rate must be in [0, 1]")
    world = build_world(spec)
    rng = random.Random(f"replay:{spec.seed}:{seed}")
    counters = _Counters()

    by_id = {c.class_id: c for c in world.classes}
    if class_mix:
        unknown = set(class_mix) - set(by_id)
        if unknown:
            raise SynthError(f"class_mix names unknown classes: {sorted(unknown)}")
        if any(w < 0 for w in class_mix.values()) or sum(class_mix.values()) <= 0:
            raise SynthError("class_mix weights must be nonnegative with positive sum")
        pool = sorted(class_mix)
        weights = [class_mix[c] for c in pool]
    else:
        sizes = _class_sizes(spec)
        pool = [c.class_id for c in world.classes]
        weights = [float(s) for s in sizes]

    # A handful of novel classes, roughly one per 50 expected novel events.
    novel_pool: list[ClassSpec] = []
    if novel_class_rate > 0:
        novel_rng = random.Random(f"novel:{spec.seed}:{novel_seed if novel_seed is not None else seed}")
        novel_pool = _novel_classes(
            world, novel_rng, count=1 + min(4, int(n_events * novel_class_rate) // 50))

    events: list[Event] = []
    truth: dict[str, str] = {}
    temp_tokens: list[str] = []
    for i in range(n_events):
        event_id = f"rp{seed}-{i:05d}"
        if novel_class_rate > 0 and rng.random() < novel_class_rate:
            cls = novel_pool[rng.randrange(len(novel_pool))]
        else:
            cls = by_id[rng.choices(pool, weights=weights, k=1)[0]]
        pattern = cls.patterns[rng.randrange(len(cls.patterns))]
        message = (
            SHARED_BASE_MESSAGE if cls.uses_trace
            else _render_message(rng, pattern, counters, spec.temp_token_rate, temp_tokens))
        events.append(Event(
            event_id=event_id,
            error_code=cls.error_code,
            error_message=message,
            sql_type=cls.sql_type,
            sql_subtype=cls.sql_subtype,
            request_type=cls.request_type,
            trace_excerpt=_render_trace(rng, cls) if cls.uses_trace else None,
        ))
        truth[event_id] = cls.class_id
    return events, truth
