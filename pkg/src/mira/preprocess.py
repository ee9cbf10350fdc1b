"""Error-message normalization and trace-excerpt augmentation.

Normalization turns raw message text into the token stream the
vectorizer consumes: lowercase, split on every non-alphanumeric
character, drop stopwords, keep pure numbers, and drop generated
temporary names (tokens mixing letters and digits, e.g. a temp-table
suffix), which are unique per event and carry no class signal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_SPLIT_RE = re.compile(r"[^a-z0-9]+")
_HAS_ALPHA_RE = re.compile(r"[a-z]")
_HAS_DIGIT_RE = re.compile(r"[0-9]")

STOPWORDS_RESOURCE = "stopwords.txt"


class RuleError(ValueError):
    """Raised at rule-load time for an invalid trace line pattern."""


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """The committed stopword list: one lowercase token per line, UTF-8."""
    text = resources.files("mira.data").joinpath(STOPWORDS_RESOURCE).read_text("utf-8")
    return frozenset(w for w in text.split("\n") if w)


def is_temporary_token(token: str) -> bool:
    """True for tokens containing both letters and digits ('1jk89', 'ijh78fk')."""
    return bool(_HAS_ALPHA_RE.search(token)) and bool(_HAS_DIGIT_RE.search(token))


def normalize_message(text: str) -> list[str]:
    """Normalize message text into a token list.

    Total function: any input (including empty) yields a list of tokens
    drawn from [a-z0-9]+, in original order, with stopwords and
    mixed-letter-digit temporary names removed. Pure numbers survive;
    they often encode error locations (line/pos) that identify a root
    cause.
    """

    stop = stopwords()
    out: list[str] = []
    for token in _SPLIT_RE.split(text.lower()):
        if not token or token in stop:
            continue
        if is_temporary_token(token):
            continue
        out.append(token)
    return out


@dataclass(frozen=True)
class TraceExtractionRules:
    """Which trace lines to mine for extra message tokens.

    ``line_patterns`` are Python regular expressions searched against
    each trace line; a line matching any pattern is appended (in file
    order) to the message. The combined appended text is truncated to
    ``max_appended_tokens`` after normalization.
    """

    line_patterns: tuple[str, ...]
    max_appended_tokens: int = 30

    def __post_init__(self) -> None:
        if not self.line_patterns:
            raise RuleError("at least one trace line pattern is required")
        if not isinstance(self.line_patterns, tuple):
            object.__setattr__(self, "line_patterns", tuple(self.line_patterns))
        if self.max_appended_tokens < 1:
            raise RuleError("max_appended_tokens must be positive")
        try:
            compiled = tuple(re.compile(p) for p in self.line_patterns)
        except re.error as exc:
            raise RuleError(f"invalid trace line pattern: {exc}") from exc
        object.__setattr__(self, "_compiled", compiled)

    def matching_lines(self, trace: str) -> list[str]:
        compiled: tuple[re.Pattern[str], ...] = self._compiled  # type: ignore[attr-defined]
        return [
            line for line in trace.splitlines()
            if any(p.search(line) for p in compiled)
        ]

    def to_dict(self) -> dict:
        return {
            "line_patterns": list(self.line_patterns),
            "max_appended_tokens": self.max_appended_tokens,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TraceExtractionRules":
        return cls(
            line_patterns=tuple(raw["line_patterns"]),
            max_appended_tokens=int(raw.get("max_appended_tokens", 30)),
        )


DEFAULT_TRACE_RULES = TraceExtractionRules(
    line_patterns=(r"(?i)assertion\s+failed", r"(?i)fatal\s+error", r"(?i)exception"),
    max_appended_tokens=30,
)


def augment_with_trace(message: str, trace: str | None, rules: TraceExtractionRules | None) -> str:
    """Append matching trace-line text to the message.

    Returns the message unchanged when there is no trace, no rules, or
    no matching line. Matching lines are joined in file order with
    single spaces; the appended portion is truncated so it contributes
    at most ``rules.max_appended_tokens`` tokens after normalization
    (the cap is over tokens that will actually reach the vectorizer).
    """

    if rules is None or not trace:
        return message
    lines = rules.matching_lines(trace)
    if not lines:
        return message
    kept: list[str] = []
    count = 0
    for word in " ".join(lines).split():
        n = len(normalize_message(word))
        if count + n > rules.max_appended_tokens:
            break
        kept.append(word)
        count += n
    if not kept:
        return message
    suffix = " ".join(kept)
    return f"{message} {suffix}" if message else suffix
