from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mira.preprocess import (
    DEFAULT_TRACE_RULES,
    RuleError,
    TraceExtractionRules,
    augment_with_trace,
    is_temporary_token,
    normalize_message,
    stopwords,
)


def test_stopword_file_keeps_error_terms():
    stop = stopwords()
    # These carry real signal in error messages and must never be dropped.
    assert "cannot" not in stop
    assert "find" not in stop
    # Ordinary function words are dropped.
    assert {"could", "not", "at", "the", "is"} <= stop


def test_normalize_basic_message():
    assert normalize_message("invalid argument: cannot determine volume id") == [
        "invalid", "argument", "cannot", "determine", "volume", "id"]


def test_normalize_empty():
    assert normalize_message("") == []


def test_normalize_drops_temporary_and_stopwords():
    got = normalize_message("Could not find table/view TABLENAME_ijh78fk at line 42, pos 7")
    assert got == ["find", "table", "view", "tablename", "line", "42", "pos", "7"]


def test_normalize_keeps_pure_numbers():
    assert normalize_message("line 42 pos 7") == ["line", "42", "pos", "7"]


def test_temporary_token_rule():
    assert is_temporary_token("1jk89")
    assert is_temporary_token("ijh78fk")
    assert not is_temporary_token("42")
    assert not is_temporary_token("table")


@given(st.text(max_size=200))
def test_normalize_never_emits_temporary_or_stop_tokens(text):
    tokens = normalize_message(text)
    stop = stopwords()
    for t in tokens:
        assert t
        assert all(c in "abcdefghijklmnopqrstuvwxyz0123456789" for c in t)
        assert t not in stop
        assert not is_temporary_token(t)


@given(st.text(max_size=200))
def test_normalize_idempotent(text):
    once = normalize_message(text)
    assert normalize_message(" ".join(once)) == once


@given(st.text(max_size=100))
def test_normalize_deterministic(text):
    assert normalize_message(text) == normalize_message(text)


# --- trace augmentation -------------------------------------------------------

RULES = TraceExtractionRules(line_patterns=(r"(?i)assertion failed",), max_appended_tokens=10)

TRACE = "\n".join([
    "checkpoint completed",
    "Assertion failed: queue drained unexpectedly",
    "session closed",
])


def test_augment_appends_matching_line():
    got = augment_with_trace("further analysis is required", TRACE, RULES)
    assert got == "further analysis is required Assertion failed: queue drained unexpectedly"


def test_augment_no_trace_is_identity():
    assert augment_with_trace("msg", None, RULES) == "msg"
    assert augment_with_trace("msg", "", RULES) == "msg"
    assert augment_with_trace("msg", "nothing relevant here", RULES) == "msg"


def test_augment_without_rules_is_identity():
    assert augment_with_trace("msg", TRACE, None) == "msg"


def test_augment_two_matching_lines_in_file_order():
    trace = "Assertion failed: alpha\nnoise\nAssertion failed: beta"
    got = augment_with_trace("m", trace, RULES)
    assert got == "m Assertion failed: alpha Assertion failed: beta"


def test_augment_empty_message_returns_extract_only():
    got = augment_with_trace("", TRACE, RULES)
    assert got == "Assertion failed: queue drained unexpectedly"


def test_augment_truncates_to_token_cap():
    rules = TraceExtractionRules(line_patterns=("Assertion",), max_appended_tokens=2)
    got = augment_with_trace("m", "Assertion failed: alpha beta gamma", rules)
    # 'Assertion' and 'failed:' each normalize to one token; the cap of 2 stops there.
    assert got == "m Assertion failed:"
    assert normalize_message(got) == ["m", "assertion", "failed"]


def test_invalid_pattern_fails_at_rule_load():
    with pytest.raises(RuleError):
        TraceExtractionRules(line_patterns=("[unclosed",))
    with pytest.raises(RuleError):
        TraceExtractionRules(line_patterns=())
    with pytest.raises(RuleError):
        TraceExtractionRules(line_patterns=("x",), max_appended_tokens=0)


def test_rules_round_trip():
    rules = TraceExtractionRules(line_patterns=("a", "b"), max_appended_tokens=5)
    assert TraceExtractionRules.from_dict(rules.to_dict()) == rules


def test_default_rules_match_assertion_lines():
    assert DEFAULT_TRACE_RULES.matching_lines("x\nAssertion failed: boom\ny") == [
        "Assertion failed: boom"]
