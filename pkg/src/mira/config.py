"""Engine configuration shared by the CLI and the service."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .preprocess import DEFAULT_TRACE_RULES, TraceExtractionRules
from .types import FeatureWeights, Thresholds, ValidationError


@dataclass(frozen=True)
class DownsampleConfig:
    """Leader-clustering settings for trimming oversized classes."""

    group_distance_threshold: float = 0.15
    per_group_cap: int = 50

    def __post_init__(self) -> None:
        if not 0.0 <= self.group_distance_threshold <= 1.0:
            raise ValidationError("group_distance_threshold must be in [0, 1]",
                                  field="group_distance_threshold")
        if self.per_group_cap < 1:
            raise ValidationError("per_group_cap must be at least 1", field="per_group_cap")

    def to_dict(self) -> dict[str, Any]:
        return {
            "group_distance_threshold": self.group_distance_threshold,
            "per_group_cap": self.per_group_cap,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "DownsampleConfig":
        return cls(
            group_distance_threshold=float(raw.get("group_distance_threshold", 0.15)),
            per_group_cap=int(raw.get("per_group_cap", 50)),
        )


@dataclass(frozen=True)
class EngineConfig:
    """Everything tunable about training and classification."""

    weights: FeatureWeights = field(default_factory=FeatureWeights)
    k: int = 11
    min_term_frequency: int = 3
    thresholds: Thresholds = field(default_factory=Thresholds)
    trace_rules: TraceExtractionRules | None = DEFAULT_TRACE_RULES
    downsample: DownsampleConfig = field(default_factory=DownsampleConfig)
    downsample_on_retrain: bool = False

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError("k must be at least 1", field="k")
        if self.min_term_frequency < 1:
            raise ValidationError("min_term_frequency must be positive",
                                  field="min_term_frequency")

    def to_dict(self) -> dict[str, Any]:
        return {
            "weights": self.weights.to_dict(),
            "k": self.k,
            "min_term_frequency": self.min_term_frequency,
            "thresholds": self.thresholds.to_dict(),
            "trace_rules": self.trace_rules.to_dict() if self.trace_rules else None,
            "downsample": self.downsample.to_dict(),
            "downsample_on_retrain": self.downsample_on_retrain,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "EngineConfig":
        trace_raw = raw.get("trace_rules", "unset")
        if trace_raw == "unset":
            trace_rules = DEFAULT_TRACE_RULES
        elif trace_raw is None:
            trace_rules = None
        else:
            trace_rules = TraceExtractionRules.from_dict(trace_raw)
        return cls(
            weights=FeatureWeights.from_dict(raw["weights"]) if "weights" in raw else FeatureWeights(),
            k=int(raw.get("k", 11)),
            min_term_frequency=int(raw.get("min_term_frequency", 3)),
            thresholds=Thresholds.from_dict(raw["thresholds"]) if "thresholds" in raw else Thresholds(),
            trace_rules=trace_rules,
            downsample=DownsampleConfig.from_dict(raw.get("downsample", {})),
            downsample_on_retrain=bool(raw.get("downsample_on_retrain", False)),
        )


def load_config(path: str | Path) -> EngineConfig:
    with open(path, encoding="utf-8") as fp:
        return EngineConfig.from_dict(json.load(fp))


def save_config(config: EngineConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(config.to_dict(), fp, indent=2, sort_keys=True)
        fp.write("\n")
