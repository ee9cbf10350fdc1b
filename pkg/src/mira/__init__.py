"""Root-cause triage for failed replay events.

KNN over a weighted mixed categorical/text distance with calibrated
uncertainty, an operator-correction loop, and retraining with atomic
model swaps.
"""

from .types import (
    Classification,
    Event,
    FeatureWeights,
    Label,
    LabeledEvent,
    LabelKind,
    Neighbor,
    Thresholds,
    ValidationError,
    validate_event,
)
from .config import DownsampleConfig, EngineConfig, load_config, save_config
from .classifier import Model, classify, classify_batch, fit
from .store import Correction, TrainingStore, downsample, load_model, save_model

__all__ = [
    "Classification",
    "Correction",
    "DownsampleConfig",
    "EngineConfig",
    "Event",
    "FeatureWeights",
    "Label",
    "LabelKind",
    "LabeledEvent",
    "Model",
    "Neighbor",
    "Thresholds",
    "TrainingStore",
    "ValidationError",
    "classify",
    "classify_batch",
    "downsample",
    "fit",
    "load_config",
    "load_model",
    "save_config",
    "save_model",
    "validate_event",
]
