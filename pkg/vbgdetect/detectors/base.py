"""Base detector contract shared by the CNN and SVM branches."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import DetectorKind
from vbgdetect.services.batch import parallel_map


@dataclass
class FitResult:
    """Standardized result of a detector fit."""

    train_accuracy: float
    data: dict[str, Any] = field(default_factory=dict)


@dataclass
class Confusion:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @classmethod
    def from_predictions(cls, predicted: np.ndarray, targets: np.ndarray) -> Confusion:
        p = np.asarray(predicted).astype(bool)
        t = np.asarray(targets).astype(bool)
        return cls(
            tp=int(np.sum(p & t)),
            tn=int(np.sum(~p & ~t)),
            fp=int(np.sum(p & ~t)),
            fn=int(np.sum(~p & t)),
        )


class BaseDetector(ABC):
    """Frame-level real/virtual background classifier.

    A detector owns its feature extractor so scenario code can stay
    agnostic of which branch it is running. Targets are 0 for a real
    background and 1 for a virtual one.
    """

    kind: DetectorKind

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"detector.{name}")

    @abstractmethod
    def extract(self, frame: Frame) -> np.ndarray:
        """Feature array for one frame."""
        ...

    def extract_batch(self, frames: Sequence[Frame], desc: str | None = None) -> np.ndarray:
        return np.stack(parallel_map(self.extract, frames, desc=desc or f"{self.name}: features"))

    @abstractmethod
    def fit(
        self,
        features: np.ndarray,
        targets: np.ndarray,
        validation: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> FitResult:
        ...

    @abstractmethod
    def predict(self, features: np.ndarray) -> np.ndarray:
        """Binary targets, one per row of ``features``."""
        ...

    @abstractmethod
    def save(self, path: str | Path) -> Path:
        ...

    @classmethod
    @abstractmethod
    def load(cls, path: str | Path) -> BaseDetector:
        ...

    def confusion(self, features: np.ndarray, targets: np.ndarray) -> Confusion:
        return Confusion.from_predictions(self.predict(features), targets)
