"""Detectors: co-mat CNN and CRSPAM SVM behind one contract."""

from __future__ import annotations

from pathlib import Path

from vbgdetect.detectors.base import BaseDetector, Confusion, FitResult
from vbgdetect.detectors.cnn_comat import CnnComatDetector
from vbgdetect.detectors.svm_crspam import SvmCrspamDetector
from vbgdetect.models.schemas import DetectorKind

_REGISTRY: dict[DetectorKind, type[BaseDetector]] = {
    DetectorKind.CNN_COMAT: CnnComatDetector,
    DetectorKind.SVM_CRSPAM: SvmCrspamDetector,
}


def detector_class(kind: DetectorKind | str) -> type[BaseDetector]:
    return _REGISTRY[DetectorKind(kind)]


def load_detector(kind: DetectorKind | str, path: str | Path) -> BaseDetector:
    return detector_class(kind).load(path)


__all__ = [
    "BaseDetector",
    "CnnComatDetector",
    "Confusion",
    "FitResult",
    "SvmCrspamDetector",
    "detector_class",
    "load_detector",
]
