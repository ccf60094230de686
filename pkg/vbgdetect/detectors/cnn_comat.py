from __future__ import annotations

from pathlib import Path

import numpy as np

from convnet import Architecture, CnnModel, TrainConfig, load_model, save_model, train
from vbgdetect.config import settings
from vbgdetect.detectors.base import BaseDetector, FitResult
from vbgdetect.features.comat import prepare_cnn_input
from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import DetectorKind


class CnnComatDetector(BaseDetector):
    """Six co-mat tensor -> small CNN.

    Calling ``fit`` again continues SGD from the current weights, which is
    how the aware detector is fine-tuned from the unaware one.
    """

    kind = DetectorKind.CNN_COMAT

    def __init__(
        self,
        bins: int | None = None,
        train_config: TrainConfig | None = None,
        arch: Architecture | None = None,
        model: CnnModel | None = None,
    ):
        super().__init__(self.kind.value)
        if model is not None:
            arch = model.arch
        bins = bins or (arch.input_bins if arch else settings.COMAT_BINS)
        self.arch = arch or Architecture(input_bins=bins)
        self.bins = self.arch.input_bins
        self.train_config = train_config or TrainConfig()
        self.model = model or CnnModel(self.arch, seed=self.train_config.seed)
        self.history = None

    def extract(self, frame: Frame) -> np.ndarray:
        return prepare_cnn_input(frame, self.bins).planes.astype(np.float32)

    def fit(self, features, targets, validation=None) -> FitResult:
        self.model, self.history = train(
            self.model, features, targets, self.train_config, validation=validation, progress=True
        )
        if self.history.records:
            last = self.history.records[-1]
            train_acc = last.train_acc
        else:
            _, train_acc = self.model.evaluate(features, targets)
        self.logger.info("Fitted on %d tensors: train_acc=%.4f", len(targets), train_acc)
        return FitResult(
            train_accuracy=train_acc,
            data={"epochs": len(self.history.records), "bins": self.bins},
        )

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return self.model.predict_proba(features)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.predict_proba(features) >= 0.5).astype(np.int64)

    def save(self, path: str | Path) -> Path:
        path = save_model(self.model, path)
        if self.history is not None and self.history.records:
            self.history.to_csv(Path(path).with_suffix(".history.csv"))
        return path

    @classmethod
    def load(cls, path: str | Path, train_config: TrainConfig | None = None) -> CnnComatDetector:
        return cls(model=load_model(path), train_config=train_config)
