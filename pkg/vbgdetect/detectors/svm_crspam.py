from __future__ import annotations

from pathlib import Path

import numpy as np

from vbgdetect.detectors.base import BaseDetector, FitResult
from vbgdetect.detectors.svm import SvmModel, grid_search_cv, load_svm, save_svm, svm_predict, svm_train
from vbgdetect.features.crspam import crspam1372
from vbgdetect.grids import experiment_grid
from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import DetectorKind


class SvmCrspamDetector(BaseDetector):
    """CRSPAM1372 features -> Gaussian-kernel SVM.

    Without a fixed ``C``/``gamma`` the operating point is chosen by
    stratified k-fold grid search on the training features.
    """

    kind = DetectorKind.SVM_CRSPAM

    def __init__(
        self,
        C: float | None = None,
        gamma: float | None = None,
        seed: int = 0,
        model: SvmModel | None = None,
    ):
        super().__init__(self.kind.value)
        self.C = C
        self.gamma = gamma
        self.seed = seed
        self.model = model

    def extract(self, frame: Frame) -> np.ndarray:
        return crspam1372(frame).values

    def fit(self, features, targets, validation=None) -> FitResult:
        data: dict = {}
        C, gamma = self.C, self.gamma
        if C is None or gamma is None:
            result = grid_search_cv(
                features,
                targets,
                experiment_grid.svm_c_grid if C is None else [C],
                experiment_grid.svm_gamma_grid if gamma is None else [gamma],
                folds=experiment_grid.svm_folds,
                seed=self.seed,
            )
            C, gamma = result.C, result.gamma
            data["cv_accuracy"] = result.cv_accuracy
        self.model = svm_train(features, targets, C, gamma)
        self.model.meta = {"cv_accuracy": data.get("cv_accuracy")}
        pred, _ = svm_predict(self.model, features)
        train_acc = float(np.mean(pred == np.asarray(targets)))
        data.update(C=C, gamma=gamma, support_vectors=int(self.model.alphas.shape[0]))
        self.logger.info("Fitted: C=%g gamma=%g train_acc=%.4f", C, gamma, train_acc)
        return FitResult(train_accuracy=train_acc, data=data)

    def predict(self, features: np.ndarray) -> np.ndarray:
        pred, _ = svm_predict(self.model, features)
        return pred

    def save(self, path: str | Path) -> Path:
        return save_svm(self.model, path)

    @classmethod
    def load(cls, path: str | Path) -> SvmCrspamDetector:
        model = load_svm(path)
        return cls(C=model.C, gamma=model.kernel_gamma, model=model)
