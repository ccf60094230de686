"""Small numpy CNN for binary classification of co-occurrence tensors."""

from convnet.config import Architecture, ConvSpec, TrainConfig
from convnet.gradcheck import GradCheckReport, grad_check
from convnet.network import CnnModel, backward, bce_loss, forward
from convnet.serialization import load_model, save_model
from convnet.trainer import EpochRecord, TrainHistory, train

__all__ = [
    "Architecture",
    "CnnModel",
    "ConvSpec",
    "EpochRecord",
    "GradCheckReport",
    "TrainConfig",
    "TrainHistory",
    "backward",
    "bce_loss",
    "forward",
    "grad_check",
    "load_model",
    "save_model",
    "train",
]
