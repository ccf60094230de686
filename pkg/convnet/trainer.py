"""Mini-batch SGD with momentum and a per-epoch history."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from tqdm import tqdm

from convnet.config import TrainConfig
from convnet.network import CnnModel
from vbgdetect.errors import InvalidInputError

logger = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float | None = None
    val_acc: float | None = None


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(EpochRecord.__dataclass_fields__))
            writer.writeheader()
            for record in self.records:
                writer.writerow(asdict(record))


def sgd_momentum_step(model: CnnModel, velocity: dict[str, np.ndarray], lr: float, momentum: float) -> None:
    """``v = m * v - lr * g``; ``w += v``. Gradients come from the last backward."""
    for (name, param), (_, grad) in zip(model.parameters(), model.gradients()):
        v = velocity.setdefault(name, np.zeros_like(param))
        v *= momentum
        v -= lr * grad
        param += v
    model.bump_version()


def train(
    model: CnnModel,
    x: np.ndarray,
    y: np.ndarray,
    config: TrainConfig | None = None,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
    progress: bool = False,
) -> tuple[CnnModel, TrainHistory]:
    """Train in place; the same seed, data and config give bitwise-identical weights."""
    config = config or TrainConfig()
    x = model.as_batch(x)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape[0] == 0:
        raise InvalidInputError("training set is empty")
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError(f"{y.shape[0]} labels for {x.shape[0]} samples")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise InvalidInputError("training set must contain both labels")

    rng = np.random.default_rng(config.seed)
    velocity: dict[str, np.ndarray] = {}
    history = TrainHistory()
    n = x.shape[0]

    logger.info(
        "Training on %d samples: epochs=%d batch=%d lr=%g momentum=%g",
        n, config.epochs, config.batch_size, config.learning_rate, config.momentum,
    )
    epochs = tqdm(range(1, config.epochs + 1), desc="epochs", disable=not progress)
    for epoch in epochs:
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            model.forward(xb, "train", rng)
            model.backward(xb, yb)
            sgd_momentum_step(model, velocity, config.learning_rate, config.momentum)

        train_loss, train_acc = model.evaluate(x, y)
        record = EpochRecord(epoch=epoch, train_loss=train_loss, train_acc=train_acc)
        if validation is not None and len(validation[1]):
            record.val_loss, record.val_acc = model.evaluate(*validation)
        history.records.append(record)
        logger.info(
            "Epoch %d/%d train_loss=%.4f train_acc=%.4f val_loss=%s val_acc=%s",
            epoch, config.epochs, train_loss, train_acc,
            "-" if record.val_loss is None else f"{record.val_loss:.4f}",
            "-" if record.val_acc is None else f"{record.val_acc:.4f}",
        )
    return model, history
