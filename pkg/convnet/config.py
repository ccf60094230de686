from __future__ import annotations

from dataclasses import asdict, dataclass, field

from vbgdetect.errors import InvalidInputError


@dataclass
class ConvSpec:
    """One convolution stage: conv -> [ReLU] -> [max-pool] -> [dropout]."""

    filters: int
    kernel: int
    relu: bool = True
    pool: int = 0  # pool size == stride; 0 disables pooling
    dropout: float = 0.0


def _default_convs() -> list[ConvSpec]:
    return [
        ConvSpec(filters=32, kernel=3),
        ConvSpec(filters=32, kernel=5, pool=3, dropout=0.25),
        ConvSpec(filters=64, kernel=3),
        ConvSpec(filters=64, kernel=5, pool=3, dropout=0.25),
    ]


@dataclass
class Architecture:
    """Layer descriptor of the co-occurrence CNN."""

    input_bins: int = 64
    in_channels: int = 6
    convs: list[ConvSpec] = field(default_factory=_default_convs)
    dense: list[int] = field(default_factory=lambda: [256, 256])
    dense_dropout: float = 0.5  # after the last hidden dense layer
    input_scaling: bool = True  # x -> log1p(x * bins^2) before the first conv

    def __post_init__(self) -> None:
        self.convs = [c if isinstance(c, ConvSpec) else ConvSpec(**c) for c in self.convs]
        for c in self.convs:
            if c.kernel % 2 == 0:
                raise InvalidInputError("'same' padding needs odd kernels")
            if not 0.0 <= c.dropout < 1.0:
                raise InvalidInputError(f"dropout must be in [0, 1), got {c.dropout}")
        if not 0.0 <= self.dense_dropout < 1.0:
            raise InvalidInputError(f"dropout must be in [0, 1), got {self.dense_dropout}")

    @property
    def spatial_out(self) -> int:
        size = self.input_bins
        for c in self.convs:
            if c.pool:
                size //= c.pool
        return size

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> Architecture:
        return cls(**data)

    @classmethod
    def reduced(cls, dropout: bool = False) -> Architecture:
        """Two-conv network on 8x8x6 inputs, used for gradient checks."""
        return cls(
            input_bins=8,
            convs=[
                ConvSpec(filters=4, kernel=3),
                ConvSpec(filters=4, kernel=3, pool=3, dropout=0.25 if dropout else 0.0),
            ],
            dense=[8],
            dense_dropout=0.5 if dropout else 0.0,
        )


@dataclass
class TrainConfig:
    """SGD-with-momentum settings; defaults follow the reference training setup."""

    learning_rate: float = 0.001
    momentum: float = 0.9
    batch_size: int = 20
    epochs: int = 50
    seed: int = 0
    loss: str = "bce"

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise InvalidInputError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise InvalidInputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise InvalidInputError(f"epochs must be >= 0, got {self.epochs}")
        if self.loss != "bce":
            raise InvalidInputError(f"unsupported loss '{self.loss}'")
