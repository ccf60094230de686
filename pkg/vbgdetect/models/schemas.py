from __future__ import annotations

import json
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator


class ImageFormat(str, Enum):
    """Lossless interchange or baseline JPEG."""

    PNG = "png"
    JPEG = "jpeg"


class FrameLabel(str, Enum):
    """Ground-truth class of a manifest entry."""

    REAL = "real"  # H0: real background
    VIRTUAL = "virtual"  # H1: composited virtual background
    ATTACK_VIRTUAL = "attack_virtual"  # H1: real background re-inserted as virtual

    @property
    def target(self) -> int:
        """Binary detection target: 0 for H0, 1 for H1."""
        return 0 if self is FrameLabel.REAL else 1


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class DetectorKind(str, Enum):
    CNN_COMAT = "cnn_comat"
    SVM_CRSPAM = "svm_crspam"


class ScenarioName(str, Enum):
    UNAWARE = "unaware"
    ROBUSTNESS = "robustness"
    LIGHTING = "lighting"
    AWARE_ATTACK = "aware_attack"
    MISMATCH = "mismatch"
    PREJPEG = "prejpeg"
    TABLE = "table"


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "markdown"


# ── Attacks ──


class AttackOp(str, Enum):
    MEDIAN = "median"
    AVG_BLUR = "avg_blur"
    GAMMA = "gamma"
    CLAHE = "clahe"
    GAUSS_NOISE = "gauss_noise"
    RESIZE = "resize"
    ZOOM = "zoom"
    ROTATE = "rotate"
    SHARPEN = "sharpen"
    JPEG = "jpeg"


# Name of the single positional parameter each op takes in the compact form.
PRIMARY_PARAM: dict[AttackOp, str | None] = {
    AttackOp.MEDIAN: "k",
    AttackOp.AVG_BLUR: "k",
    AttackOp.GAMMA: "gamma",
    AttackOp.CLAHE: "clip_limit",
    AttackOp.GAUSS_NOISE: "sigma",
    AttackOp.RESIZE: "scale",
    AttackOp.ZOOM: "factor",
    AttackOp.ROTATE: "degrees",
    AttackOp.SHARPEN: None,
    AttackOp.JPEG: "quality",
}


class AttackSpec(BaseModel):
    """One post-processing operation with its parameters."""

    op: AttackOp
    params: dict[str, float] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0)  # only consumed by gauss_noise

    @model_validator(mode="after")
    def _check_params(self) -> AttackSpec:
        name = PRIMARY_PARAM[self.op]
        if name is not None and name not in self.params:
            raise ValueError(f"{self.op.value} requires parameter '{name}'")
        p = self.params
        if self.op in (AttackOp.MEDIAN, AttackOp.AVG_BLUR):
            k = p["k"]
            if k != int(k) or int(k) < 1 or int(k) % 2 == 0:
                raise ValueError(f"kernel size must be a positive odd integer, got {k}")
        elif self.op is AttackOp.GAMMA and p["gamma"] <= 0:
            raise ValueError("gamma must be > 0")
        elif self.op is AttackOp.CLAHE and p["clip_limit"] <= 0:
            raise ValueError("clip_limit must be > 0")
        elif self.op is AttackOp.GAUSS_NOISE and p["sigma"] < 0:
            raise ValueError("sigma must be >= 0")
        elif self.op is AttackOp.RESIZE and p["scale"] <= 0:
            raise ValueError("scale must be > 0")
        elif self.op is AttackOp.ZOOM and p["factor"] <= 1:
            raise ValueError("zoom factor must be > 1")
        elif self.op is AttackOp.ROTATE and abs(p["degrees"]) >= 45:
            raise ValueError("|degrees| must be < 45")
        elif self.op is AttackOp.JPEG:
            q = p["quality"]
            if q != int(q) or not 1 <= int(q) <= 100:
                raise ValueError(f"JPEG quality must be an integer in [1, 100], got {q}")
        return self

    @property
    def parameter(self) -> str:
        """Primary parameter rendered for report rows ('-' when none)."""
        name = PRIMARY_PARAM[self.op]
        if name is None:
            return "-"
        return _fmt_number(self.params[name])

    @property
    def label(self) -> str:
        """Compact form, e.g. ``median:3`` or ``gauss_noise:2@7``."""
        text = self.op.value
        if PRIMARY_PARAM[self.op] is not None:
            text += f":{self.parameter}"
        if self.op is AttackOp.GAUSS_NOISE and self.seed:
            text += f"@{self.seed}"
        return text


class AttackChain(BaseModel):
    """Ordered, non-empty list of attacks applied left to right."""

    steps: list[AttackSpec] = Field(min_length=1)

    @property
    def label(self) -> str:
        return "+".join(step.label for step in self.steps)

    @property
    def operation(self) -> str:
        return "+".join(step.op.value for step in self.steps)

    @property
    def parameter(self) -> str:
        return "+".join(step.parameter for step in self.steps)

    def to_json(self) -> str:
        """Serialize as a JSON array of ``{op, params, seed}`` objects."""
        return json.dumps([step.model_dump(mode="json") for step in self.steps])

    @classmethod
    def from_json(cls, text: str) -> AttackChain:
        return cls(steps=[AttackSpec.model_validate(s) for s in json.loads(text)])


def _fmt_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


# ── Corpus ──


class SplitCounts(BaseModel):
    """Frames per split for one class."""

    train: int = Field(default=0, ge=0)
    val: int = Field(default=0, ge=0)
    test: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.train + self.val + self.test


class CorpusConfig(BaseModel):
    """Parameters of the synthetic composited corpus."""

    seed: int = 0
    width: int = Field(default=640, ge=16)
    height: int = Field(default=360, ge=16)
    source_tag: str = "synthetic_zoomlike"

    # Per-class counts: real and virtual share `counts`.
    counts: SplitCounts = SplitCounts(train=300, val=50, test=30)
    attack_counts: SplitCounts = SplitCounts()

    # Scene synthesis
    octaves: int = Field(default=4, ge=1)
    sensor_noise_sigma: float = Field(default=1.5, ge=0.0)
    # Fine luminance texture: std in intensity levels, correlation length in
    # pixels of whatever resolution the scene is rendered at.
    texture_sigma: float = Field(default=10.0, ge=0.0)
    texture_scale_px: float = Field(default=1.0, gt=0.0)
    brightness: float = Field(default=1.0, gt=0.0, le=1.0)

    # Compositing
    mask_shape: str = "ellipse"
    feather_px: float = Field(default=2.0, ge=0.0)
    background_blur_sigma: float = Field(default=0.8, ge=0.0)
    background_downscale: float = Field(default=0.25, gt=0.0, le=1.0)

    # Attack re-insertion: native-resolution sub-pixel shift plus a light blur
    attack_shift_px: float = Field(default=0.5, ge=0.0, lt=1.0)
    attack_blur_sigma: float = Field(default=0.4, ge=0.0)

    @field_validator("mask_shape")
    @classmethod
    def _known_mask(cls, v: str) -> str:
        if v not in ("ellipse", "rectangle"):
            raise ValueError(f"unknown mask shape: {v}")
        return v

    @model_validator(mode="after")
    def _non_empty(self) -> CorpusConfig:
        if self.counts.total < 1 and self.attack_counts.total < 1:
            raise ValueError("corpus must contain at least one frame")
        return self


class ManifestEntry(BaseModel):
    """One frame of a dataset, as stored in the JSON-lines manifest."""

    path: str
    label: FrameLabel
    split: Split
    source_tag: str
    scenario_tags: list[str] = Field(default_factory=list)
    content_hash: str  # 64-bit hex digest of the decoded pixels
    seed: int | None = None


# ── Harness ──


class Scenario(BaseModel):
    """One experiment: which data, which detector, which attacks."""

    name: ScenarioName
    detector: DetectorKind = DetectorKind.CNN_COMAT
    train_manifest: str = ""
    test_manifest: str = ""
    control_manifest: str = ""  # mismatch: in-distribution control set
    attack_grid: list[str] = Field(default_factory=list)
    model_path: str = ""  # trained model consumed by robustness/lighting/...
    out_model_path: str = ""  # where a trained/fine-tuned model is persisted
    seed: int = 0
    train: dict[str, Any] = Field(default_factory=dict)  # TrainConfig overrides


class EvalRow(BaseModel):
    """One accuracy figure with the confusion counts it derives from."""

    scenario: str
    detector: str
    condition: str
    parameter: str = "-"
    n_test: int = Field(gt=0)
    tp: int = Field(ge=0)
    tn: int = Field(ge=0)
    fp: int = Field(ge=0)
    fn: int = Field(ge=0)

    @model_validator(mode="after")
    def _counts_add_up(self) -> EvalRow:
        if self.tp + self.tn + self.fp + self.fn != self.n_test:
            raise ValueError("confusion counts must sum to n_test")
        return self

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n_test

    @property
    def accuracy_pct(self) -> str:
        return f"{100.0 * self.accuracy:.2f}%"


class EvalReport(BaseModel):
    rows: list[EvalRow] = Field(default_factory=list)
    notes: dict[str, str] = Field(default_factory=dict)

    def extend(self, other: EvalReport) -> EvalReport:
        self.rows.extend(other.rows)
        self.notes.update(other.notes)
        return self

    def row(self, condition: str, parameter: str = "-") -> EvalRow:
        for r in self.rows:
            if r.condition == condition and r.parameter == parameter:
                return r
        raise KeyError(f"no row for {condition} / {parameter}")


class TensorProvenance(BaseModel):
    """JSON sidecar written next to every binary feature container."""

    kind: str  # "comat" or "crspam"
    source_path: str
    content_hash: str = ""
    normalized: bool = True
    bin_count: int | None = None
    width: int
    height: int
