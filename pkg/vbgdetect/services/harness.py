"""Scenario runner: trains detectors and produces accuracy reports.

Every run checks that no test frame shares a content hash with a training
frame before any detector is touched. Attacks and lighting changes are
applied to the test set only, except in the aware scenario where attack
frames are part of the training data.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from convnet import TrainConfig
from vbgdetect.attacks.chain import apply_chain, parse_chain
from vbgdetect.config import settings
from vbgdetect.detectors import BaseDetector, CnnComatDetector, SvmCrspamDetector, load_detector
from vbgdetect.errors import InvalidInputError, MissingArtifactError
from vbgdetect.grids import ExperimentGrid, experiment_grid
from vbgdetect.imaging.codec import load_frame
from vbgdetect.imaging.frame import Frame
from vbgdetect.models.schemas import (
    AttackChain,
    DetectorKind,
    EvalReport,
    EvalRow,
    FrameLabel,
    ManifestEntry,
    Scenario,
    ScenarioName,
    Split,
)
from vbgdetect.services.batch import parallel_map
from vbgdetect.services.corpus import entry_path, lighting_proxy, load_manifest
from vbgdetect.utils.hashing import hash_key
from vbgdetect.utils.trace import RunTrace

logger = logging.getLogger(__name__)

CLEAN_LABELS = (FrameLabel.REAL, FrameLabel.VIRTUAL)
ATTACK_LABELS = (FrameLabel.REAL, FrameLabel.ATTACK_VIRTUAL)
MODEL_SUFFIX = {DetectorKind.CNN_COMAT: ".vbgm", DetectorKind.SVM_CRSPAM: ".svm.json"}


@dataclass
class FrameSet:
    """Decoded frames of one manifest subset with their binary targets."""

    entries: list[ManifestEntry]
    frames: list[Frame]

    @property
    def targets(self) -> np.ndarray:
        return np.array([e.label.target for e in self.entries], dtype=np.int64)

    @property
    def hashes(self) -> set[str]:
        return {e.content_hash for e in self.entries}

    @property
    def frame_keys(self) -> list[int]:
        return [hash_key(e.content_hash) for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def select(
    entries: Sequence[ManifestEntry],
    splits: Sequence[Split] | None = None,
    labels: Sequence[FrameLabel] | None = None,
    source_tag: str | None = None,
) -> list[ManifestEntry]:
    return [
        e
        for e in entries
        if (splits is None or e.split in splits)
        and (labels is None or e.label in labels)
        and (source_tag is None or e.source_tag == source_tag)
    ]


def check_disjoint(train: FrameSet | None, test: FrameSet) -> None:
    if train is None:
        return
    overlap = train.hashes & test.hashes
    if overlap:
        raise InvalidInputError(
            f"{len(overlap)} test frame(s) also appear in the training set (e.g. {sorted(overlap)[0]})"
        )


def require_both_classes(fs: FrameSet, what: str) -> None:
    if len(fs) == 0:
        raise InvalidInputError(f"{what} set is empty")
    if len(np.unique(fs.targets)) < 2:
        raise InvalidInputError(f"{what} set contains a single class")


class ScenarioRunner:
    """Runs one scenario at a time; holds the shared trace and output directory."""

    def __init__(
        self,
        work_dir: str | Path | None = None,
        grid: ExperimentGrid | None = None,
        trace: RunTrace | None = None,
    ):
        self.work_dir = Path(work_dir or settings.WORK_DIR)
        self.grid = grid or experiment_grid
        self.trace = trace if trace is not None else RunTrace()

    # ── Data ──

    def load_set(
        self,
        manifest: str | Path,
        splits: Sequence[Split] | None = None,
        labels: Sequence[FrameLabel] | None = None,
        source_tag: str | None = None,
    ) -> FrameSet:
        if not manifest:
            raise MissingArtifactError("scenario does not name the manifest it needs")
        with self.trace.step(f"load: {manifest} {[s.value for s in splits or []]}", "load") as ev:
            entries = select(load_manifest(manifest), splits, labels, source_tag)
            frames = parallel_map(lambda e: load_frame(entry_path(e, manifest)), entries, desc="load")
            ev.output_summary = f"{len(entries)} frames"
        return FrameSet(entries, frames)

    def _train_and_test(self, scn: Scenario, labels: Sequence[FrameLabel]) -> tuple[FrameSet, FrameSet, FrameSet]:
        train = self.load_set(scn.train_manifest, [Split.TRAIN], labels)
        val = self.load_set(scn.train_manifest, [Split.VAL], labels)
        test = self.load_set(scn.test_manifest or scn.train_manifest, [Split.TEST], labels)
        check_disjoint(train, test)
        require_both_classes(train, "training")
        require_both_classes(test, "test")
        return train, val, test

    def _optional_train_set(self, scn: Scenario) -> FrameSet | None:
        if not scn.train_manifest:
            return None
        return self.load_set(scn.train_manifest, [Split.TRAIN])

    # ── Detectors ──

    def new_detector(self, scn: Scenario) -> BaseDetector:
        if scn.detector is DetectorKind.CNN_COMAT:
            return CnnComatDetector(bins=scn.train.get("bins"), train_config=self._cnn_config(scn))
        return SvmCrspamDetector(C=scn.train.get("C"), gamma=scn.train.get("gamma"), seed=scn.seed)

    def _cnn_config(self, scn: Scenario) -> TrainConfig:
        overrides = {k: v for k, v in scn.train.items() if k in TrainConfig.__dataclass_fields__}
        return TrainConfig(**{"seed": scn.seed, **overrides})

    def load_model(self, scn: Scenario) -> BaseDetector:
        path = Path(scn.model_path)
        if not scn.model_path or not path.exists():
            raise MissingArtifactError(f"trained model not found: {scn.model_path or '<unset>'}")
        detector = load_detector(scn.detector, path)
        if isinstance(detector, CnnComatDetector):
            detector.train_config = self._cnn_config(scn)
        return detector

    def model_out_path(self, scn: Scenario, stem: str) -> Path:
        if scn.out_model_path:
            return Path(scn.out_model_path)
        return self.work_dir / f"{scn.detector.value}_{stem}{MODEL_SUFFIX[scn.detector]}"

    # ── Evaluation ──

    def features(
        self, detector: BaseDetector, fs: FrameSet, chain: AttackChain | None = None, label: str = "clean"
    ) -> np.ndarray:
        with self.trace.step(f"extract: {label}", "extract") as ev:
            if chain is None:
                frames = fs.frames
            else:
                jobs = list(zip(fs.frames, fs.frame_keys))
                frames = parallel_map(lambda job: apply_chain(job[0], chain, job[1]), jobs, desc=label)
            feats = detector.extract_batch(frames, desc=f"{detector.name}: {label}")
            ev.output_summary = f"{feats.shape}"
        return feats

    def evaluate(
        self,
        scenario: ScenarioName | str,
        detector: BaseDetector,
        features: np.ndarray,
        targets: np.ndarray,
        condition: str,
        parameter: str = "-",
    ) -> EvalRow:
        with self.trace.step(f"evaluate: {condition} {parameter}", "evaluate"):
            c = detector.confusion(features, targets)
        row = EvalRow(
            scenario=ScenarioName(scenario).value,
            detector=detector.name,
            condition=condition,
            parameter=parameter,
            n_test=len(targets),
            tp=c.tp,
            tn=c.tn,
            fp=c.fp,
            fn=c.fn,
        )
        logger.info("%s %s %s: %s (n=%d)", row.scenario, condition, parameter, row.accuracy_pct, row.n_test)
        return row

    # ── Scenarios ──

    def run_unaware(self, scn: Scenario) -> EvalReport:
        """Train on clean real/virtual frames and report clean test accuracy."""
        train, val, test = self._train_and_test(scn, CLEAN_LABELS)
        detector = self.new_detector(scn)
        x_train = self.features(detector, train, label="train")
        validation = (self.features(detector, val, label="val"), val.targets) if len(val) else None
        with self.trace.step(f"train: {detector.name}", "train") as ev:
            fit = detector.fit(x_train, train.targets, validation)
            ev.details = fit.data
        out = detector.save(self.model_out_path(scn, "unaware"))

        report = EvalReport()
        report.rows.append(self.evaluate(ScenarioName.UNAWARE, detector, self.features(detector, test), test.targets, "clean"))
        report.notes["model_path"] = out.as_posix()
        report.notes["train_accuracy"] = f"{100.0 * fit.train_accuracy:.2f}%"
        report.notes.update({k: f"{v:g}" if isinstance(v, float) else str(v) for k, v in fit.data.items()})
        return report

    def run_robustness(self, scn: Scenario) -> EvalReport:
        """Attack the clean test set with every chain of the grid; one row per chain."""
        detector = self.load_model(scn)
        test = self.load_set(scn.test_manifest, [Split.TEST], CLEAN_LABELS)
        check_disjoint(self._optional_train_set(scn), test)
        require_both_classes(test, "test")

        report = EvalReport()
        report.rows.append(self.evaluate(ScenarioName.ROBUSTNESS, detector, self.features(detector, test), test.targets, "clean"))
        for text in scn.attack_grid or self.grid.robustness_chains:
            chain = parse_chain(text)
            feats = self.features(detector, test, chain, label=chain.label)
            report.rows.append(
                self.evaluate(ScenarioName.ROBUSTNESS, detector, feats, test.targets, chain.operation, chain.parameter)
            )
        return report

    def run_lighting(self, scn: Scenario) -> EvalReport:
        """Global brightness scaling of the test set as a lighting-condition proxy."""
        detector = self.load_model(scn)
        test = self.load_set(scn.test_manifest, [Split.TEST], CLEAN_LABELS)
        check_disjoint(self._optional_train_set(scn), test)
        require_both_classes(test, "test")

        report = EvalReport()
        for factor in self.grid.lighting_factors:
            with self.trace.step(f"lighting: {factor:g}", "attack"):
                dimmed = FrameSet(test.entries, parallel_map(lambda f: lighting_proxy(f, factor), test.frames))
            feats = self.features(detector, dimmed, label=f"lighting {factor:g}")
            report.rows.append(
                self.evaluate(ScenarioName.LIGHTING, detector, feats, test.targets, "lighting", f"{factor:g}")
            )
        return report

    def run_aware(self, scn: Scenario) -> EvalReport:
        """Fine-tune the unaware model on a training set augmented with attack frames."""
        detector = self.load_model(scn)
        train, val, _ = self._train_and_test(scn, None)
        if not any(e.label is FrameLabel.ATTACK_VIRTUAL for e in train.entries):
            raise InvalidInputError("aware training needs attack_virtual frames in the training split")
        attack_test = self.load_set(scn.test_manifest or scn.train_manifest, [Split.TEST], ATTACK_LABELS)
        clean_test = self.load_set(scn.test_manifest or scn.train_manifest, [Split.TEST], CLEAN_LABELS)
        require_both_classes(attack_test, "attack test")

        report = EvalReport()
        x_attack = self.features(detector, attack_test, label="attack test")
        report.rows.append(
            self.evaluate(ScenarioName.AWARE_ATTACK, detector, x_attack, attack_test.targets, "unaware_on_attack")
        )

        x_train = self.features(detector, train, label="train")
        validation = (self.features(detector, val, label="val"), val.targets) if len(val) else None
        with self.trace.step(f"fine-tune: {detector.name}", "train") as ev:
            fit = detector.fit(x_train, train.targets, validation)
            ev.details = fit.data
        out = detector.save(self.model_out_path(scn, "aware"))

        report.rows.append(self.evaluate(ScenarioName.AWARE_ATTACK, detector, x_train, train.targets, "aware_train"))
        report.rows.append(self.evaluate(ScenarioName.AWARE_ATTACK, detector, x_attack, attack_test.targets, "aware_test"))
        if len(clean_test) and len(np.unique(clean_test.targets)) == 2:
            x_clean = self.features(detector, clean_test, label="clean test")
            report.rows.append(
                self.evaluate(ScenarioName.AWARE_ATTACK, detector, x_clean, clean_test.targets, "aware_clean")
            )
        report.notes["model_path"] = out.as_posix()
        return report

    def run_mismatch(self, scn: Scenario) -> EvalReport:
        """Cross-source accuracy, one row per test source tag plus a same-source control row."""
        detector = self.load_model(scn)
        control_manifest = scn.control_manifest or scn.train_manifest
        train_tags = set()
        if scn.train_manifest:
            train_tags = {e.source_tag for e in load_manifest(scn.train_manifest)}
        test_entries = select(load_manifest(scn.test_manifest), [Split.TEST])
        test_tags = sorted({e.source_tag for e in test_entries})
        if not test_tags:
            raise InvalidInputError("mismatch test manifest has no test frames")
        overlap = train_tags & set(test_tags)
        if overlap:
            raise InvalidInputError(f"source tags {sorted(overlap)} appear in both training and test data")

        report = EvalReport()
        train_set = self._optional_train_set(scn)
        if control_manifest:
            control = self.load_set(control_manifest, [Split.TEST])
            check_disjoint(train_set, control)
            require_both_classes(control, "control")
            tag = control.entries[0].source_tag
            report.rows.append(
                self.evaluate(ScenarioName.MISMATCH, detector, self.features(detector, control), control.targets, "control", tag)
            )
        for tag in test_tags:
            fs = self.load_set(scn.test_manifest, [Split.TEST], source_tag=tag)
            check_disjoint(train_set, fs)
            report.rows.append(
                self.evaluate(ScenarioName.MISMATCH, detector, self.features(detector, fs, label=tag), fs.targets, "mismatch", tag)
            )
        return report

    def run_prejpeg(self, scn: Scenario) -> EvalReport:
        """Median filter followed by JPEG at each quality factor, plus a QF 100 control."""
        detector = self.load_model(scn)
        test = self.load_set(scn.test_manifest, [Split.TEST])
        check_disjoint(self._optional_train_set(scn), test)
        require_both_classes(test, "test")

        k = self.grid.prejpeg_median_kernel
        qualities = [*self.grid.prejpeg_qualities, self.grid.prejpeg_control_quality]
        report = EvalReport()
        for quality in qualities:
            chain = parse_chain(f"median:{k}+jpeg:{quality}")
            feats = self.features(detector, test, chain, label=chain.label)
            condition = "control" if quality == self.grid.prejpeg_control_quality else chain.operation
            report.rows.append(
                self.evaluate(ScenarioName.PREJPEG, detector, feats, test.targets, condition, chain.parameter)
            )
        return report

    def run_table(self, scn: Scenario) -> EvalReport:
        """Headline summary: unaware co-mat CNN, unaware CRSPAM SVM, aware co-mat CNN."""
        out_dir = self.work_dir / "table"
        report = EvalReport()
        summary = EvalReport()

        for kind in (DetectorKind.CNN_COMAT, DetectorKind.SVM_CRSPAM):
            unaware = scn.model_copy(
                update={"detector": kind, "out_model_path": str(out_dir / f"{kind.value}_unaware{MODEL_SUFFIX[kind]}")}
            )
            summary.extend(self.run_unaware(unaware))
            report.rows.append(summary.rows[-1].model_copy(update={"scenario": "table", "condition": "unaware"}))

        cnn_path = out_dir / f"{DetectorKind.CNN_COMAT.value}_unaware{MODEL_SUFFIX[DetectorKind.CNN_COMAT]}"
        aware = scn.model_copy(
            update={
                "detector": DetectorKind.CNN_COMAT,
                "model_path": str(cnn_path),
                "out_model_path": str(out_dir / f"cnn_comat_aware{MODEL_SUFFIX[DetectorKind.CNN_COMAT]}"),
            }
        )
        aware_report = self.run_aware(aware)
        for condition in ("aware_train", "aware_test"):
            report.rows.append(aware_report.row(condition).model_copy(update={"scenario": "table"}))
        return report

    def run(self, scn: Scenario) -> EvalReport:
        handlers = {
            ScenarioName.UNAWARE: self.run_unaware,
            ScenarioName.ROBUSTNESS: self.run_robustness,
            ScenarioName.LIGHTING: self.run_lighting,
            ScenarioName.AWARE_ATTACK: self.run_aware,
            ScenarioName.MISMATCH: self.run_mismatch,
            ScenarioName.PREJPEG: self.run_prejpeg,
            ScenarioName.TABLE: self.run_table,
        }
        logger.info("Running scenario %s (%s, seed %d)", scn.name.value, scn.detector.value, scn.seed)
        return handlers[scn.name](scn)
