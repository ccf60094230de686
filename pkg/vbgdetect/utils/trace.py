"""Step timings for scenario runs.

The harness wraps each phase (manifest load, feature extraction, attack,
training, evaluation) in ``RunTrace.step``. The trace is written beside a
report as ``<report>.trace.json``; it never goes into the report, whose
bytes must not depend on wall-clock time.
"""

from __future__ import annotations

import json
import logging
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

STEP_KINDS = ("load", "extract", "attack", "train", "evaluate")


def _jsonable(obj: object) -> object:
    # numpy scalars and arrays, pydantic models
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "model_dump"):
        return obj.model_dump(mode="json")
    return str(obj)


@dataclass
class StepTiming:
    label: str
    kind: str
    seconds: float = 0.0
    failed: bool = False
    output_summary: str = ""
    details: dict = field(default_factory=dict)
    error: str = ""


class RunTrace:
    """Ordered step timings of one harness invocation.

        with trace.step("train: cnn_comat", "train") as ev:
            fit = detector.fit(...)
            ev.details = fit.data
    """

    def __init__(self) -> None:
        self.steps: list[StepTiming] = []
        self._t0 = time.perf_counter()

    @contextmanager
    def step(self, label: str, kind: str):
        if kind not in STEP_KINDS:
            raise ValueError(f"unknown step kind {kind!r}")
        timing = StepTiming(label=label, kind=kind)
        start = time.perf_counter()
        try:
            yield timing
        except Exception as exc:
            timing.failed = True
            timing.error = f"{type(exc).__name__}: {exc}"
            raise
        finally:
            timing.seconds = time.perf_counter() - start
            self.steps.append(timing)
            logger.debug("%s: %s %.3fs%s", kind, label, timing.seconds, " (failed)" if timing.failed else "")

    def totals(self) -> dict[str, float]:
        """Seconds spent per step kind."""
        out: dict[str, float] = defaultdict(float)
        for s in self.steps:
            out[s.kind] += s.seconds
        return dict(out)

    def write(self, report_path: str | Path) -> Path:
        report_path = Path(report_path)
        path = report_path.with_name(report_path.name + ".trace.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "elapsed_seconds": round(time.perf_counter() - self._t0, 3),
            "totals": {k: round(v, 3) for k, v in self.totals().items()},
            "steps": [asdict(s) for s in self.steps],
        }
        path.write_text(json.dumps(payload, indent=2, default=_jsonable), encoding="utf-8")
        logger.info("Trace written to %s (%d steps)", path, len(self.steps))
        return path

    def __len__(self) -> int:
        return len(self.steps)
