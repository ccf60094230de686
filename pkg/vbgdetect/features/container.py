"""Binary feature containers, JSON provenance sidecars and the feature CSV.

Binary layout: 16-byte little-endian header ``magic(4) | a(u32) | width(u32) |
height(u32)`` followed by float32 values. For ``CMT6`` files ``a`` is the bin
count and values are plane-major then row-major; for ``CRSP`` files ``a`` is
the feature length.
"""

from __future__ import annotations

import csv
import logging
import struct
from pathlib import Path

import numpy as np

from vbgdetect.errors import FrameFormatError, MissingArtifactError
from vbgdetect.features.comat import CoMatTensor
from vbgdetect.features.crspam import CRSPAM_DIM, FeatureVector1372
from vbgdetect.models.schemas import TensorProvenance

logger = logging.getLogger(__name__)

COMAT_MAGIC = b"CMT6"
CRSPAM_MAGIC = b"CRSP"
_HEADER = struct.Struct("<4sIII")


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def _write(path: Path, magic: bytes, a: int, width: int, height: int, values: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(magic, a, width, height))
        f.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def _read(path: Path, magic: bytes) -> tuple[int, int, int, np.ndarray]:
    if not path.is_file():
        raise MissingArtifactError(f"No feature file at {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FrameFormatError(f"{path}: truncated header")
    got, a, width, height = _HEADER.unpack_from(raw)
    if got != magic:
        raise FrameFormatError(f"{path}: bad magic {got!r}, expected {magic!r}")
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    return a, width, height, values


def write_tensor(t: CoMatTensor, path: str | Path, provenance: TensorProvenance) -> Path:
    path = Path(path)
    _write(path, COMAT_MAGIC, t.bin_count, t.width, t.height, t.planes)
    _sidecar(path).write_text(provenance.model_dump_json(indent=2), encoding="utf-8")
    return path


def read_tensor(path: str | Path) -> tuple[CoMatTensor, TensorProvenance | None]:
    path = Path(path)
    bins, width, height, values = _read(path, COMAT_MAGIC)
    if values.size != 6 * bins * bins:
        raise FrameFormatError(f"{path}: expected {6 * bins * bins} values, found {values.size}")
    provenance = None
    if _sidecar(path).is_file():
        provenance = TensorProvenance.model_validate_json(_sidecar(path).read_text(encoding="utf-8"))
    normalized = provenance.normalized if provenance else True
    return CoMatTensor(values.reshape(6, bins, bins), normalized, width, height), provenance


def write_crspam(v: FeatureVector1372, path: str | Path, provenance: TensorProvenance) -> Path:
    path = Path(path)
    _write(path, CRSPAM_MAGIC, CRSPAM_DIM, provenance.width, provenance.height, v.values)
    _sidecar(path).write_text(provenance.model_dump_json(indent=2), encoding="utf-8")
    return path


def read_crspam(path: str | Path) -> FeatureVector1372:
    length, _w, _h, values = _read(Path(path), CRSPAM_MAGIC)
    if length != values.size:
        raise FrameFormatError(f"{path}: header says {length} values, found {values.size}")
    return FeatureVector1372(values)


# ── Feature CSV ──


def csv_header() -> list[str]:
    return ["path", "label"] + [f"f{i:04d}" for i in range(CRSPAM_DIM)]


def write_feature_csv(rows: list[tuple[str, str, np.ndarray]], path: str | Path) -> Path:
    """Write ``(path, label, vector)`` rows; floats use shortest round-trip repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(csv_header())
        for src, label, vec in rows:
            writer.writerow([src, label, *(repr(float(x)) for x in vec)])
    logger.info("Wrote %d feature rows to %s", len(rows), path)
    return path


def read_feature_csv(path: str | Path) -> list[tuple[str, str, np.ndarray]]:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"No feature CSV at {path}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != csv_header():
            raise FrameFormatError(f"{path}: unexpected CSV header")
        return [(r[0], r[1], np.array([float(x) for x in r[2:]])) for r in reader]
