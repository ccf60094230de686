"""Model file: ``VBGM`` magic, version, architecture JSON, little-endian float32 weights."""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path

import numpy as np

from convnet.config import Architecture
from convnet.network import CnnModel
from vbgdetect.errors import FrameFormatError, MissingArtifactError

logger = logging.getLogger(__name__)

MAGIC = b"VBGM"
VERSION = 1
_HEADER = struct.Struct("<4sII")  # magic, version, architecture JSON length


def save_model(model: CnnModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arch_json = json.dumps(model.arch.to_dict(), sort_keys=True).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(arch_json)))
        fh.write(arch_json)
        for _, param in model.parameters():
            fh.write(np.ascontiguousarray(param, dtype="<f4").tobytes())
    logger.info("Saved model to %s", path)
    return path


def load_model(path: str | Path) -> CnnModel:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"model file not found: {path}")
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise FrameFormatError(f"{path}: truncated model header")
    magic, version, arch_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FrameFormatError(f"{path}: not a model file (magic {magic!r})")
    if version != VERSION:
        raise FrameFormatError(f"{path}: unsupported model version {version}")

    offset = _HEADER.size
    arch = Architecture.from_dict(json.loads(data[offset : offset + arch_len].decode("utf-8")))
    offset += arch_len
    model = CnnModel(arch, dtype=np.float32)
    for name, param in model.parameters():
        nbytes = param.size * 4
        if offset + nbytes > len(data):
            raise FrameFormatError(f"{path}: truncated weights at {name}")
        param[...] = np.frombuffer(data, dtype="<f4", count=param.size, offset=offset).reshape(param.shape)
        offset += nbytes
    if offset != len(data):
        raise FrameFormatError(f"{path}: {len(data) - offset} trailing bytes")
    return model
