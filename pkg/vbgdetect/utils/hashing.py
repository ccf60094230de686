from __future__ import annotations

import hashlib

from vbgdetect.imaging.frame import Frame


def content_hash(frame: Frame) -> str:
    """64-bit blake2b digest of the decoded pixels and their shape, as hex."""
    h = hashlib.blake2b(digest_size=8)
    h.update(f"{frame.height}x{frame.width}".encode("ascii"))
    h.update(frame.pixels.tobytes())
    return h.hexdigest()


def hash_key(digest: str) -> int:
    """Integer form of a content hash, used to derive per-frame seeds."""
    return int(digest, 16)
