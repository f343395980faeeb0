"""EMB1 embedding interchange format (writer side).

Layout, little-endian: magic "EMB1" (4 bytes), version u16 = 1, T u32, D u32,
frame_hop_ms float32, then T*D float32 payload, row-major (time-major).
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
_HEADER = struct.Struct("<4sHIIf")


class Emb1Error(ValueError):
    pass


def write_emb1(frames: np.ndarray, frame_hop_ms: float, path) -> None:
    frames = np.ascontiguousarray(frames, dtype=np.float32)
    if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
        raise Emb1Error("frames must be a (T >= 1, D >= 1) matrix")
    if not np.all(np.isfinite(frames)):
        raise Emb1Error("frames contain non-finite values")
    t, d = frames.shape
    header = _HEADER.pack(MAGIC, VERSION, t, d, np.float32(frame_hop_ms))
    with open(path, "wb") as f:
        f.write(header)
        f.write(frames.astype("<f4").tobytes())


def read_emb1(path) -> tuple[np.ndarray, float]:
    """Used by tests to verify written files; returns (frames, frame_hop_ms)."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise Emb1Error("truncated header")
    magic, version, t, d, hop_ms = _HEADER.unpack_from(data, 0)
    if magic != MAGIC or version != VERSION:
        raise Emb1Error("bad magic or version")
    payload = data[_HEADER.size:]
    if len(payload) != t * d * 4:
        raise Emb1Error("payload size does not match header")
    return np.frombuffer(payload, dtype="<f4").reshape(t, d), float(hop_ms)
