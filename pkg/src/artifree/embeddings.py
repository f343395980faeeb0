"""Frame-level embedding sequences.

The builtin encoder is a deterministic spectral front end: 40-band log-mel
per STFT frame followed by a fixed orthonormal cosine-basis projection.  It
is not a learned model; learned encoders enter the pipeline through the EMB1
interchange format written by an external exporter.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, IncompatibleError, SizeError
from .signal import LOG_FLOOR, StftConfig, Waveform, stft

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1
_EMB1_HEADER = struct.Struct("<4sHIIf")

BUILTIN_DIM = 40


@dataclass(frozen=True)
class EmbeddingSequence:
    """T x D float32 matrix of per-frame embeddings."""

    frames: np.ndarray
    frame_hop_ms: float
    source_tag: str = "builtin"

    def __post_init__(self):
        frames = np.ascontiguousarray(self.frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise SizeError("embedding matrix must be (T >= 1, D >= 1)")
        if not np.all(np.isfinite(frames)):
            raise FormatError("embedding contains non-finite values")
        if not self.frame_hop_ms > 0:
            raise IncompatibleError("frame_hop_ms must be positive")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_hop_ms", float(self.frame_hop_ms))

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


def _mel_filterbank(n_mels: int, n_bins: int, sample_rate: int, window_len: int) -> np.ndarray:
    def hz_to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def mel_to_hz(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    freqs = np.arange(n_bins) * sample_rate / window_len
    points = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = points[m], points[m + 1], points[m + 2]
        rising = (freqs - lo) / (center - lo)
        falling = (hi - freqs) / (hi - center)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def _cosine_projection(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis rotated so the all-ones vector is fixed.

    A uniform gain on the waveform shifts every log-mel coefficient by the
    same constant; fixing the constant direction turns that into a constant
    embedding offset, which per-frame mean removal cancels exactly.
    """
    basis = np.zeros((n, n))
    grid = np.pi * (2 * np.arange(n) + 1) / (2 * n)
    for r in range(n):
        scale = np.sqrt(1.0 / n) if r == 0 else np.sqrt(2.0 / n)
        basis[r] = scale * np.cos(grid * r)
    v = np.zeros(n)
    v[0] = 1.0
    v -= np.full(n, 1.0 / np.sqrt(n))
    reflector = np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)
    return reflector @ basis


_FB_CACHE: dict[tuple, np.ndarray] = {}
_PROJECTION = _cosine_projection(BUILTIN_DIM)


def reference_encode(w: Waveform, cfg: StftConfig | None = None) -> EmbeddingSequence:
    """Deterministic builtin encoder: log-mel + orthonormal cosine projection."""
    cfg = cfg or StftConfig()
    spec = stft(w, cfg)
    key = (BUILTIN_DIM, cfg.n_bins, w.sample_rate, cfg.window_len)
    fb = _FB_CACHE.get(key)
    if fb is None:
        fb = _FB_CACHE.setdefault(key, _mel_filterbank(*key))
    mel = spec.magnitude() @ fb.T
    log_mel = np.log10(np.maximum(mel, LOG_FLOOR))
    frames = (log_mel @ _PROJECTION.T).astype(np.float32)
    hop_ms = 1000.0 * cfg.hop / w.sample_rate
    return EmbeddingSequence(frames, hop_ms, source_tag="builtin")


def write_emb(seq: EmbeddingSequence, path) -> None:
    header = _EMB1_HEADER.pack(
        EMB1_MAGIC, EMB1_VERSION, seq.n_frames, seq.dim, np.float32(seq.frame_hop_ms)
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(seq.frames.astype("<f4").tobytes())


def read_emb(path) -> EmbeddingSequence:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _EMB1_HEADER.size:
        raise FormatError("EMB1 header truncated")
    magic, version, t, d, hop_ms = _EMB1_HEADER.unpack_from(data, 0)
    if magic != EMB1_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != EMB1_VERSION:
        raise FormatError(f"unsupported EMB1 version {version}")
    if t < 1 or d < 1:
        raise FormatError("declared T and D must be >= 1")
    expected = t * d * 4  # python ints: no overflow on huge T*D
    payload = data[_EMB1_HEADER.size :]
    if len(payload) != expected:
        raise FormatError(
            f"payload of {len(payload)} bytes does not match declared T*D ({expected} bytes)"
        )
    frames = np.frombuffer(payload, dtype="<f4").reshape(t, d)
    return EmbeddingSequence(frames, hop_ms, source_tag="external:emb1")


def align(seqs: list[EmbeddingSequence]) -> list[EmbeddingSequence]:
    """Truncate all sequences to the shortest; D and hop must agree."""
    if not seqs:
        return []
    d = seqs[0].dim
    hop = seqs[0].frame_hop_ms
    for s in seqs[1:]:
        if s.dim != d:
            raise IncompatibleError(f"embedding dims differ: {d} vs {s.dim}")
        if s.frame_hop_ms != hop:
            raise IncompatibleError("frame hops differ; resampling is out of scope")
    t_min = min(s.n_frames for s in seqs)
    return [
        s if s.n_frames == t_min
        else EmbeddingSequence(s.frames[:t_min], s.frame_hop_ms, s.source_tag)
        for s in seqs
    ]


def pool_mean(seq: EmbeddingSequence) -> np.ndarray:
    """Mean over time; float64 (D,) vector."""
    return seq.frames.astype(np.float64).mean(axis=0)
