"""Waveform/spectrogram substrate: WAV I/O, STFT, SNR mixing and estimation."""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window

from .errors import (
    DegenerateSignalError,
    FormatError,
    IncompatibleError,
    SizeError,
    UnsupportedFormatError,
)

# Magnitude floor applied before any log.
LOG_FLOOR = 1e-10

_PCM16_SCALE = 32768.0


@dataclass(frozen=True)
class Waveform:
    """Mono audio: float64 samples (nominally in [-1, 1]) at a fixed rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise SizeError("waveform must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise DegenerateSignalError("waveform contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise IncompatibleError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class StftConfig:
    """Analysis framing: window length, hop, and named taper (periodic)."""

    window_len: int = 510
    hop: int = 128
    window: str = "hann"

    def __post_init__(self):
        if self.window_len <= 0 or not (0 < self.hop <= self.window_len):
            raise SizeError("require 0 < hop <= window_len")

    def taper(self) -> np.ndarray:
        return get_window(self.window, self.window_len, fftbins=True)

    def frame_count(self, n_samples: int) -> int:
        return 1 + (n_samples - self.window_len) // self.hop

    @property
    def n_bins(self) -> int:
        return self.window_len // 2 + 1


@dataclass(frozen=True)
class Spectrogram:
    """Complex STFT frames, shape (T, window_len//2 + 1)."""

    frames: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise SizeError("spectrogram needs at least one frame")
        if frames.shape[1] != self.config.n_bins:
            raise IncompatibleError("bin count does not match window length")
        object.__setattr__(self, "frames", frames)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def frame_signal(samples: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Strided (T, window_len) view of the signal; no taper applied."""
    if samples.size < cfg.window_len:
        raise SizeError(
            f"signal of {samples.size} samples shorter than one {cfg.window_len}-sample window"
        )
    n = cfg.frame_count(samples.size)
    return sliding_window_view(samples, cfg.window_len)[:: cfg.hop][:n]


def stft(w: Waveform, cfg: StftConfig | None = None) -> Spectrogram:
    cfg = cfg or StftConfig()
    frames = frame_signal(w.samples, cfg) * cfg.taper()
    return Spectrogram(np.fft.rfft(frames, axis=1), cfg, w.sample_rate)


# ---------------------------------------------------------------------------
# WAV I/O (RIFF, PCM16 or IEEE float32, little-endian)
# ---------------------------------------------------------------------------

def read_wav(path) -> Waveform:
    """Read a RIFF/WAVE file; PCM16 or float32; channel 0 of multi-channel."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid, csize = struct.unpack_from("<4sI", data, pos)
        pos += 8
        if pos + csize > len(data):
            raise FormatError(f"truncated {cid.decode('ascii', 'replace')} chunk")
        body = data[pos : pos + csize]
        pos += csize + (csize & 1)  # chunks are word-aligned
        if cid == b"fmt ":
            if csize < 16:
                raise FormatError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
            if fmt is not None:
                break
    if fmt is None or payload is None:
        raise FormatError("missing fmt or data chunk")
    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels < 1:
        raise FormatError("zero channels")
    if audio_format == 1 and bits == 16:
        width = 2
        frames = len(payload) // (width * n_channels)
        raw = np.frombuffer(payload[: frames * width * n_channels], dtype="<i2")
        samples = raw.astype(np.float64) / _PCM16_SCALE
    elif audio_format == 3 and bits == 32:
        width = 4
        frames = len(payload) // (width * n_channels)
        raw = np.frombuffer(payload[: frames * width * n_channels], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"unsupported encoding: format={audio_format}, bits={bits}"
        )
    if frames == 0:
        raise FormatError("empty data chunk")
    if n_channels > 1:
        warnings.warn(f"taking channel 0 of {n_channels}", stacklevel=2)
        samples = samples.reshape(frames, n_channels)[:, 0].copy()
    return Waveform(samples, sample_rate)


def write_wav(w: Waveform, path, encoding: str = "pcm16") -> None:
    """Write PCM16 (clipped) or IEEE float32 little-endian WAV."""
    if encoding == "pcm16":
        fmt_code, bits = 1, 16
        scaled = np.round(w.samples * _PCM16_SCALE)
        body = np.clip(scaled, -32768, 32767).astype("<i2").tobytes()
    elif encoding == "float32":
        fmt_code, bits = 3, 32
        body = w.samples.astype("<f4").tobytes()
    else:
        raise UnsupportedFormatError(f"unsupported encoding: {encoding}")
    block = bits // 8
    header = (
        b"RIFF"
        + struct.pack("<I", 36 + len(body))
        + b"WAVE"
        + b"fmt "
        + struct.pack(
            "<IHHIIHH", 16, fmt_code, 1, w.sample_rate, w.sample_rate * block, block, bits
        )
        + b"data"
        + struct.pack("<I", len(body))
    )
    with open(path, "wb") as f:
        f.write(header + body)


# ---------------------------------------------------------------------------
# SNR mixing / estimation
# ---------------------------------------------------------------------------

def mix_at_snr(clean: Waveform, noise: Waveform, snr_db: float, seed: int) -> Waveform:
    """Add a scaled noise segment so the global clean/noise power ratio is snr_db."""
    if clean.sample_rate != noise.sample_rate:
        raise IncompatibleError("clean and noise sample rates differ")
    rng = np.random.default_rng(seed)
    n = len(clean)
    src = noise.samples
    if src.size < n:
        src = np.tile(src, -(-n // src.size) + 1)
    offset = int(rng.integers(0, src.size - n + 1))
    seg = src[offset : offset + n]
    p_clean = float(np.mean(clean.samples**2))
    p_noise = float(np.mean(seg**2))
    if p_clean == 0.0 or p_noise == 0.0:
        raise DegenerateSignalError("zero-power clean or noise segment")
    alpha = np.sqrt(p_clean / (p_noise * 10.0 ** (snr_db / 10.0)))
    return Waveform(clean.samples + alpha * seg, clean.sample_rate)


def estimate_snr(
    noisy: Waveform,
    clean: Waveform | None = None,
    cfg: StftConfig | None = None,
) -> float:
    """SNR in dB; exact when clean is given, frame-percentile heuristic otherwise.

    With clean: 10*log10(P_clean / P_residual); returns +inf when the residual
    is zero-power.  Blind path treats the 10th-percentile frame RMS as the
    noise floor and the 90th as speech-plus-noise; prefer the oracle path
    whenever a clean reference exists.
    """
    if clean is not None:
        if clean.sample_rate != noisy.sample_rate or len(clean) != len(noisy):
            raise IncompatibleError("clean reference must match noisy length and rate")
        residual = noisy.samples - clean.samples
        p_res = float(np.mean(residual**2))
        if p_res == 0.0:
            return float("inf")
        p_clean = float(np.mean(clean.samples**2))
        if p_clean == 0.0:
            return float("-inf")
        return float(10.0 * np.log10(p_clean / p_res))
    cfg = cfg or StftConfig()
    frames = frame_signal(noisy.samples, cfg)
    rms = np.sqrt(np.mean(frames**2, axis=1))
    p10 = float(np.percentile(rms, 10))
    p90 = float(np.percentile(rms, 90))
    if p10 == 0.0:
        return float("inf")
    speech_power = p90**2 - p10**2
    if speech_power <= 0.0:
        return float("-inf")
    return float(10.0 * np.log10(speech_power / p10**2))
