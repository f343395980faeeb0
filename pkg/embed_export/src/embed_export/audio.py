"""WAV loading at the encoder's expected rate (16 kHz mono)."""

from __future__ import annotations

import math

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

TARGET_RATE = 16000


def load_wav_mono_16k(path) -> np.ndarray:
    """float32 mono samples at 16 kHz; channel 0, polyphase resampling."""
    rate, data = wavfile.read(path)
    if data.ndim > 1:
        data = data[:, 0]
    if np.issubdtype(data.dtype, np.integer):
        info = np.iinfo(data.dtype)
        scale = float(max(abs(info.min), info.max))
        samples = data.astype(np.float32) / scale
    else:
        samples = data.astype(np.float32)
    if rate != TARGET_RATE:
        g = math.gcd(int(rate), TARGET_RATE)
        samples = resample_poly(samples, TARGET_RATE // g, int(rate) // g).astype(np.float32)
    return samples
