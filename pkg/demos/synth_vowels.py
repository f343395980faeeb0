"""All-pole vowel synthesis with known resonance bandwidths (demo helper)."""

import numpy as np
from scipy.signal import lfilter

from artifree import Waveform

FS = 16000


def vowel(resonances, block=2048, n_blocks=6, rate=FS):
    """Block-aligned impulse responses of the all-pole filter.

    Includes a real pole at 0.97 so analysis-time pre-emphasis sees a pure
    resonator; each block holds one fully decayed response.
    """
    a = np.array([1.0])
    for freq, bw in resonances:
        r = np.exp(-np.pi * bw / rate)
        a = np.convolve(a, [1.0, -2.0 * r * np.cos(2 * np.pi * freq / rate), r * r])
    a = np.convolve(a, [1.0, -0.97])
    impulse = np.zeros(block)
    impulse[0] = 1.0
    h = lfilter([1.0], a, impulse)
    sig = np.tile(h, n_blocks)
    return Waveform(0.3 * sig / np.max(np.abs(sig)), rate)
