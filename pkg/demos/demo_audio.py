"""Shared audio fixtures for the demo scripts."""

import numpy as np

from artifree import Waveform

FS = 16000


def make_speechlike(seed, duration=1.0, duty=0.75):
    """Tonal bursts with pauses plus a faint room tone; stands in for speech."""
    rng = np.random.default_rng(seed)
    n = int(FS * duration)
    x = np.zeros(n)
    t = np.arange(n) / FS
    ramp = int(0.01 * FS)
    pos = 0
    while pos < n:
        burst = int(rng.uniform(0.15, 0.35) * FS)
        gap = int(burst * (1 - duty) / duty)
        hi = min(pos + burst, n)
        f0 = rng.uniform(120, 260)
        carrier = (np.sin(2 * np.pi * f0 * t[pos:hi])
                   + 0.5 * np.sin(2 * np.pi * 2.31 * f0 * t[pos:hi])
                   + 0.25 * rng.standard_normal(hi - pos))
        env = np.ones(hi - pos)
        m = min(ramp, env.size // 2)
        if m > 0:
            env[:m] = np.linspace(0, 1, m)
            env[-m:] = np.linspace(1, 0, m)
        x[pos:hi] = carrier * env
        pos += burst + gap
    x = 0.3 * x / np.max(np.abs(x))
    x += 10 ** (-50 / 20) * 0.3 * rng.standard_normal(n)
    return Waveform(x, FS)


def make_noise(seed, duration=1.5):
    rng = np.random.default_rng(seed)
    return Waveform(0.1 * rng.standard_normal(int(FS * duration)), FS)
