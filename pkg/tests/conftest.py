import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artifree import Waveform

from synth import FS, speechlike, white_noise


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def speech():
    return speechlike(seed=7, duration=1.0)


@pytest.fixture
def noise():
    return white_noise(seed=99, duration=1.5)


@pytest.fixture
def short_tone():
    t = np.arange(FS) / FS
    return Waveform(0.5 * np.sin(2 * np.pi * 440.0 * t), FS)
