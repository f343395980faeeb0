"""Seedable toy stochastic enhancer and wall-clock RTF measurement.

A simulation harness, not a real enhancer: it iterates a shrinkage-toward-
clean update in the magnitude-spectrogram domain with decaying injected
noise, so ensembles of runs reproduce the statistical signature the pipeline
exploits (stable genuine content, run-to-run-varying hallucinations).  The
clean reference serves as an oracle denoising target, which is legitimate
here because the purpose is generating controlled test ensembles, not blind
enhancement.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .errors import IncompatibleError, SizeError
from .signal import StftConfig, Waveform, estimate_snr, stft

# Step count at which the compounded per-step injection chance equals
# halluc_rate; more steps give more injection opportunities.
REFERENCE_STEPS = 30

_HALLUC_STREAM = 0x48414C  # decorrelates blob draws from step noise


@dataclass(frozen=True)
class SamplerConfig:
    n_steps: int = 30
    noise_sigma0: float = 0.5
    decay: float = 0.6
    halluc_rate: float = 0.0
    halluc_strength: float = 4.0
    seed: int = 0
    step_gain: float = 0.3
    stft: StftConfig = StftConfig()

    def __post_init__(self):
        if self.n_steps < 1:
            raise SizeError("n_steps must be >= 1")
        if not (0.0 < self.decay < 1.0):
            raise ValueError("decay must lie in (0, 1)")
        if not (0.0 <= self.halluc_rate <= 1.0):
            raise ValueError("halluc_rate must lie in [0, 1]")
        if self.noise_sigma0 < 0 or self.halluc_strength < 0:
            raise ValueError("scales must be non-negative")


@dataclass(frozen=True)
class EnhanceDetails:
    hallucinated: bool
    blob_support: tuple[int, int, int, int] | None  # (t0, t1, f0, f1), half-open
    input_snr_db: float
    injection_probability: float
    magnitude: np.ndarray | None = None  # final enhanced magnitude, pre-reconstruction


@dataclass(frozen=True)
class RtfMeasurement:
    rtf: float
    n_steps: int
    audio_seconds: float
    seconds: float

    @property
    def seconds_per_step(self) -> float:
        return self.seconds / self.n_steps


_wola_plan_cache: dict[tuple, tuple] = {}


def _wola_plan(t: int, length: int, cfg: StftConfig) -> tuple:
    """Cached scatter indices and squared-taper normalizer for one framing."""
    key = (t, length, cfg.window_len, cfg.hop, cfg.window)
    plan = _wola_plan_cache.get(key)
    if plan is None:
        w2 = cfg.taper() ** 2
        den = np.zeros(length)
        for i in range(t):
            den[i * cfg.hop : i * cfg.hop + cfg.window_len] += w2
        span = np.arange(cfg.window_len)
        group = -(-cfg.window_len // cfg.hop)  # frames this far apart never overlap
        scatter = []
        for g in range(min(group, t)):
            rows = np.arange(g, t, group)
            idx = (rows[:, None] * cfg.hop + span[None, :]).ravel()
            scatter.append((rows, idx))
        covered = den > 1e-8
        plan = _wola_plan_cache.setdefault(key, (den, covered, scatter))
    return plan


def _overlap_add(spec: np.ndarray, cfg: StftConfig, fallback: np.ndarray) -> np.ndarray:
    """Weighted overlap-add; samples without window coverage keep the fallback."""
    frames = np.fft.irfft(spec, n=cfg.window_len, axis=1) * cfg.taper()
    t = frames.shape[0]
    length = fallback.size
    den, covered, scatter = _wola_plan(t, length, cfg)
    y = np.zeros(length)
    for rows, idx in scatter:
        y[idx] += frames[rows].ravel()  # indices unique within a group
    y[covered] /= den[covered]
    y[~covered] = fallback[~covered]
    end = (t - 1) * cfg.hop + cfg.window_len
    if end < length:
        y[end:] = fallback[end:]
    return y


def _p95(values: np.ndarray) -> float:
    # subsampled: a scale estimate, not an exact order statistic
    return float(np.percentile(values.ravel()[::7], 95))


def injection_probability(snr_db: float, cfg: SamplerConfig) -> float:
    """Chance of injecting a hallucination, compounded per reverse step.

    Artifacts concentrate at low SNR: the per-utterance base rate is
    halluc_rate scaled by clamp((10 - snr)/20, 0, 1), and the opportunity
    compounds per step so that a REFERENCE_STEPS-step run hits the base rate.
    """
    if not np.isfinite(snr_db):
        base = 0.0
    else:
        base = cfg.halluc_rate * float(np.clip((10.0 - snr_db) / 20.0, 0.0, 1.0))
    return float(1.0 - (1.0 - base) ** (cfg.n_steps / REFERENCE_STEPS))


def enhance_once_details(
    noisy: Waveform, clean_hint: Waveform, cfg: SamplerConfig
) -> tuple[Waveform, EnhanceDetails]:
    """One stochastic reverse-style enhancement run; fully determined by the seed."""
    if noisy.sample_rate != clean_hint.sample_rate or len(noisy) != len(clean_hint):
        raise IncompatibleError("noisy and clean_hint must share length and rate")
    rng_step = np.random.default_rng(cfg.seed)
    rng_halluc = np.random.default_rng((cfg.seed, _HALLUC_STREAM))

    spec_noisy = stft(noisy, cfg.stft).frames
    mag_noisy = np.abs(spec_noisy)
    mag_clean = np.abs(stft(clean_hint, cfg.stft).frames)
    t, f = mag_noisy.shape
    clean_sq = mag_clean * mag_clean
    noise_scale = cfg.noise_sigma0 * _p95(mag_noisy)

    snr_db = estimate_snr(noisy, clean_hint)
    p_inject = injection_probability(snr_db, cfg)

    # All hallucination draws happen unconditionally so that runs differing
    # only in halluc_rate share the exact same step-noise stream.
    coin = rng_halluc.uniform()
    blob_t0 = int(rng_halluc.integers(0, max(t - 20, 1)))
    blob_len = int(rng_halluc.integers(8, 21))
    blob_hz = float(rng_halluc.uniform(300.0, 3000.0))
    blob_bins = int(rng_halluc.integers(3, 9))
    bin_hz = noisy.sample_rate / cfg.stft.window_len
    blob_f0 = int(blob_hz / bin_hz)
    blob_amp = cfg.halluc_strength * _p95(mag_clean)

    x = mag_noisy.copy()
    for k in range(cfg.n_steps):
        # band-correlated perturbation: white draw shaped by repeated smoothing
        step_noise = rng_step.standard_normal((t, f))
        step_noise = gaussian_filter(step_noise, sigma=(1.0, 2.0), mode="nearest", truncate=3.0)
        step_noise = gaussian_filter(step_noise, sigma=(1.0, 2.0), mode="nearest", truncate=3.0)
        step_noise = gaussian_filter(step_noise, sigma=(1.0, 2.0), mode="nearest", truncate=3.0)
        # contextual Wiener gain from a locally smoothed residual estimate
        resid_sq = uniform_filter((x - mag_clean) ** 2, size=5, mode="nearest")
        resid_sq = uniform_filter(resid_sq, size=(3, 9), mode="nearest")
        gain = clean_sq / (clean_sq + resid_sq + 1e-20)
        denoised = mag_clean + gain * (x - mag_clean)
        x = x + cfg.step_gain * (denoised - x) + (noise_scale * cfg.decay**k) * step_noise
        np.maximum(x, 0.0, out=x)

    injected = bool(coin < p_inject)
    support = None
    if injected:
        tt = np.arange(blob_t0, min(blob_t0 + blob_len, t))
        f_lo = max(blob_f0 - blob_bins // 2, 0)
        ff = np.arange(f_lo, min(f_lo + blob_bins, f))
        bump_t = np.exp(-0.5 * ((tt - (blob_t0 + blob_len / 2.0)) / (blob_len / 4.0)) ** 2)
        bump_f = np.exp(-0.5 * ((ff - blob_f0) / (blob_bins / 4.0)) ** 2)
        x[np.ix_(tt, ff)] += blob_amp * bump_t[:, None] * bump_f[None, :]
        support = (int(tt[0]), int(tt[-1]) + 1, int(ff[0]), int(ff[-1]) + 1)

    # reconstruct with the noisy phase
    ratio = np.divide(x, mag_noisy, out=np.ones_like(x), where=mag_noisy > 0)
    spec_out = spec_noisy * ratio
    dead = mag_noisy == 0
    if dead.any():
        spec_out[dead] = x[dead]
    samples = _overlap_add(spec_out, cfg.stft, noisy.samples)
    details = EnhanceDetails(
        hallucinated=injected,
        blob_support=support,
        input_snr_db=float(snr_db),
        injection_probability=p_inject,
        magnitude=x,
    )
    return Waveform(samples, noisy.sample_rate), details


def enhance_once(noisy: Waveform, clean_hint: Waveform, cfg: SamplerConfig) -> Waveform:
    return enhance_once_details(noisy, clean_hint, cfg)[0]


def enhance_ensemble_details(
    noisy: Waveform, clean_hint: Waveform, cfg: SamplerConfig, ensemble_size: int
) -> list[tuple[Waveform, EnhanceDetails]]:
    """ensemble_size independent runs with derived seeds seed + i; stable order."""
    if ensemble_size < 1:
        raise SizeError("ensemble_size must be >= 1")
    return [
        enhance_once_details(noisy, clean_hint, replace(cfg, seed=cfg.seed + i))
        for i in range(ensemble_size)
    ]


def enhance_ensemble(
    noisy: Waveform, clean_hint: Waveform, cfg: SamplerConfig, ensemble_size: int
) -> list[Waveform]:
    return [w for w, _ in enhance_ensemble_details(noisy, clean_hint, cfg, ensemble_size)]


def measure_rtf(invoke: Callable[[], object], n_steps: int, audio_seconds: float) -> RtfMeasurement:
    """Wall-clock the invocation; rtf = processing seconds per audio second."""
    if audio_seconds <= 0:
        raise SizeError("audio_seconds must be positive")
    start = time.perf_counter()
    invoke()
    seconds = time.perf_counter() - start
    return RtfMeasurement(
        rtf=seconds / audio_seconds,
        n_steps=n_steps,
        audio_seconds=audio_seconds,
        seconds=seconds,
    )
