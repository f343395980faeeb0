import numpy as np
import pytest

from artifree import (
    IncompatibleError,
    SamplerConfig,
    SizeError,
    Waveform,
    emb_cosine_distance,
    enhance_ensemble,
    enhance_once,
    enhance_once_details,
    frame_variance,
    artifact_score,
    lsd,
    measure_rtf,
    mix_at_snr,
    reference_encode,
    stft,
)
from artifree.sampler import injection_probability

from synth import FS, speechlike, white_noise


@pytest.fixture(scope="module")
def fixture_pair():
    clean = speechlike(seed=21, duration=0.6)
    noisy = mix_at_snr(clean, white_noise(seed=22, duration=1.0), -12.0, seed=5)
    return noisy, clean


def cfg_with(**kwargs):
    defaults = dict(n_steps=8, noise_sigma0=0.05, decay=0.6, halluc_rate=0.0,
                    halluc_strength=4.0, seed=0)
    defaults.update(kwargs)
    return SamplerConfig(**defaults)


class TestDeterminism:
    def test_same_seed_bit_identical(self, fixture_pair):
        noisy, clean = fixture_pair
        cfg = cfg_with(halluc_rate=1.0, seed=42)
        a = enhance_once(noisy, clean, cfg)
        b = enhance_once(noisy, clean, cfg)
        assert np.array_equal(a.samples, b.samples)

    def test_different_seeds_differ_at_full_halluc_rate(self, fixture_pair):
        noisy, clean = fixture_pair
        a = enhance_once(noisy, clean, cfg_with(halluc_rate=1.0, seed=1))
        b = enhance_once(noisy, clean, cfg_with(halluc_rate=1.0, seed=2))
        dist = emb_cosine_distance(reference_encode(a), reference_encode(b))
        assert dist > 0.0

    def test_ensemble_first_member_equals_single_run(self, fixture_pair):
        noisy, clean = fixture_pair
        cfg = cfg_with(seed=7)
        members = enhance_ensemble(noisy, clean, cfg, 1)
        single = enhance_once(noisy, clean, cfg)
        assert np.array_equal(members[0].samples, single.samples)

    def test_length_mismatch_raises(self, fixture_pair):
        noisy, clean = fixture_pair
        with pytest.raises(IncompatibleError):
            enhance_once(Waveform(noisy.samples[:-5], FS), clean, cfg_with())


class TestEnsembleVariance:
    def test_deterministic_config_gives_zero_score(self, fixture_pair):
        noisy, clean = fixture_pair
        cfg = cfg_with(noise_sigma0=0.0, halluc_rate=0.0)
        members = enhance_ensemble(noisy, clean, cfg, 3)
        embs = [reference_encode(m) for m in members]
        assert artifact_score(frame_variance(embs)) == 0.0

    def test_hallucinations_raise_score_over_paired_baseline(self, fixture_pair):
        noisy, clean = fixture_pair
        base_cfg = cfg_with(noise_sigma0=0.02, halluc_rate=0.0, seed=9)
        hal_cfg = cfg_with(noise_sigma0=0.02, halluc_rate=1.0, seed=9)
        score_base = artifact_score(frame_variance(
            [reference_encode(m) for m in enhance_ensemble(noisy, clean, base_cfg, 4)]
        ))
        score_hal = artifact_score(frame_variance(
            [reference_encode(m) for m in enhance_ensemble(noisy, clean, hal_cfg, 4)]
        ))
        assert score_hal > score_base

    def test_stochastic_variance_positive_and_shrinks_with_decay(self, fixture_pair):
        noisy, clean = fixture_pair
        scores = []
        for decay in (0.9, 0.5, 0.1):
            cfg = cfg_with(noise_sigma0=0.1, decay=decay, n_steps=10, seed=3)
            embs = [reference_encode(m) for m in enhance_ensemble(noisy, clean, cfg, 3)]
            scores.append(artifact_score(frame_variance(embs)))
        assert all(s > 0.0 for s in scores)
        assert scores[0] > scores[1] > scores[2]


class TestHallucinationInjection:
    def test_probability_saturates_at_low_snr(self):
        cfg = cfg_with(halluc_rate=1.0, n_steps=5)
        assert injection_probability(-12.0, cfg) == 1.0
        assert injection_probability(float("inf"), cfg) == 0.0

    def test_probability_grows_with_step_count(self):
        p_small = injection_probability(0.0, cfg_with(halluc_rate=0.6, n_steps=5))
        p_ref = injection_probability(0.0, cfg_with(halluc_rate=0.6, n_steps=30))
        p_large = injection_probability(0.0, cfg_with(halluc_rate=0.6, n_steps=60))
        assert p_small < p_ref < p_large
        assert p_ref == pytest.approx(0.6 * 0.5)  # clamp((10-0)/20) = 0.5 at 30 steps

    def test_blob_confined_to_declared_support(self, fixture_pair):
        noisy, clean = fixture_pair
        with_blob, details = enhance_once_details(noisy, clean, cfg_with(halluc_rate=1.0, seed=11))
        without_blob, base = enhance_once_details(noisy, clean, cfg_with(halluc_rate=0.0, seed=11))
        assert details.hallucinated and not base.hallucinated
        t0, t1, f0, f1 = details.blob_support
        diff = details.magnitude - base.magnitude
        outside = np.ones_like(diff, dtype=bool)
        outside[t0:t1, f0:f1] = False
        assert np.all(diff[outside] == 0.0)
        assert np.any(diff[~outside] != 0.0)
        # reconstruction mixes only frames that overlap in time: samples
        # outside the blob's frame span stay bit-identical
        cfg = cfg_with().stft
        lo = t0 * cfg.hop
        hi = (t1 - 1) * cfg.hop + cfg.window_len
        assert np.array_equal(with_blob.samples[:lo], without_blob.samples[:lo])
        assert np.array_equal(with_blob.samples[hi:], without_blob.samples[hi:])


class TestConvergence:
    def test_lsd_to_clean_decreases_monotonically_without_noise(self, fixture_pair):
        noisy, clean = fixture_pair
        ref = stft(clean)
        values = []
        for n in (1, 2, 4, 8, 16, 32):
            out = enhance_once(noisy, clean, cfg_with(n_steps=n, noise_sigma0=0.0))
            values.append(lsd(ref, stft(out)))
        assert all(a > b for a, b in zip(values, values[1:]))


class TestRtf:
    def test_measurement_fields(self, fixture_pair):
        noisy, clean = fixture_pair
        m = measure_rtf(lambda: enhance_once(noisy, clean, cfg_with(n_steps=4)),
                        n_steps=4, audio_seconds=noisy.duration)
        assert m.rtf > 0
        assert m.seconds > 0
        assert m.seconds_per_step == pytest.approx(m.seconds / 4)
        assert m.audio_seconds == pytest.approx(0.6)

    def test_zero_audio_seconds_rejected(self):
        with pytest.raises(SizeError):
            measure_rtf(lambda: None, n_steps=1, audio_seconds=0.0)

    def test_empty_waveform_rejected_upstream(self):
        with pytest.raises(SizeError):
            Waveform(np.array([]), FS)
