import numpy as np
import pytest

from artifree import (
    CalibrationError,
    EmbeddingSequence,
    EnsembleSizeError,
    SizeError,
    artifact_score,
    calibrate_threshold,
    frame_variance,
    predict,
)


def seq(frames, hop=8.0):
    return EmbeddingSequence(np.asarray(frames, dtype=np.float32), hop)


def variance_oracle(members):
    """Naive triple-loop population variance, averaged over dims."""
    s = len(members)
    t, d = members[0].shape
    v = np.zeros(t)
    for ti in range(t):
        acc = 0.0
        for di in range(d):
            vals = [float(members[i][ti, di]) for i in range(s)]
            mean = sum(vals) / s
            acc += sum((x - mean) ** 2 for x in vals) / s
        v[ti] = acc / d
    return v


class TestFrameVariance:
    def test_identical_members_zero(self, rng):
        frames = rng.standard_normal((10, 6)).astype(np.float32)
        v = frame_variance([seq(frames)] * 4)
        assert np.all(v == 0.0)

    def test_two_member_scalar_example(self):
        v = frame_variance([seq([[1.0]]), seq([[3.0]])])
        assert v == pytest.approx([1.0])  # population: ((1-2)^2 + (3-2)^2)/2

    def test_matches_triple_loop_oracle(self, rng):
        members = [rng.standard_normal((20, 8)).astype(np.float32) for _ in range(5)]
        v = frame_variance([seq(m) for m in members])
        assert np.allclose(v, variance_oracle(members), atol=1e-9)

    def test_single_member_raises(self, rng):
        with pytest.raises(EnsembleSizeError):
            frame_variance([seq(rng.standard_normal((5, 3)))])

    def test_permutation_invariance(self, rng):
        members = [seq(rng.standard_normal((7, 4))) for _ in range(4)]
        v1 = frame_variance(members)
        v2 = frame_variance([members[2], members[0], members[3], members[1]])
        assert np.allclose(v1, v2, rtol=1e-12, atol=1e-300)

    def test_duplicating_every_member_preserves_variance(self, rng):
        members = [seq(rng.standard_normal((6, 3))) for _ in range(3)]
        v1 = frame_variance(members)
        v2 = frame_variance(members + members)
        assert np.allclose(v1, v2, atol=1e-12)

    def test_translation_invariance(self, rng):
        members = [rng.standard_normal((5, 4)).astype(np.float32) for _ in range(3)]
        shift = rng.standard_normal(4).astype(np.float32)
        shifted = [m + shift for m in members]
        assert np.allclose(
            frame_variance([seq(m) for m in members]),
            frame_variance([seq(m) for m in shifted]),
            atol=1e-6,
        )

    def test_scaling_scales_variance_quadratically(self, rng):
        members = [rng.standard_normal((5, 4)) for _ in range(3)]
        v1 = frame_variance([seq(m) for m in members])
        v2 = frame_variance([seq(3.0 * m) for m in members])
        assert np.allclose(v2, 9.0 * v1, rtol=1e-5)


class TestArtifactScore:
    def test_constant_curve(self):
        assert artifact_score(np.full(7, 0.25)) == 0.25

    def test_two_point_mean(self):
        assert artifact_score(np.array([0.0, 2.0])) == 1.0

    def test_matches_direct_summation(self, rng):
        curve = rng.random(100)
        assert artifact_score(curve) == pytest.approx(sum(curve) / 100, abs=1e-12)

    def test_empty_raises(self):
        with pytest.raises(SizeError):
            artifact_score(np.array([]))


class TestPredict:
    def test_score_equal_tau_is_not_flagged(self, rng):
        members = [seq(rng.standard_normal((4, 3))) for _ in range(3)]
        score = artifact_score(frame_variance(members))
        report = predict(members, tau=score)
        assert report.flag is False  # strict inequality

    def test_identical_ensemble_never_flagged(self, rng):
        frames = rng.standard_normal((6, 5)).astype(np.float32)
        report = predict([seq(frames)] * 3, tau=1e-12)
        assert report.score == 0.0
        assert report.flag is False

    def test_report_internal_consistency(self, rng):
        members = [seq(rng.standard_normal((9, 4))) for _ in range(4)]
        report = predict(members, tau=0.5)
        assert report.score == pytest.approx(float(report.variance_curve.mean()), abs=1e-12)
        assert report.flag == (report.score > report.tau)
        assert np.all(report.variance_curve >= 0.0)
        assert report.ensemble_size == 4

    def test_unequal_lengths_are_aligned(self, rng):
        members = [seq(rng.standard_normal((t, 4))) for t in (10, 8, 9)]
        report = predict(members, tau=0.1)
        assert report.variance_curve.shape == (8,)


def sweep_oracle(scored):
    """Exhaustive: try every threshold that yields a distinct classification."""
    scores = sorted({s for s, _ in scored})
    candidates = [scores[0] - 1.0] + scores
    best = -1.0
    n_pos = sum(1 for _, l in scored if l)
    n_neg = len(scored) - n_pos
    for tau in candidates:
        tp = sum(1 for s, l in scored if l and s > tau)
        tn = sum(1 for s, l in scored if not l and s <= tau)
        best = max(best, 0.5 * (tp / n_pos + tn / n_neg))
    return best


class TestCalibrateThreshold:
    def test_perfectly_separated(self):
        scored = [(0.001, False), (0.002, False), (0.01, True), (0.02, True)]
        tau, acc = calibrate_threshold(scored)
        assert acc == 1.0
        assert tau == pytest.approx(0.006)

    def test_identical_scores_give_half(self):
        scored = [(0.5, True), (0.5, False), (0.5, True), (0.5, False)]
        _, acc = calibrate_threshold(scored)
        assert acc == 0.5

    def test_single_class_raises(self):
        with pytest.raises(CalibrationError):
            calibrate_threshold([(0.1, True), (0.2, True)])

    def test_matches_exhaustive_sweep_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 30))
            scores = rng.random(n)
            labels = rng.random(n) < 0.5
            if labels.all() or not labels.any():
                labels[0] = not labels[0]
            scored = list(zip(scores.tolist(), labels.tolist()))
            _, acc = calibrate_threshold(scored)
            assert acc == pytest.approx(sweep_oracle(scored), abs=1e-12)
