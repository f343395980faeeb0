"""Ensemble embedding-variance artifact scoring and threshold calibration.

A stochastic enhancer is run S times on the same input; genuine content is
stable across runs while hallucinated content varies.  The per-frame variance
of the embeddings across the ensemble localizes that instability, and its
mean over time is the utterance-level artifact score compared against a
calibrated threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingSequence, align
from .errors import CalibrationError, EnsembleSizeError, SizeError


@dataclass(frozen=True)
class ArtifactReport:
    """Variance curve v(t), score a = mean(v), threshold, and the flag a > tau."""

    variance_curve: np.ndarray
    score: float
    tau: float
    flag: bool
    ensemble_size: int


def frame_variance(ensemble: Sequence[EmbeddingSequence]) -> np.ndarray:
    """Per-frame population variance across members, averaged over dimensions.

    Members must already be aligned (same T, D, hop).  Population (1/S)
    normalization: the ensemble is the whole population of drawn samples,
    and thresholds calibrated under 1/S would shift by S/(S-1) otherwise.
    """
    if len(ensemble) < 2:
        raise EnsembleSizeError(f"need at least 2 members, got {len(ensemble)}")
    shapes = {(s.n_frames, s.dim) for s in ensemble}
    if len(shapes) != 1:
        raise EnsembleSizeError("members not aligned; apply embeddings.align first")
    stacked = np.stack([s.frames.astype(np.float64) for s in ensemble])
    return stacked.var(axis=0).mean(axis=1)


def artifact_score(variance_curve: np.ndarray) -> float:
    """Arithmetic mean of the variance curve."""
    curve = np.asarray(variance_curve, dtype=np.float64)
    if curve.size == 0:
        raise SizeError("empty variance curve")
    return float(curve.mean())


def predict(ensemble: Sequence[EmbeddingSequence], tau: float) -> ArtifactReport:
    """Align members, score them, and flag when the score strictly exceeds tau."""
    aligned = align(list(ensemble))
    curve = frame_variance(aligned)
    score = artifact_score(curve)
    return ArtifactReport(
        variance_curve=curve,
        score=score,
        tau=float(tau),
        flag=bool(score > tau),
        ensemble_size=len(aligned),
    )


def calibrate_threshold(
    scored: Sequence[tuple[float, bool]]
) -> tuple[float, float]:
    """Threshold maximizing balanced accuracy of the (score > tau) rule.

    Candidate thresholds are the midpoints of adjacent distinct sorted scores,
    plus flag-all/flag-none boundary candidates so the result never loses to a
    trivial classifier.  Ties break toward the smaller threshold.  Returns
    (tau, balanced_accuracy).
    """
    scores = np.array([s for s, _ in scored], dtype=np.float64)
    labels = np.array([bool(l) for _, l in scored])
    if scores.size == 0 or labels.all() or not labels.any():
        raise CalibrationError("calibration needs both artifact and clean examples")
    distinct = np.unique(scores)
    candidates = [distinct[0] - 1.0]  # flags everything
    candidates.extend((distinct[:-1] + distinct[1:]) / 2.0)
    candidates.append(distinct[-1])  # flags nothing under strict >
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    best_tau = candidates[0]
    best_acc = -1.0
    for tau in candidates:
        flagged = scores > tau
        tpr = np.sum(flagged & labels) / n_pos
        tnr = np.sum(~flagged & ~labels) / n_neg
        acc = 0.5 * (tpr + tnr)
        if acc > best_acc or (acc == best_acc and tau < best_tau):
            best_acc = float(acc)
            best_tau = float(tau)
    return best_tau, best_acc
