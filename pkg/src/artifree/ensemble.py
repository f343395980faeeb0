"""Semantic-consistency candidate selection over an enhancement ensemble.

Candidates are never averaged; the one whose embedding is most consistent is
selected, either against the rest of the ensemble (centrality) or against a
clean/noisy reference embedding.  Similarity defaults to Pearson correlation
of the flattened embedding matrices, with a per-frame cosine alternative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingSequence, align
from .errors import EnsembleSizeError, SelectionError

FLATTEN_PEARSON = "flatten-pearson"
MEAN_FRAME_COSINE = "mean-frame-cosine"
METHODS = (FLATTEN_PEARSON, MEAN_FRAME_COSINE)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric S x S candidate similarity; NaN rows mark degenerate candidates."""

    values: np.ndarray
    method: str

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SelectionResult:
    chosen: int
    heuristic: str
    scores: np.ndarray


def _pair_similarity(x: np.ndarray, y: np.ndarray, method: str) -> float:
    if method == FLATTEN_PEARSON:
        a = x.ravel()
        b = y.ravel()
        a = a - a.mean()
        b = b - b.mean()
        denom = np.linalg.norm(a) * np.linalg.norm(b)
        if denom == 0.0:
            return float("nan")
        return float(np.clip(np.dot(a, b) / denom, -1.0, 1.0))
    if method == MEAN_FRAME_COSINE:
        nx = np.linalg.norm(x, axis=1)
        ny = np.linalg.norm(y, axis=1)
        cos = np.zeros(x.shape[0])
        both = (nx > 0) & (ny > 0)
        cos[both] = np.sum(x[both] * y[both], axis=1) / (nx[both] * ny[both])
        cos[(nx == 0) & (ny == 0)] = 1.0
        return float(np.mean(np.clip(cos, -1.0, 1.0)))
    raise ValueError(f"unknown similarity method {method!r}")


def _as_float64(seqs: Sequence[EmbeddingSequence]) -> list[np.ndarray]:
    return [s.frames.astype(np.float64) for s in align(list(seqs))]


def similarity_matrix(
    ensemble: Sequence[EmbeddingSequence], method: str = FLATTEN_PEARSON
) -> SimilarityMatrix:
    """Pairwise candidate similarity; zero-variance candidates get NaN rows."""
    if len(ensemble) < 2:
        raise EnsembleSizeError(f"need at least 2 candidates, got {len(ensemble)}")
    mats = _as_float64(ensemble)
    s = len(mats)
    degenerate = [
        method == FLATTEN_PEARSON and float(np.ptp(m)) == 0.0 for m in mats
    ]
    values = np.ones((s, s))
    for i in range(s):
        for j in range(i + 1, s):
            if degenerate[i] or degenerate[j]:
                values[i, j] = values[j, i] = np.nan
            else:
                values[i, j] = values[j, i] = _pair_similarity(mats[i], mats[j], method)
    for i, bad in enumerate(degenerate):
        if bad:
            values[i, :] = np.nan
            values[:, i] = np.nan
    return SimilarityMatrix(values, method)


def select_centrality(matrix: SimilarityMatrix) -> SelectionResult:
    """Candidate with the highest mean similarity to the others (diagonal excluded)."""
    c = matrix.values
    s = matrix.size
    scores = np.full(s, np.nan)
    for i in range(s):
        row = np.delete(c[i], i)
        defined = row[np.isfinite(row)]
        if np.isfinite(c[i, i]) and defined.size > 0:
            scores[i] = defined.mean()
    if not np.isfinite(scores).any():
        raise SelectionError("every candidate has an undefined similarity row")
    chosen = int(np.nanargmax(scores))
    return SelectionResult(chosen=chosen, heuristic="centrality", scores=scores)


def select_by_reference(
    ensemble: Sequence[EmbeddingSequence],
    ref: EmbeddingSequence,
    method: str = FLATTEN_PEARSON,
    heuristic: str = "clean",
) -> SelectionResult:
    """Candidate most similar to a clean or noisy reference embedding."""
    if heuristic not in ("clean", "noisy"):
        raise ValueError("heuristic must be 'clean' or 'noisy'")
    if len(ensemble) < 1:
        raise EnsembleSizeError("empty ensemble")
    mats = _as_float64(list(ensemble) + [ref])
    ref_mat = mats[-1]
    scores = np.array([_pair_similarity(m, ref_mat, method) for m in mats[:-1]])
    if not np.isfinite(scores).any():
        raise SelectionError("no candidate has a defined similarity to the reference")
    chosen = int(np.nanargmax(scores))
    return SelectionResult(chosen=chosen, heuristic=heuristic, scores=scores)
