"""Artifact metric suite, transcript scoring, and correlation analysis.

Pairwise signal metrics (log-spectral distance, embedding cosine distance,
VAD mismatch, formant-bandwidth divergence) plus unit-cost edit distance for
WER/PER and a Pearson table relating artifact metrics to externally supplied
quality scores.  Undefined results are reported as NaN sentinels, never
silently dropped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

import numpy as np

from .embeddings import EmbeddingSequence
from .errors import FormatError, IncompatibleError
from .signal import LOG_FLOOR, Spectrogram, StftConfig, Waveform, frame_signal

UNDEFINED = float("nan")


# ---------------------------------------------------------------------------
# Log-spectral distance
# ---------------------------------------------------------------------------

def lsd(ref: Spectrogram, test: Spectrogram) -> float:
    """Frame-averaged RMS difference of 20*log10 magnitude spectra, in dB."""
    if ref.sample_rate != test.sample_rate:
        raise IncompatibleError("sample rates differ")
    a, b = ref.magnitude(), test.magnitude()
    if a.shape[1] != b.shape[1]:
        raise IncompatibleError("bin counts differ")
    t = min(a.shape[0], b.shape[0])
    diff = 20.0 * np.log10(a[:t] + LOG_FLOOR) - 20.0 * np.log10(b[:t] + LOG_FLOOR)
    return float(np.mean(np.sqrt(np.mean(diff**2, axis=1))))


# ---------------------------------------------------------------------------
# Embedding cosine distance
# ---------------------------------------------------------------------------

def emb_cosine_distance(
    a: EmbeddingSequence, b: EmbeddingSequence, mean_remove: bool = False
) -> float:
    """Mean over frames of 1 - cos(a_t, b_t).

    Zero-norm frames: both zero contribute 0, one zero contributes 1 (a
    vanished frame counts as maximally dissimilar).  mean_remove subtracts
    each frame's mean first, cancelling uniform gain offsets of the builtin
    encoder.
    """
    if a.dim != b.dim:
        raise IncompatibleError(f"embedding dims differ: {a.dim} vs {b.dim}")
    t = min(a.n_frames, b.n_frames)
    x = a.frames[:t].astype(np.float64)
    y = b.frames[:t].astype(np.float64)
    if mean_remove:
        x = x - x.mean(axis=1, keepdims=True)
        y = y - y.mean(axis=1, keepdims=True)
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    # 1 - cos as half the squared chord between unit vectors: exactly 0 for
    # bit-identical frames and stable near 0
    dist = np.ones(t)
    both = (nx > 0) & (ny > 0)
    ux = x[both] / nx[both, None]
    uy = y[both] / ny[both, None]
    dist[both] = 0.5 * np.sum((ux - uy) ** 2, axis=1)
    dist[(nx == 0) & (ny == 0)] = 0.0
    np.clip(dist, 0.0, 2.0, out=dist)
    return float(np.mean(dist))


# ---------------------------------------------------------------------------
# Voice activity and VAD mismatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VadConfig:
    """Energy VAD: absolute floor, fraction of the 95th-percentile RMS, hangover."""

    floor_rms: float = 1e-4
    rel_threshold: float = 0.05
    hangover_frames: int = 3


def vad_decisions(
    w: Waveform, cfg: StftConfig | None = None, vad: VadConfig | None = None
) -> np.ndarray:
    """Boolean per-frame activity via thresholded frame RMS with hangover."""
    cfg = cfg or StftConfig()
    vad = vad or VadConfig()
    frames = frame_signal(w.samples, cfg)
    rms = np.sqrt(np.mean(frames**2, axis=1))
    threshold = max(vad.floor_rms, vad.rel_threshold * float(np.percentile(rms, 95)))
    active = rms > threshold
    if vad.hangover_frames > 0:
        out = active.copy()
        run = 0
        for i, on in enumerate(active):
            if on:
                run = vad.hangover_frames
            elif run > 0:
                out[i] = True
                run -= 1
        active = out
    return active


def vad_mismatch(
    a: Waveform,
    b: Waveform,
    cfg: StftConfig | None = None,
    vad: VadConfig | None = None,
) -> float:
    """Seconds where the two signals' activity decisions disagree."""
    if a.sample_rate != b.sample_rate:
        raise IncompatibleError("sample rates differ")
    cfg = cfg or StftConfig()
    da = vad_decisions(a, cfg, vad)
    db = vad_decisions(b, cfg, vad)
    t = min(da.size, db.size)
    return float(np.sum(da[:t] != db[:t]) * cfg.hop / a.sample_rate)


# ---------------------------------------------------------------------------
# Formant bandwidth divergence (autocorrelation LPC)
# ---------------------------------------------------------------------------

def _lpc_autocorr(x: np.ndarray, order: int) -> np.ndarray | None:
    """Levinson-Durbin on the biased autocorrelation; None when degenerate."""
    r = np.correlate(x, x, mode="full")[x.size - 1 : x.size + order]
    if r.size < order + 1 or r[0] <= 0:
        return None
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        k = -(r[i] + np.dot(a[1:i], r[i - 1 : 0 : -1])) / err
        nxt = a.copy()
        nxt[i] = k
        nxt[1:i] += k * a[i - 1 : 0 : -1]
        a = nxt
        err *= 1.0 - k * k
        if err <= 0:
            return None
    return a


def _resonances(
    frame: np.ndarray,
    sample_rate: int,
    order: int,
    pre_emphasis: float,
    max_bandwidth_hz: float,
    min_freq_hz: float,
) -> list[tuple[float, float]]:
    """(center_hz, bandwidth_hz) pairs from upper-half-plane LPC roots."""
    x = np.append(frame[0], frame[1:] - pre_emphasis * frame[:-1])
    a = _lpc_autocorr(x, order)
    if a is None:
        return []
    out = []
    for root in np.roots(a):
        angle = np.angle(root)
        mag = abs(root)
        if 0.0 < angle < np.pi and mag > 0.0:
            freq = angle * sample_rate / (2.0 * np.pi)
            bandwidth = -(sample_rate / np.pi) * np.log(mag)
            if bandwidth <= max_bandwidth_hz and freq >= min_freq_hz:
                out.append((float(freq), float(bandwidth)))
    out.sort()
    return out


def formant_bandwidth_divergence(
    a: Waveform,
    b: Waveform,
    cfg: StftConfig | None = None,
    vad: VadConfig | None = None,
    pre_emphasis: float = 0.97,
    lpc_order: int | None = None,
    n_formants: int = 3,
    max_bandwidth_hz: float = 400.0,
    min_freq_hz: float = 90.0,
) -> float:
    """Mean |bandwidth difference| of the first formants over co-voiced frames.

    Formants are LPC resonances sorted by center frequency; wide-bandwidth
    and near-DC root pairs are discarded as non-formant.  Frames where either
    side yields no resonance are excluded; with no usable co-voiced frame the
    result is the NaN sentinel.
    """
    if a.sample_rate != b.sample_rate:
        raise IncompatibleError("sample rates differ")
    cfg = cfg or StftConfig()
    order = lpc_order if lpc_order is not None else 2 + a.sample_rate // 1000
    voiced_a = vad_decisions(a, cfg, vad)
    voiced_b = vad_decisions(b, cfg, vad)
    frames_a = frame_signal(a.samples, cfg)
    frames_b = frame_signal(b.samples, cfg)
    t = min(len(voiced_a), len(voiced_b))
    per_frame = []
    for i in range(t):
        if not (voiced_a[i] and voiced_b[i]):
            continue
        res_a = _resonances(frames_a[i], a.sample_rate, order, pre_emphasis,
                            max_bandwidth_hz, min_freq_hz)
        res_b = _resonances(frames_b[i], b.sample_rate, order, pre_emphasis,
                            max_bandwidth_hz, min_freq_hz)
        k = min(len(res_a), len(res_b), n_formants)
        if k == 0:
            continue
        per_frame.append(
            sum(abs(res_a[j][1] - res_b[j][1]) for j in range(k)) / k
        )
    if not per_frame:
        return UNDEFINED
    return float(np.mean(per_frame))


# ---------------------------------------------------------------------------
# Edit distance / WER
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    level: str = "word"


@dataclass(frozen=True)
class EditCounts:
    distance: int
    substitutions: int
    insertions: int
    deletions: int


def edit_distance(ref: TokenSeq, hyp: TokenSeq) -> EditCounts:
    """Unit-cost Levenshtein from ref to hyp with an S/I/D backtrace."""
    r, h = ref.tokens, hyp.tokens
    n, m = len(r), len(h)
    dist = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dist[i - 1, j - 1] + (r[i - 1] != h[j - 1])
            dele = dist[i - 1, j] + 1
            ins = dist[i, j - 1] + 1
            dist[i, j] = min(sub, dele, ins)
    subs = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + (r[i - 1] != h[j - 1]):
            subs += r[i - 1] != h[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and dist[i, j] == dist[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(int(dist[n, m]), int(subs), int(ins), int(dels))


def wer(ref: TokenSeq, hyp: TokenSeq) -> float:
    """(S + I + D) / len(ref); raises on an empty reference."""
    if not ref.tokens:
        raise ZeroDivisionError("WER undefined for an empty reference")
    counts = edit_distance(ref, hyp)
    return (counts.substitutions + counts.insertions + counts.deletions) / len(ref.tokens)


# ---------------------------------------------------------------------------
# Metric records and Pearson correlation table
# ---------------------------------------------------------------------------

@dataclass
class MetricRecord:
    """Per-utterance artifact metrics plus optional external quality columns."""

    utterance_id: str
    lsd: float = UNDEFINED
    emb_cos_dist: float = UNDEFINED
    vad_mismatch_s: float = UNDEFINED
    formant_bw_div: float = UNDEFINED
    pesq: float | None = None
    stoi: float | None = None
    snr_db: float | None = None


ARTIFACT_COLUMNS = ("lsd", "emb_cos_dist", "vad_mismatch_s", "formant_bw_div", "snr_db")
QUALITY_COLUMNS = ("pesq", "stoi")


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson r; NaN when either column has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.linalg.norm(xc) * np.linalg.norm(yc)
    if denom == 0.0:
        return UNDEFINED
    return float(np.dot(xc, yc) / denom)


@dataclass(frozen=True)
class CorrelationTable:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: np.ndarray  # (len(rows), len(cols)), NaN where undefined


def correlation_table(
    records: list[MetricRecord],
    rows: tuple[str, ...] = ARTIFACT_COLUMNS,
    cols: tuple[str, ...] = QUALITY_COLUMNS,
) -> CorrelationTable:
    """Pearson r per (artifact metric, quality metric), pairwise-complete."""
    values = np.full((len(rows), len(cols)), UNDEFINED)
    for i, row_name in enumerate(rows):
        for j, col_name in enumerate(cols):
            xs, ys = [], []
            for rec in records:
                x = getattr(rec, row_name)
                y = getattr(rec, col_name)
                if x is None or y is None:
                    continue
                if math.isfinite(x) and math.isfinite(y):
                    xs.append(x)
                    ys.append(y)
            if len(xs) >= 3:
                values[i, j] = pearson(np.array(xs), np.array(ys))
    return CorrelationTable(tuple(rows), tuple(cols), values)


# ---------------------------------------------------------------------------
# CSV and transcript I/O
# ---------------------------------------------------------------------------

_RECORD_FIELDS = [f.name for f in fields(MetricRecord)]


def write_metric_records(records: list[MetricRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(_RECORD_FIELDS)
        for rec in records:
            row = []
            for name in _RECORD_FIELDS:
                value = getattr(rec, name)
                if value is None or (isinstance(value, float) and math.isnan(value)):
                    row.append("")
                else:
                    row.append(value)
            writer.writerow(row)


def read_metric_records(path) -> list[MetricRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "utterance_id" not in reader.fieldnames:
            raise FormatError("metric CSV missing utterance_id column")
        for line in reader:
            kwargs = {"utterance_id": line["utterance_id"]}
            for name in _RECORD_FIELDS[1:]:
                raw = line.get(name, "")
                if raw is None or raw == "":
                    kwargs[name] = None if name in ("pesq", "stoi", "snr_db") else UNDEFINED
                else:
                    kwargs[name] = float(raw)
            records.append(MetricRecord(**kwargs))
    return records


def read_transcripts(path, level: str = "word") -> dict[str, TokenSeq]:
    """One utterance per line: utterance_id<TAB>token token ..."""
    out: dict[str, TokenSeq] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise FormatError(f"{path}:{lineno}: missing tab separator")
            uid, text = line.split("\t", 1)
            if not uid:
                raise FormatError(f"{path}:{lineno}: empty utterance id")
            out[uid] = TokenSeq(tuple(text.split()), level=level)
    return out


def write_transcripts(transcripts: dict[str, TokenSeq], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for uid in sorted(transcripts):
            f.write(f"{uid}\t{' '.join(transcripts[uid].tokens)}\n")
