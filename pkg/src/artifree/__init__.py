"""Artifact detection and suppression for stochastic speech-enhancement ensembles.

Core flow: a stochastic enhancer produces S candidate outputs per noisy
input; frame-level embedding variance across candidates scores how
artifact-prone the utterance is, and semantic-consistency selection picks
the candidate to keep.  A scheduler maps input SNR to a reverse-step count
to trade quality against latency.
"""

from .embeddings import (
    EmbeddingSequence,
    align,
    pool_mean,
    read_emb,
    reference_encode,
    write_emb,
)
from .ensemble import (
    FLATTEN_PEARSON,
    MEAN_FRAME_COSINE,
    SelectionResult,
    SimilarityMatrix,
    select_by_reference,
    select_centrality,
    similarity_matrix,
)
from .errors import (
    ArtifreeError,
    CalibrationError,
    DegenerateSignalError,
    EnsembleSizeError,
    FormatError,
    IncompatibleError,
    ManifestError,
    SelectionError,
    SizeError,
    UnsupportedFormatError,
)
from .metrics import (
    CorrelationTable,
    EditCounts,
    MetricRecord,
    TokenSeq,
    VadConfig,
    correlation_table,
    edit_distance,
    emb_cosine_distance,
    formant_bandwidth_divergence,
    lsd,
    pearson,
    vad_decisions,
    vad_mismatch,
    wer,
)
from .predictor import (
    ArtifactReport,
    artifact_score,
    calibrate_threshold,
    frame_variance,
    predict,
)
from .sampler import (
    EnhanceDetails,
    RtfMeasurement,
    SamplerConfig,
    enhance_ensemble,
    enhance_ensemble_details,
    enhance_once,
    enhance_once_details,
    measure_rtf,
)
from .scheduler import (
    BAND_NAMES,
    NSchedule,
    RtfReport,
    ScheduleCase,
    band_of_snr,
    evaluate_schedule,
    n_for_input,
    sweep_n,
)
from .signal import (
    LOG_FLOOR,
    Spectrogram,
    StftConfig,
    Waveform,
    estimate_snr,
    mix_at_snr,
    read_wav,
    stft,
    write_wav,
)

__version__ = "0.1.0"
