"""Batch export: WAV files listed in a manifest -> EMB1 files + updated manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .audio import load_wav_mono_16k
from .emb1 import write_emb1
from .encoder import EncoderError, SpeechEncoder


class ExportError(RuntimeError):
    pass


@dataclass
class ExportJob:
    manifest_path: str
    encoder: str
    out_dir: str
    layer: str | int = "last"
    batch_size: int = 8


@dataclass
class FileStatus:
    utterance_id: str
    wav_path: str
    emb_path: str | None
    ok: bool
    error: str | None = None


@dataclass
class ExportResult:
    entries: list[dict]
    statuses: list[FileStatus] = field(default_factory=list)
    frame_hop_ms: float = 0.0
    dim: int = 0

    @property
    def n_failed(self) -> int:
        return sum(1 for s in self.statuses if not s.ok)


def _load_manifest(path) -> list[dict]:
    entries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            if "utterance_id" not in entry or "role" not in entry:
                raise ExportError(f"{path}:{lineno}: entry needs utterance_id and role")
            entries.append(entry)
    return entries


def _save_manifest(entries: list[dict], path) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(json.dumps(entry, sort_keys=True) + "\n")
    tmp.replace(path)


def export(job: ExportJob) -> ExportResult:
    """Fill emb_path for every manifest entry that has a wav_path.

    One EMB1 per WAV, named after the WAV stem.  Deterministic given fixed
    model weights: eval mode, no dropout, single-threaded math.  Files that
    fail are reported in the per-file status list; the job only raises when
    the encoder cannot be loaded or no file succeeds.
    """
    encoder = SpeechEncoder.load(job.encoder)
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = _load_manifest(job.manifest_path)

    old_threads = torch.get_num_threads()
    torch.set_num_threads(1)  # deterministic reductions across runs
    statuses: list[FileStatus] = []
    try:
        for chunk_start in range(0, len(entries), job.batch_size):
            for entry in entries[chunk_start : chunk_start + job.batch_size]:
                wav = entry.get("wav_path")
                if not wav:
                    continue
                uid = entry["utterance_id"]
                emb_path = out_dir / (Path(wav).stem + ".emb1")
                try:
                    samples = load_wav_mono_16k(wav)
                    frames = encoder.encode(samples, layer=job.layer)
                    tmp = Path(str(emb_path) + ".tmp")
                    write_emb1(frames, encoder.frame_hop_ms, tmp)
                    tmp.replace(emb_path)
                    entry["emb_path"] = str(emb_path)
                    statuses.append(FileStatus(uid, wav, str(emb_path), ok=True))
                except (OSError, ValueError, EncoderError) as exc:
                    statuses.append(FileStatus(uid, wav, None, ok=False, error=str(exc)))
    finally:
        torch.set_num_threads(old_threads)

    if statuses and all(not s.ok for s in statuses):
        raise ExportError(
            "every file failed; first error: " + (statuses[0].error or "unknown")
        )
    manifest_out = out_dir / Path(job.manifest_path).name
    _save_manifest(entries, manifest_out)
    return ExportResult(
        entries=entries,
        statuses=statuses,
        frame_hop_ms=encoder.frame_hop_ms,
        dim=encoder.dim,
    )
