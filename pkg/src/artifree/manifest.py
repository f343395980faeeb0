"""Line-delimited JSON manifests tying utterances to WAV/EMB1 files."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ManifestError

ROLES = ("clean", "noisy", "candidate")


@dataclass
class ManifestEntry:
    utterance_id: str
    role: str
    wav_path: str | None = None
    emb_path: str | None = None
    snr_db: float | None = None
    index: int | None = None
    transcript_ref: str | None = None
    transcript_hyp: str | None = None
    hallucinated: bool | None = None

    def validate(self):
        if not self.utterance_id:
            raise ManifestError("empty utterance_id")
        if self.role not in ROLES:
            raise ManifestError(f"unknown role {self.role!r} for {self.utterance_id}")
        if self.role == "candidate" and self.index is None:
            raise ManifestError(f"candidate entry without index: {self.utterance_id}")


@dataclass
class UtteranceGroup:
    utterance_id: str
    clean: ManifestEntry | None = None
    noisy: ManifestEntry | None = None
    candidates: list[ManifestEntry] = None

    def __post_init__(self):
        if self.candidates is None:
            self.candidates = []


def load_manifest(path) -> list[ManifestEntry]:
    entries = []
    known = set(ManifestEntry.__dataclass_fields__)
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(raw, dict):
                raise ManifestError(f"{path}:{lineno}: entry must be an object")
            entry = ManifestEntry(**{k: v for k, v in raw.items() if k in known})
            try:
                entry.validate()
            except ManifestError as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
            entries.append(entry)
    return entries


def save_manifest(entries: list[ManifestEntry], path) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        for entry in entries:
            record = {k: v for k, v in asdict(entry).items() if v is not None}
            f.write(json.dumps(record, sort_keys=True) + "\n")
    tmp.replace(path)


def group_by_utterance(entries: list[ManifestEntry]) -> dict[str, UtteranceGroup]:
    """Groups keyed by utterance_id; candidates sorted by index."""
    groups: dict[str, UtteranceGroup] = {}
    for entry in entries:
        group = groups.setdefault(entry.utterance_id, UtteranceGroup(entry.utterance_id))
        if entry.role == "clean":
            group.clean = entry
        elif entry.role == "noisy":
            group.noisy = entry
        else:
            group.candidates.append(entry)
    for group in groups.values():
        group.candidates.sort(key=lambda e: e.index)
    return dict(sorted(groups.items()))
