"""Command-line pipeline driver.

Subcommands: simulate, embed, detect, select, calibrate, metrics, correlate,
wer, sweep-n, eval-schedule, report.  Exit codes: 0 success, 2 input error,
3 computation sentinel (undefined result on every input).  Errors print one
machine-parsable line to stderr: "error: {json}".
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import embeddings, ensemble, manifest, metrics, predictor, scheduler
from .errors import ArtifreeError
from .manifest import ManifestEntry, UtteranceGroup
from .sampler import SamplerConfig, enhance_ensemble_details
from .signal import StftConfig, estimate_snr, mix_at_snr, read_wav, stft, write_wav


class SentinelExit(Exception):
    """Computation produced only undefined sentinels; exit code 3."""


def _default_seed() -> int:
    return int(os.environ.get("ARTIFREE_SEED", "0"))


def _derive_seed(seed: int, tag: str) -> int:
    return (seed + zlib.crc32(tag.encode())) % 2**63


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return _json_safe(float(obj))
    return obj


def _write_jsonl(rows: list[dict], path: str | None) -> None:
    text = "".join(json.dumps(_json_safe(row), sort_keys=True) + "\n" for row in rows)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        tmp = Path(path + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)


def _write_json(obj: dict, path: str | None) -> None:
    text = json.dumps(_json_safe(obj), sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        tmp = Path(path + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)


def _require_file(path: str | None, what: str) -> str:
    if not path:
        raise ArtifreeError(f"missing {what}")
    if not Path(path).is_file():
        raise ArtifreeError(f"{what} not found: {path}")
    return path


def _load_groups(path: str) -> dict[str, UtteranceGroup]:
    return manifest.group_by_utterance(manifest.load_manifest(path))


def _map_jobs(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _stft_config(args) -> StftConfig:
    return StftConfig(window_len=args.window_len, hop=args.hop)


def _sampler_config(args, seed: int) -> SamplerConfig:
    return SamplerConfig(
        n_steps=args.n_steps,
        noise_sigma0=args.sigma0,
        decay=args.decay,
        halluc_rate=args.halluc_rate,
        halluc_strength=args.halluc_strength,
        seed=seed,
        stft=_stft_config(args),
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default: $ARTIFREE_SEED or 0)")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads over utterances")
    parser.add_argument("--window-len", type=int, default=510)
    parser.add_argument("--hop", type=int, default=128)


def _add_sampler_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-steps", type=int, default=30)
    parser.add_argument("--sigma0", type=float, default=0.5)
    parser.add_argument("--decay", type=float, default=0.6)
    parser.add_argument("--halluc-rate", type=float, default=0.0)
    parser.add_argument("--halluc-strength", type=float, default=4.0)


def _emb_for_entry(entry: ManifestEntry, cfg: StftConfig) -> embeddings.EmbeddingSequence:
    if entry.emb_path:
        return embeddings.read_emb(_require_file(entry.emb_path, "embedding file"))
    wav = read_wav(_require_file(entry.wav_path, "wav file"))
    return embeddings.reference_encode(wav, cfg)


def _candidate_entries(group: UtteranceGroup, limit: int | None) -> list[ManifestEntry]:
    cands = group.candidates
    if limit is not None:
        cands = cands[:limit]
    if len(cands) < 2:
        raise ArtifreeError(
            f"{group.utterance_id}: need at least 2 candidates, found {len(cands)}"
        )
    return cands


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_stft = _stft_config(args)

    specs = []
    with open(_require_file(args.spec, "simulation spec"), encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            for key in ("utterance_id", "clean_wav", "noise_wav", "snr_db"):
                if key not in raw:
                    raise ArtifreeError(f"{args.spec}:{lineno}: missing {key}")
            specs.append(raw)
    specs.sort(key=lambda r: r["utterance_id"])

    def emit(wave, stem: str) -> tuple[str, str]:
        # atomic per-file writes: concurrent utterance workers never collide
        wav_path = out_dir / f"{stem}.wav"
        emb_path = out_dir / f"{stem}.emb1"
        for target, writer in (
            (wav_path, lambda p: write_wav(wave, p, encoding="float32")),
            (emb_path, lambda p: embeddings.write_emb(embeddings.reference_encode(wave, cfg_stft), p)),
        ):
            tmp = Path(str(target) + ".tmp")
            writer(tmp)
            tmp.replace(target)
        return str(wav_path), str(emb_path)

    def run_one(spec: dict) -> list[ManifestEntry]:
        uid = spec["utterance_id"]
        clean = read_wav(_require_file(spec["clean_wav"], "clean wav"))
        noise = read_wav(_require_file(spec["noise_wav"], "noise wav"))
        noisy = mix_at_snr(clean, noise, float(spec["snr_db"]), _derive_seed(seed, f"{uid}/mix"))
        cfg = _sampler_config(args, _derive_seed(seed, f"{uid}/sample"))
        runs = enhance_ensemble_details(noisy, clean, cfg, args.S)

        entries = []
        for role, wave, extra in [("clean", clean, {}), ("noisy", noisy, {"snr_db": float(spec["snr_db"])})]:
            wav_path, emb_path = emit(wave, f"{uid}.{role}")
            entries.append(
                ManifestEntry(uid, role, wav_path=wav_path, emb_path=emb_path, **extra)
            )
        for idx, (wave, details) in enumerate(runs):
            wav_path, emb_path = emit(wave, f"{uid}.cand{idx}")
            entries.append(
                ManifestEntry(
                    uid, "candidate", wav_path=wav_path, emb_path=emb_path,
                    index=idx, hallucinated=details.hallucinated,
                )
            )
        return entries

    all_entries = [e for batch in _map_jobs(run_one, specs, args.jobs) for e in batch]
    manifest.save_manifest(all_entries, out_dir / "manifest.jsonl")
    print(f"wrote {len(specs)} utterances to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# embed
# ---------------------------------------------------------------------------

def cmd_embed(args) -> int:
    entries = manifest.load_manifest(_require_file(args.manifest, "manifest"))
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    cfg = _stft_config(args)

    def run_one(entry: ManifestEntry) -> ManifestEntry:
        if entry.emb_path and not args.force:
            return entry
        if not entry.wav_path:
            return entry
        wav_path = Path(_require_file(entry.wav_path, "wav file"))
        target_dir = out_dir or wav_path.parent
        emb_path = target_dir / (wav_path.stem + ".emb1")
        seq = embeddings.reference_encode(read_wav(wav_path), cfg)
        tmp = Path(str(emb_path) + ".tmp")
        embeddings.write_emb(seq, tmp)
        tmp.replace(emb_path)
        return replace(entry, emb_path=str(emb_path))

    updated = _map_jobs(run_one, entries, args.jobs)
    manifest.save_manifest(updated, args.out)
    print(f"embedded manifest written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# detect / select / calibrate
# ---------------------------------------------------------------------------

def cmd_detect(args) -> int:
    groups = _load_groups(_require_file(args.manifest, "manifest"))
    cfg = _stft_config(args)

    def run_one(group: UtteranceGroup) -> dict:
        cands = _candidate_entries(group, args.S)
        embs = [_emb_for_entry(e, cfg) for e in cands]
        report = predictor.predict(embs, args.tau)
        return {
            "utterance_id": group.utterance_id,
            "S": report.ensemble_size,
            "a": report.score,
            "tau": report.tau,
            "flag": int(report.flag),
            "v": report.variance_curve,
        }

    rows = _map_jobs(run_one, list(groups.values()), args.jobs)
    _write_jsonl(rows, args.out)
    return 0


def cmd_select(args) -> int:
    groups = _load_groups(_require_file(args.manifest, "manifest"))
    cfg = _stft_config(args)

    def run_one(group: UtteranceGroup) -> dict:
        cands = _candidate_entries(group, args.S)
        embs = [_emb_for_entry(e, cfg) for e in cands]
        matrix = ensemble.similarity_matrix(embs, method=args.method)
        try:
            if args.heuristic == "centrality":
                result = ensemble.select_centrality(matrix)
            else:
                ref_entry = group.clean if args.heuristic == "clean" else group.noisy
                if ref_entry is None:
                    raise ArtifreeError(
                        f"{group.utterance_id}: no {args.heuristic} entry for reference selection"
                    )
                ref = _emb_for_entry(ref_entry, cfg)
                result = ensemble.select_by_reference(
                    embs, ref, method=args.method, heuristic=args.heuristic
                )
            chosen, scores = result.chosen, result.scores
        except ensemble.SelectionError:
            chosen, scores = None, np.full(len(embs), np.nan)
        return {
            "utterance_id": group.utterance_id,
            "heuristic": args.heuristic,
            "method": args.method,
            "chosen_index": chosen,
            "scores": scores,
            "C": matrix.values,
        }

    rows = _map_jobs(run_one, list(groups.values()), args.jobs)
    failures = sum(1 for r in rows if r["chosen_index"] is None)
    _write_jsonl(rows, args.out)
    if rows and failures == len(rows):
        raise SentinelExit("selection undefined for every utterance")
    return 0


def cmd_calibrate(args) -> int:
    labels = {}
    with open(_require_file(args.labels, "labels file"), encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            uid, _, value = line.partition("\t")
            labels[uid] = bool(int(value))
    scored = []
    with open(_require_file(args.detect, "detect output"), encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            uid = row["utterance_id"]
            if uid not in labels:
                raise ArtifreeError(f"no label for utterance {uid}")
            scored.append((float(row["a"]), labels[uid]))
    tau, accuracy = predictor.calibrate_threshold(scored)
    _write_json({"tau": tau, "balanced_accuracy": accuracy, "n": len(scored)}, args.out)
    return 0


# ---------------------------------------------------------------------------
# metrics / correlate / wer
# ---------------------------------------------------------------------------

def _resolve_target(group: UtteranceGroup, target: str) -> ManifestEntry:
    if target == "noisy":
        if group.noisy is None:
            raise ArtifreeError(f"{group.utterance_id}: no noisy entry")
        return group.noisy
    if target.startswith("candidate:"):
        idx = int(target.split(":", 1)[1])
        for entry in group.candidates:
            if entry.index == idx:
                return entry
        raise ArtifreeError(f"{group.utterance_id}: no candidate with index {idx}")
    raise ArtifreeError(f"unknown target {target!r}")


def cmd_metrics(args) -> int:
    groups = _load_groups(_require_file(args.manifest, "manifest"))
    cfg = _stft_config(args)
    chosen_by_uid: dict[str, int] = {}
    if args.selection:
        with open(_require_file(args.selection, "selection file"), encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    row = json.loads(line)
                    if row.get("chosen_index") is not None:
                        chosen_by_uid[row["utterance_id"]] = int(row["chosen_index"])
    external: dict[str, dict] = {}
    if args.external:
        with open(_require_file(args.external, "external scores"), newline="", encoding="utf-8") as f:
            for row in csv.DictReader(f):
                external[row["utterance_id"]] = row

    def run_one(group: UtteranceGroup) -> metrics.MetricRecord:
        if group.clean is None or not group.clean.wav_path:
            raise ArtifreeError(f"{group.utterance_id}: metrics need a clean wav")
        if args.selection:
            if group.utterance_id not in chosen_by_uid:
                raise ArtifreeError(f"{group.utterance_id}: no selection result")
            target = _resolve_target(group, f"candidate:{chosen_by_uid[group.utterance_id]}")
        else:
            target = _resolve_target(group, args.target)
        clean_wav = read_wav(_require_file(group.clean.wav_path, "clean wav"))
        target_wav = read_wav(_require_file(target.wav_path, "target wav"))
        emb_clean = _emb_for_entry(group.clean, cfg)
        emb_target = _emb_for_entry(target, cfg)
        if args.mean_remove == "auto":
            mean_remove = emb_clean.source_tag == "builtin" and emb_target.source_tag == "builtin"
        else:
            mean_remove = args.mean_remove == "on"
        if group.noisy is not None and group.noisy.snr_db is not None:
            snr_db = float(group.noisy.snr_db)
        elif group.noisy is not None and group.noisy.wav_path:
            noisy_wav = read_wav(group.noisy.wav_path)
            snr_db = estimate_snr(noisy_wav, clean_wav)
        else:
            snr_db = None
        record = metrics.MetricRecord(
            utterance_id=group.utterance_id,
            lsd=metrics.lsd(stft(clean_wav, cfg), stft(target_wav, cfg)),
            emb_cos_dist=metrics.emb_cosine_distance(emb_clean, emb_target, mean_remove=mean_remove),
            vad_mismatch_s=metrics.vad_mismatch(clean_wav, target_wav, cfg),
            formant_bw_div=metrics.formant_bandwidth_divergence(clean_wav, target_wav, cfg),
            snr_db=snr_db,
        )
        ext = external.get(group.utterance_id)
        if ext:
            if ext.get("pesq"):
                record.pesq = float(ext["pesq"])
            if ext.get("stoi"):
                record.stoi = float(ext["stoi"])
        return record

    records = _map_jobs(run_one, list(groups.values()), args.jobs)
    metrics.write_metric_records(records, args.out)
    print(f"wrote {len(records)} metric records to {args.out}")
    return 0


def cmd_correlate(args) -> int:
    records = metrics.read_metric_records(_require_file(args.metrics, "metrics CSV"))
    table = metrics.correlation_table(records)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", *table.cols])
        for name, row in zip(table.rows, table.values):
            writer.writerow([name] + [("" if math.isnan(v) else repr(float(v))) for v in row])
    if np.isnan(table.values).all():
        raise SentinelExit("correlation undefined for every metric pair")
    print(f"wrote correlation table to {args.out}")
    return 0


def cmd_wer(args) -> int:
    refs = metrics.read_transcripts(_require_file(args.ref, "reference transcripts"), level=args.level)
    hyps = metrics.read_transcripts(_require_file(args.hyp, "hypothesis transcripts"), level=args.level)
    if not refs:
        raise ArtifreeError("reference transcript file is empty")
    missing = sorted(set(refs) - set(hyps))
    if missing:
        raise ArtifreeError(f"hypotheses missing for: {', '.join(missing[:5])}")
    rows = []
    total_edits = 0
    total_ref = 0
    for uid in sorted(refs):
        counts = metrics.edit_distance(refs[uid], hyps[uid])
        ref_len = len(refs[uid].tokens)
        if ref_len == 0:
            raise ArtifreeError(f"{uid}: empty reference")
        rows.append(
            {
                "utterance_id": uid,
                "distance": counts.distance,
                "substitutions": counts.substitutions,
                "insertions": counts.insertions,
                "deletions": counts.deletions,
                "ref_len": ref_len,
                "wer": counts.distance / ref_len,
            }
        )
        total_edits += counts.distance
        total_ref += ref_len
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    summary = {
        "level": args.level,
        "n": len(rows),
        "wer": total_edits / total_ref,
    }
    _write_json(summary, None)
    return 0


# ---------------------------------------------------------------------------
# sweep-n / eval-schedule / report
# ---------------------------------------------------------------------------

def _cases_from_manifest(
    groups: dict[str, UtteranceGroup], need_waves: bool, snr_report: str | None = None
) -> list[scheduler.ScheduleCase]:
    """Cases with SNR resolved by priority: manifest oracle > clean-based > blind."""
    cases = []
    sources = []
    for group in groups.values():
        snr_db = float("nan")
        source = "manifest"
        if group.noisy is not None and group.noisy.snr_db is not None:
            snr_db = float(group.noisy.snr_db)
        noisy = clean = None
        if need_waves or math.isnan(snr_db):
            if group.noisy is None or not group.noisy.wav_path:
                raise ArtifreeError(f"{group.utterance_id}: need a noisy wav")
            noisy = read_wav(_require_file(group.noisy.wav_path, "noisy wav"))
            if group.clean is not None and group.clean.wav_path:
                clean = read_wav(_require_file(group.clean.wav_path, "clean wav"))
            if math.isnan(snr_db):
                if clean is not None:
                    snr_db = estimate_snr(noisy, clean)
                    source = "clean-estimate"
                else:
                    snr_db = estimate_snr(noisy)
                    source = "blind-estimate"
        cases.append(scheduler.ScheduleCase(snr_db=snr_db, noisy=noisy, clean=clean))
        sources.append({"utterance_id": group.utterance_id, "snr_db": snr_db, "source": source})
    if snr_report:
        _write_jsonl(sources, snr_report)
    return cases


def cmd_sweep_n(args) -> int:
    groups = _load_groups(_require_file(args.manifest, "manifest"))
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = _sampler_config(args, seed)
    cases = _cases_from_manifest(groups, need_waves=True, snr_report=args.snr_report)
    n_values = [int(v) for v in args.n_values.split(",")]
    rows = scheduler.sweep_n(cases, n_values, cfg, ensemble_size=args.S,
                             timing_repeats=args.timing_repeats)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["n", "rtf", "lsd", "artifact_score"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote sweep table to {args.out}")
    return 0


def cmd_eval_schedule(args) -> int:
    groups = _load_groups(_require_file(args.manifest, "manifest"))
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = _sampler_config(args, seed)
    cases = _cases_from_manifest(groups, need_waves=args.cost_model == "measured",
                                 snr_report=args.snr_report)
    schedules = [scheduler.NSchedule.parse(s) for s in args.schedule]
    baseline = scheduler.NSchedule.parse(args.baseline)
    report = scheduler.evaluate_schedule(cases, schedules, baseline, cfg, cost_model=args.cost_model)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["Heuristic", "RTF", "RTF Δ", "LSD Δ"])
        for row in (report.baseline, *report.rows):
            writer.writerow([
                row.label,
                repr(float(row.rtf)),
                repr(float(row.rtf_delta_pct)),
                "" if row.lsd_delta_pct is None else repr(float(row.lsd_delta_pct)),
            ])
    print(f"wrote schedule report to {args.out}")
    return 0


def cmd_report(args) -> int:
    summary: dict = {}
    if args.detect:
        rows = [json.loads(l) for l in Path(_require_file(args.detect, "detect output")).read_text().splitlines() if l.strip()]
        summary["detect"] = {
            "n": len(rows),
            "flagged": sum(r["flag"] for r in rows),
            "mean_score": float(np.mean([r["a"] for r in rows])) if rows else None,
        }
    if args.select:
        rows = [json.loads(l) for l in Path(_require_file(args.select, "select output")).read_text().splitlines() if l.strip()]
        histogram: dict[str, int] = {}
        for r in rows:
            key = str(r["chosen_index"])
            histogram[key] = histogram.get(key, 0) + 1
        summary["select"] = {"n": len(rows), "chosen_histogram": dict(sorted(histogram.items()))}
    if args.metrics:
        records = metrics.read_metric_records(_require_file(args.metrics, "metrics CSV"))
        cols = {}
        for name in metrics.ARTIFACT_COLUMNS:
            values = [getattr(r, name) for r in records]
            finite = [v for v in values if v is not None and math.isfinite(v)]
            cols[name] = float(np.mean(finite)) if finite else None
        summary["metrics"] = {"n": len(records), "mean": cols}
    if not summary:
        raise ArtifreeError("report needs at least one of --detect/--select/--metrics")
    _write_json(summary, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="mix noisy inputs and run the toy enhancer ensemble")
    p.add_argument("--spec", required=True, help="JSONL of {utterance_id, clean_wav, noise_wav, snr_db}")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--S", type=int, default=5, help="ensemble size")
    _add_sampler_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("embed", help="fill missing EMB1 files using the builtin encoder")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="path for the updated manifest")
    p.add_argument("--out-dir", default=None, help="directory for EMB1 files (default: beside wavs)")
    p.add_argument("--force", action="store_true", help="recompute even when emb_path is present")
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("detect", help="embedding-variance artifact detection")
    p.add_argument("--manifest", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--S", type=int, default=None, help="use only the first S candidates")
    p.add_argument("--out", default=None, help="JSONL output (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("select", help="semantic-consistency candidate selection")
    p.add_argument("--manifest", required=True)
    p.add_argument("--heuristic", choices=("centrality", "clean", "noisy"), default="centrality")
    p.add_argument("--method", choices=ensemble.METHODS, default=ensemble.FLATTEN_PEARSON)
    p.add_argument("--S", type=int, default=None)
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("calibrate", help="threshold calibration from labeled detect output")
    p.add_argument("--detect", required=True, help="JSONL from the detect subcommand")
    p.add_argument("--labels", required=True, help="TSV: utterance_id<TAB>0|1")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("metrics", help="artifact metric records against the clean reference")
    p.add_argument("--manifest", required=True)
    p.add_argument("--target", default="noisy", help="noisy or candidate:<k>")
    p.add_argument("--selection", default=None, help="select output; scores the chosen candidate")
    p.add_argument("--external", default=None, help="CSV with utterance_id,pesq,stoi columns")
    p.add_argument("--mean-remove", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("correlate", help="Pearson table of artifact metrics vs PESQ/STOI")
    p.add_argument("--metrics", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("wer", help="edit-distance scoring of hypothesis transcripts")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--level", choices=("word", "phoneme"), default="word")
    p.add_argument("--out", default=None, help="per-utterance CSV")
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("sweep-n", help="quality/latency table across reverse-step counts")
    p.add_argument("--manifest", required=True)
    p.add_argument("--n-values", default="5,10,20,30,40")
    p.add_argument("--snr-report", default=None, help="JSONL of per-utterance SNR and its source")
    p.add_argument("--S", type=int, default=3)
    p.add_argument("--timing-repeats", type=int, default=5)
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("eval-schedule", help="compare adaptive step schedules to a baseline")
    p.add_argument("--manifest", required=True)
    p.add_argument("--schedule", action="append", required=True, help='e.g. "20,30,20,10" (repeatable)')
    p.add_argument("--baseline", default="30,30,30,30")
    p.add_argument("--cost-model", choices=("measured", "linear"), default="measured")
    p.add_argument("--snr-report", default=None, help="JSONL of per-utterance SNR and its source")
    p.add_argument("--out", required=True)
    _add_sampler_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_eval_schedule)

    p = sub.add_parser("report", help="aggregate per-utterance outputs")
    p.add_argument("--detect", default=None)
    p.add_argument("--select", default=None)
    p.add_argument("--metrics", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SentinelExit as exc:
        print("error: " + json.dumps({"code": 3, "message": str(exc)}), file=sys.stderr)
        return 3
    except (ArtifreeError, OSError, ValueError, ZeroDivisionError, json.JSONDecodeError) as exc:
        print("error: " + json.dumps({"code": 2, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
