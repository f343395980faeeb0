import csv
import json
from pathlib import Path

import numpy as np
import pytest

from artifree import MetricRecord, TokenSeq, write_wav
from artifree.cli import main
from artifree.metrics import write_metric_records, write_transcripts

from synth import speechlike, white_noise


def write_sim_spec(tmp_path: Path, n_utts: int, snr_db: float = -12.0) -> Path:
    wav_dir = tmp_path / "wavs"
    wav_dir.mkdir(parents=True, exist_ok=True)
    spec_path = tmp_path / "spec.jsonl"
    with open(spec_path, "w") as f:
        for i in range(n_utts):
            uid = f"utt{i:04d}"
            clean = wav_dir / f"{uid}.clean.wav"
            noise = wav_dir / f"{uid}.noise.wav"
            write_wav(speechlike(seed=i, duration=0.6), clean, encoding="float32")
            write_wav(white_noise(seed=1000 + i, duration=1.0), noise, encoding="float32")
            f.write(json.dumps({
                "utterance_id": uid,
                "clean_wav": str(clean),
                "noise_wav": str(noise),
                "snr_db": snr_db,
            }) + "\n")
    return spec_path


def run(args):
    return main([str(a) for a in args])


class TestExitCodes:
    def test_missing_manifest_is_input_error(self, capsys):
        code = run(["detect", "--manifest", "/nonexistent.jsonl", "--tau", "0.01"])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        json.loads(err.split("error: ", 1)[1])  # machine-parsable

    def test_malformed_manifest_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "m.jsonl"
        bad.write_text('{"utterance_id": "u", "role": "martian"}\n')
        assert run(["detect", "--manifest", bad, "--tau", "0.01"]) == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["detect", "--definitely-not-a-flag", "x"])
        assert exc.value.code == 2

    def test_empty_reference_transcripts_exit_2(self, tmp_path):
        ref = tmp_path / "ref.tsv"
        hyp = tmp_path / "hyp.tsv"
        ref.write_text("")
        hyp.write_text("u1\thello\n")
        assert run(["wer", "--ref", ref, "--hyp", hyp]) == 2

    def test_all_nan_correlation_exits_3(self, tmp_path, capsys):
        records = [MetricRecord(f"u{i}", lsd=1.0, emb_cos_dist=0.1,
                                vad_mismatch_s=0.0, formant_bw_div=1.0)
                   for i in range(5)]  # no pesq/stoi anywhere
        csv_path = tmp_path / "m.csv"
        write_metric_records(records, csv_path)
        code = run(["correlate", "--metrics", csv_path, "--out", tmp_path / "c.csv"])
        assert code == 3


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """simulate -> embed -> detect -> select -> wer over 20 utterances."""
    tmp_path = tmp_path_factory.mktemp("pipe")
    spec = write_sim_spec(tmp_path, 20)
    out_dir = tmp_path / "out"
    assert run([
        "simulate", "--spec", spec, "--out-dir", out_dir, "--S", "3",
        "--n-steps", "6", "--sigma0", "0.05", "--halluc-rate", "0.5",
        "--seed", "3",
    ]) == 0
    manifest = out_dir / "manifest.jsonl"
    embedded = out_dir / "manifest.embedded.jsonl"
    assert run(["embed", "--manifest", manifest, "--out", embedded, "--force"]) == 0
    detect_out = tmp_path / "detect.jsonl"
    assert run(["detect", "--manifest", embedded, "--tau", "0.0001",
                "--out", detect_out]) == 0
    select_out = tmp_path / "select.jsonl"
    assert run(["select", "--manifest", embedded, "--heuristic", "centrality",
                "--out", select_out]) == 0
    refs = {f"utt{i:04d}": TokenSeq(("some", "spoken", "words", f"v{i}"))
            for i in range(20)}
    hyps = {uid: TokenSeq(ts.tokens[:-1] + ("wrong",)) for uid, ts in refs.items()}
    ref_path = tmp_path / "ref.tsv"
    hyp_path = tmp_path / "hyp.tsv"
    write_transcripts(refs, ref_path)
    write_transcripts(hyps, hyp_path)
    wer_out = tmp_path / "wer.csv"
    assert run(["wer", "--ref", ref_path, "--hyp", hyp_path, "--out", wer_out]) == 0
    return tmp_path


class TestPipeline:
    def test_simulate_emits_all_files(self, pipeline):
        out_dir = pipeline / "out"
        for i in range(20):
            uid = f"utt{i:04d}"
            for suffix in ("clean.wav", "noisy.wav", "cand0.wav", "cand2.wav",
                           "clean.emb1", "cand0.emb1"):
                assert (out_dir / f"{uid}.{suffix}").exists()

    def test_detect_output_shape(self, pipeline):
        rows = [json.loads(l) for l in (pipeline / "detect.jsonl").read_text().splitlines()]
        assert len(rows) == 20
        for row in rows:
            assert set(row) >= {"utterance_id", "a", "tau", "flag", "v", "S"}
            assert row["S"] == 3
            assert len(row["v"]) > 0

    def test_select_output_shape(self, pipeline):
        rows = [json.loads(l) for l in (pipeline / "select.jsonl").read_text().splitlines()]
        assert len(rows) == 20
        for row in rows:
            assert row["heuristic"] == "centrality"
            assert row["chosen_index"] in (0, 1, 2)
            assert len(row["scores"]) == 3
            assert len(row["C"]) == 3

    def test_wer_report(self, pipeline):
        with open(pipeline / "wer.csv") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 20
        assert all(float(r["wer"]) == 0.25 for r in rows)  # 1 sub over 4 tokens

    def test_report_aggregation_matches_recomputation(self, pipeline, capsys):
        assert run(["report", "--detect", pipeline / "detect.jsonl",
                    "--select", pipeline / "select.jsonl"]) == 0
        summary = json.loads(capsys.readouterr().out)
        detect_rows = [json.loads(l) for l in (pipeline / "detect.jsonl").read_text().splitlines()]
        assert summary["detect"]["n"] == len(detect_rows)
        assert summary["detect"]["flagged"] == sum(r["flag"] for r in detect_rows)
        assert summary["detect"]["mean_score"] == pytest.approx(
            float(np.mean([r["a"] for r in detect_rows]))
        )
        hist = summary["select"]["chosen_histogram"]
        assert sum(hist.values()) == 20


class TestAnalysisCommands:
    def test_metrics_then_correlate(self, pipeline, tmp_path):
        embedded = pipeline / "out" / "manifest.embedded.jsonl"
        metrics_csv = tmp_path / "metrics.csv"
        assert run(["metrics", "--manifest", embedded, "--target", "candidate:0",
                    "--out", metrics_csv]) == 0
        with open(metrics_csv) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 20
        assert all(float(r["lsd"]) > 0 for r in rows)
        assert all(r["snr_db"] == "-12.0" for r in rows)
        # join synthetic external quality columns so correlations are defined
        external = tmp_path / "external.csv"
        with open(external, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["utterance_id", "pesq", "stoi"])
            for r in rows:
                writer.writerow([r["utterance_id"], 5.0 - float(r["lsd"]) / 10.0,
                                 1.0 - float(r["emb_cos_dist"])])
        merged = tmp_path / "merged.csv"
        assert run(["metrics", "--manifest", embedded, "--target", "candidate:0",
                    "--external", external, "--out", merged]) == 0
        corr = tmp_path / "corr.csv"
        assert run(["correlate", "--metrics", merged, "--out", corr]) == 0
        with open(corr) as f:
            table = list(csv.DictReader(f))
        lsd_row = next(r for r in table if r["metric"] == "lsd")
        assert float(lsd_row["pesq"]) == pytest.approx(-1.0, abs=1e-9)

    def test_sweep_n_command(self, pipeline, tmp_path):
        manifest = pipeline / "out" / "manifest.jsonl"
        out = tmp_path / "sweep.csv"
        assert run(["sweep-n", "--manifest", manifest, "--n-values", "2,6",
                    "--S", "2", "--timing-repeats", "1", "--sigma0", "0.05",
                    "--out", out]) == 0
        with open(out) as f:
            rows = list(csv.DictReader(f))
        assert [int(r["n"]) for r in rows] == [2, 6]
        assert all(float(r["rtf"]) > 0 for r in rows)

    def test_eval_schedule_linear(self, pipeline, tmp_path):
        manifest = pipeline / "out" / "manifest.jsonl"
        out = tmp_path / "sched.csv"
        snr_report = tmp_path / "snr.jsonl"
        assert run(["eval-schedule", "--manifest", manifest,
                    "--schedule", "20,30,20,10", "--baseline", "30,30,30,30",
                    "--cost-model", "linear", "--snr-report", snr_report,
                    "--out", out]) == 0
        snr_rows = [json.loads(l) for l in snr_report.read_text().splitlines()]
        assert len(snr_rows) == 20
        assert all(r["source"] == "manifest" and r["snr_db"] == -12.0 for r in snr_rows)
        with open(out, encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert rows[0]["Heuristic"] == "[30,30,30,30]"
        assert float(rows[0]["RTF Δ"]) == 0.0
        # every pipeline utterance sits at -12 dB -> very_low band -> N=20
        assert float(rows[1]["RTF Δ"]) == pytest.approx(-100.0 / 3.0, abs=1e-9)

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        spec = write_sim_spec(tmp_path / "env", 1)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        monkeypatch.setenv("ARTIFREE_SEED", "99")
        assert run(["simulate", "--spec", spec, "--out-dir", out_a, "--S", "2",
                    "--n-steps", "3", "--sigma0", "0.05"]) == 0
        monkeypatch.delenv("ARTIFREE_SEED")
        assert run(["simulate", "--spec", spec, "--out-dir", out_b, "--S", "2",
                    "--n-steps", "3", "--sigma0", "0.05", "--seed", "99"]) == 0
        wav_a = (out_a / "utt0000.cand0.wav").read_bytes()
        wav_b = (out_b / "utt0000.cand0.wav").read_bytes()
        assert wav_a == wav_b


class TestJobsDeterminism:
    def test_parallel_detect_matches_serial(self, pipeline, tmp_path):
        embedded = pipeline / "out" / "manifest.embedded.jsonl"
        serial = tmp_path / "serial.jsonl"
        parallel = tmp_path / "parallel.jsonl"
        assert run(["detect", "--manifest", embedded, "--tau", "0.001",
                    "--out", serial, "--jobs", "1"]) == 0
        assert run(["detect", "--manifest", embedded, "--tau", "0.001",
                    "--out", parallel, "--jobs", "4"]) == 0
        assert serial.read_bytes() == parallel.read_bytes()


class TestDetectSelectSemantics:
    def test_identical_candidates_all_flags_zero(self, tmp_path):
        # manifest of candidates pointing at the same embedding file
        from artifree import EmbeddingSequence, write_emb
        rng = np.random.default_rng(8)
        emb = tmp_path / "same.emb1"
        write_emb(EmbeddingSequence(rng.standard_normal((12, 4)).astype(np.float32), 8.0), emb)
        manifest = tmp_path / "m.jsonl"
        with open(manifest, "w") as f:
            for k in range(3):
                f.write(json.dumps({
                    "utterance_id": "u0", "role": "candidate", "index": k,
                    "emb_path": str(emb),
                }) + "\n")
        out = tmp_path / "d.jsonl"
        assert run(["detect", "--manifest", manifest, "--S", "3",
                    "--tau", "0.0067", "--out", out]) == 0
        row = json.loads(out.read_text())
        assert row["flag"] == 0
        assert row["a"] == 0.0

    def test_clean_heuristic_picks_candidate_equal_to_clean(self, tmp_path):
        from artifree import EmbeddingSequence, write_emb
        rng = np.random.default_rng(9)
        clean_frames = rng.standard_normal((10, 4)).astype(np.float32)
        paths = {}
        for name, frames in [
            ("clean", clean_frames),
            ("cand0", rng.standard_normal((10, 4)).astype(np.float32)),
            ("cand1", clean_frames.copy()),
            ("cand2", rng.standard_normal((10, 4)).astype(np.float32)),
        ]:
            p = tmp_path / f"{name}.emb1"
            write_emb(EmbeddingSequence(frames, 8.0), p)
            paths[name] = p
        manifest = tmp_path / "m.jsonl"
        with open(manifest, "w") as f:
            f.write(json.dumps({"utterance_id": "u0", "role": "clean",
                                "emb_path": str(paths["clean"])}) + "\n")
            for k in range(3):
                f.write(json.dumps({"utterance_id": "u0", "role": "candidate",
                                    "index": k, "emb_path": str(paths[f"cand{k}"])}) + "\n")
        out = tmp_path / "s.jsonl"
        assert run(["select", "--manifest", manifest, "--heuristic", "clean",
                    "--out", out]) == 0
        row = json.loads(out.read_text())
        assert row["chosen_index"] == 1
