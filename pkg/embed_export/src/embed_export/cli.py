"""embed-export command: run a pretrained encoder over manifest WAVs."""

from __future__ import annotations

import argparse
import json
import sys

from .encoder import EncoderError
from .exporter import ExportError, ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="write EMB1 files and an updated manifest")
    p.add_argument("--manifest", required=True, help="JSONL manifest with wav_path entries")
    p.add_argument("--encoder", required=True, help="model id or local model directory")
    p.add_argument("--layer", default="last", help='"last" or a hidden-state index')
    p.add_argument("--out", required=True, help="output directory for EMB1 files")
    p.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        manifest_path=args.manifest,
        encoder=args.encoder,
        out_dir=args.out,
        layer=args.layer,
        batch_size=args.batch_size,
    )
    try:
        result = export(job)
    except (ExportError, EncoderError, OSError, json.JSONDecodeError) as exc:
        print("error: " + json.dumps({"code": 2, "message": str(exc)}), file=sys.stderr)
        return 2
    for status in result.statuses:
        if not status.ok:
            print(f"failed {status.utterance_id}: {status.error}", file=sys.stderr)
    print(json.dumps({
        "exported": sum(1 for s in result.statuses if s.ok),
        "failed": result.n_failed,
        "dim": result.dim,
        "frame_hop_ms": result.frame_hop_ms,
    }))
    return 0


if __name__ == "__main__":
    sys.exit(main())
