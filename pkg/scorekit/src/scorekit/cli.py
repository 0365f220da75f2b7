"""Command line for the ingestion pipeline.

    scorekit ingest --manifest experiment.json
    scorekit verify --log scores.jsonl [--sample N]

Exit codes: 0 success, 2 manifest error, 3 pipeline/data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .encoders import EncoderError
from .ingest import IngestError, ingest
from .manifest import IngestionManifest, ManifestError
from .metrics import MetricError
from .verify import verify_against_engine


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scorekit", description="Turn MT experiment files into validated replay logs."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_ing = sub.add_parser("ingest", help="score and emit a replay log")
    p_ing.add_argument("--manifest", required=True, help="JSON ingestion manifest")
    p_ver = sub.add_parser("verify", help="cross-check a log against the replay engine")
    p_ver.add_argument("--log", required=True, help="replay log to verify")
    p_ver.add_argument("--sample", type=int, default=50, help="rows to recompute")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            manifest = IngestionManifest.from_file(args.manifest)
            report = ingest(manifest)
            print(f"wrote {report.rows_written} records to {report.output}")
            if report.rows_skipped:
                print(f"skipped {len(report.rows_skipped)} rows (see {report.sidecar})")
            return 0
        if args.command == "verify":
            report = verify_against_engine(args.log, sample=args.sample)
            print(json.dumps(report.to_dict(), indent=2))
            return 0
        raise RuntimeError(f"unhandled command {args.command}")
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return 2
    except (IngestError, EncoderError, MetricError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
