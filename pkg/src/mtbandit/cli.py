"""Command-line entry point.

Subcommands:
    simulate      run a policy in a synthetic world over all seeds
    replay        run a policy over a recorded score log (explore + test)
    validate-log  check a replay log against every dataset invariant
    report        re-aggregate existing per-seed report files

Exit codes: 0 success, 2 configuration error, 3 data/log error,
4 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, config_digest, load_config
from .dataset import LogValidationError, ReplayDataset, validate_log_file
from .runner import execute, reaggregate, write_reports

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def _parse_seeds(values) -> list[int] | None:
    if not values:
        return None
    seeds = []
    for chunk in values:
        for part in str(chunk).split(","):
            part = part.strip()
            if part:
                seeds.append(int(part))
    return seeds or None


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON run config file")
    parser.add_argument(
        "--seed", action="append", default=None, help="seed(s), repeatable or comma-separated"
    )
    parser.add_argument("--policy", default=None, help="override the policy kind")
    parser.add_argument("--out", default=None, help="output directory for reports")
    parser.add_argument("--workers", type=int, default=None, help="worker pool size")
    parser.add_argument("--csv", action="store_true", help="also export CSV extracts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtbandit",
        description="Bandit-based MT system selection: synthetic and replay experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run against a synthetic world")
    _add_run_flags(p_sim)

    p_rep = sub.add_parser("replay", help="run against a recorded score log")
    _add_run_flags(p_rep)
    p_rep.add_argument("--passes", type=int, default=None, help="explore passes over the log")
    p_rep.add_argument(
        "--freeze-on-test", action="store_true", help="disable learning on the test split"
    )

    p_val = sub.add_parser("validate-log", help="validate a replay log file")
    p_val.add_argument("path", help="log file to check")

    p_agg = sub.add_parser("report", help="re-aggregate per-seed reports")
    p_agg.add_argument("--reports", required=True, help="directory holding report_seed*.json")
    p_agg.add_argument("--out", required=True, help="output directory")

    return parser


def _run(args, expected_env: str) -> int:
    overrides = {
        "seeds": _parse_seeds(args.seed),
        "policy": args.policy,
        "out_dir": args.out,
        "workers": args.workers,
        "passes": getattr(args, "passes", None),
        "freeze_on_test": getattr(args, "freeze_on_test", False),
    }
    resolved = load_config(args.config, overrides)
    env_kind = resolved["environment"]["kind"]
    if expected_env == "replay" and env_kind != "replay":
        raise ConfigError(f"environment.kind: replay command needs a replay config, got {env_kind!r}")
    if expected_env == "synthetic" and env_kind == "replay":
        raise ConfigError("environment.kind: simulate command needs a synthetic config")
    out_dir = resolved.get("out_dir")
    if out_dir is None:
        raise ConfigError("out_dir: set it in the config or pass --out")
    reports = execute(resolved)
    written = write_reports(reports, out_dir, csv=args.csv)
    digest = config_digest(resolved)
    print(f"config digest {digest}")
    for report in reports:
        line = (
            f"seed {report.seed}: reward {report.cumulative_reward:.3f}, "
            f"regret {report.cumulative_regret:.3f}"
        )
        if report.test_mean_reward is not None:
            line += f", test mean reward {report.test_mean_reward:.4f}"
        print(line)
    print(f"wrote {len(written)} files to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _run(args, "synthetic")
        if args.command == "replay":
            return _run(args, "replay")
        if args.command == "validate-log":
            violations = validate_log_file(args.path)
            if violations:
                for v in violations:
                    print(v)
                return EXIT_DATA
            print("ok")
            return EXIT_OK
        if args.command == "report":
            report_dir = Path(args.reports)
            paths = sorted(report_dir.glob("report_seed*.json"))
            if not paths:
                print(f"no report_seed*.json files in {report_dir}", file=sys.stderr)
                return EXIT_DATA
            out = reaggregate(paths, args.out)
            print(f"wrote {out}")
            return EXIT_OK
        raise RuntimeError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LogValidationError as exc:
        print("log validation failed:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
