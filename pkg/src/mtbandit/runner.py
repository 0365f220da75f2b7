"""Run orchestration: build (policy, environment) pairs per seed, execute
them on a bounded worker pool, and write deterministic report files."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import RunReport, aggregate_seeds, build_report
from .config import ConfigError, config_digest
from .core import RngStream
from .dataset import ReplayDataset
from .environment import (
    BernoulliSpec,
    LinearGaussianSpec,
    ReplayEnvironment,
    ReplaySplit,
    SyntheticEnvironment,
)
from .policies import make_policy
from .reward import AffineNorm, RewardConfig


def reward_config_from(resolved: dict) -> RewardConfig:
    block = resolved["reward"]
    norm = {
        metric: AffineNorm(scale=spec["scale"], offset=spec["offset"])
        for metric, spec in block["normalization"].items()
    }
    return RewardConfig(
        lam=block["lambda"],
        mode=block["mode"],
        normalization=norm,
        tokenizer=block["tokenizer"],
    )


def synthetic_spec_from(resolved: dict):
    env = resolved["environment"]
    if env["kind"] == "bernoulli":
        return BernoulliSpec(means=list(env["means"]), horizon=env["horizon"])
    if env["kind"] == "linear_gaussian":
        return LinearGaussianSpec(
            thetas=[np.asarray(t) for t in env["thetas"]],
            noise=env["noise"],
            horizon=env["horizon"],
            context_mean=(
                np.asarray(env["context_mean"]) if env.get("context_mean") is not None else None
            ),
        )
    raise ConfigError(f"environment.kind: {env['kind']!r} is not synthetic")


def build_policy_for(resolved: dict, n_arms: int, dim: Optional[int], seed: int):
    block = dict(resolved["policy"])
    kind = block.pop("kind")
    if kind == "neural_linucb":
        network_seed = block.pop("network_seed", None)
        block["seed"] = network_seed if network_seed is not None else seed
        block["hidden"] = tuple(block["hidden"])
    if kind in ("linucb", "neural_linucb"):
        if dim is None or dim == 0:
            raise ConfigError(
                f"policy.kind: {kind!r} is contextual but the environment provides no contexts"
            )
        return make_policy(kind, n_arms, dim=dim, **block)
    return make_policy(kind, n_arms, **block)


def run_synthetic_seed(resolved: dict, digest: str, seed: int) -> RunReport:
    spec = synthetic_spec_from(resolved)
    if isinstance(spec, BernoulliSpec):
        n_arms, dim = len(spec.means), None
    else:
        n_arms, dim = len(spec.thetas), spec.dim
    rng = RngStream(seed)
    policy = build_policy_for(resolved, n_arms, dim, seed)
    records = SyntheticEnvironment(spec).run(policy, rng)
    return build_report(policy.kind, digest, seed, records, n_arms)


def run_replay_seed(
    resolved: dict, digest: str, seed: int, dataset: ReplayDataset
) -> RunReport:
    env_block = resolved["environment"]
    reward_cfg = reward_config_from(resolved)
    rng = RngStream(seed)
    policy = build_policy_for(
        resolved, dataset.n_arms, dataset.dim if dataset.has_contexts else None, seed
    )
    try:
        env = ReplayEnvironment(
            dataset,
            reward_cfg,
            rng,
            split=ReplaySplit(env_block["explore_rows"], env_block["test_rows"]),
            passes=env_block["passes"],
            freeze_on_test=env_block["freeze_on_test"],
        )
    except ValueError as exc:
        # Mode/split demands the log cannot meet; refuse before any rounds run.
        raise ConfigError(str(exc)) from exc
    records = env.run(policy)
    return build_report(
        policy.kind,
        digest,
        seed,
        records,
        dataset.n_arms,
        dataset=dataset,
        reward_config=reward_cfg,
    )


def execute(resolved: dict, dataset: Optional[ReplayDataset] = None) -> list[RunReport]:
    """Run every seed on a bounded pool; results come back in seed order."""
    digest = config_digest(resolved)
    seeds = resolved["seeds"]
    if resolved["environment"]["kind"] == "replay":
        if dataset is None:
            dataset = ReplayDataset.from_jsonl(resolved["environment"]["log"])
        work = lambda s: run_replay_seed(resolved, digest, s, dataset)
    else:
        work = lambda s: run_synthetic_seed(resolved, digest, s)
    if resolved["workers"] == 1 or len(seeds) == 1:
        return [work(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=resolved["workers"]) as pool:
        return list(pool.map(work, seeds))


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_reports(
    reports: list[RunReport], out_dir, csv: bool = False
) -> list[Path]:
    """Write per-seed and aggregated reports (and optional CSV extracts)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        path = out / f"report_seed{report.seed}.json"
        _dump_json(report.to_dict(), path)
        written.append(path)
    aggregate = aggregate_seeds(reports)
    agg_path = out / "report_aggregate.json"
    _dump_json(aggregate.to_dict(), agg_path)
    written.append(agg_path)
    if csv:
        curve_path = out / "regret_curve.csv"
        with curve_path.open("w", encoding="utf-8") as fh:
            fh.write("round,mean_cumulative_regret\n")
            for i, v in enumerate(aggregate.regret_curve, start=1):
                fh.write(f"{i},{v!r}\n")
        hist_path = out / "arm_histogram.csv"
        with hist_path.open("w", encoding="utf-8") as fh:
            fh.write("arm,mean_selections\n")
            for a, v in enumerate(aggregate.arm_histogram):
                fh.write(f"{a},{v!r}\n")
        written.extend([curve_path, hist_path])
    return written


def reaggregate(report_paths: list[Path], out_dir) -> Path:
    """Re-aggregate existing per-seed report files into a fresh aggregate."""
    reports = []
    for path in report_paths:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.append(RunReport.from_dict(data))
    aggregate = aggregate_seeds(reports)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agg_path = out / "report_aggregate.json"
    _dump_json(aggregate.to_dict(), agg_path)
    return agg_path
