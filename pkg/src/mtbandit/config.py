"""Run configuration: loading, whole-config validation with field-path
diagnostics, and the content digest that names a run.

Configs are JSON. Command-line flags override file values; the resolved
result is validated as a whole before any run starts.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

CONFIG_VERSION = 1

POLICY_KINDS = ("ucb", "thompson", "linucb", "neural_linucb")
ENV_KINDS = ("replay", "bernoulli", "linear_gaussian")


class ConfigError(ValueError):
    """Invalid configuration; message starts with the offending field path."""


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _number(value, path: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        path,
        f"expected a number, got {value!r}",
    )
    return float(value)


def _integer(value, path: str) -> int:
    _require(
        isinstance(value, int) and not isinstance(value, bool),
        path,
        f"expected an integer, got {value!r}",
    )
    return int(value)


_POLICY_PARAM_DEFAULTS: dict[str, dict] = {
    "ucb": {"alpha": 0.5},
    "thompson": {},
    "linucb": {"alpha": 1.5, "ridge": 1.0},
    "neural_linucb": {
        "alpha": 1.5,
        "ridge": 1.0,
        "latent_dim": 50,
        "hidden": [50, 50],
        "learning_rate": 1e-3,
        "train_batch": 32,
        "epochs": 5,
        "minibatch": 16,
        "buffer_cap": 4096,
        "network_seed": None,
    },
}


def _validate_policy(block, path: str) -> dict:
    _require(isinstance(block, dict), path, "expected an object")
    kind = block.get("kind")
    _require(
        kind in POLICY_KINDS,
        f"{path}.kind",
        f"unknown policy name {kind!r}; choose from {list(POLICY_KINDS)}",
    )
    defaults = dict(_POLICY_PARAM_DEFAULTS[kind])
    for key, value in block.items():
        if key == "kind":
            continue
        _require(key in defaults, f"{path}.{key}", f"unknown parameter for policy {kind!r}")
        defaults[key] = value
    out = {"kind": kind}
    for key, value in defaults.items():
        p = f"{path}.{key}"
        if key in ("alpha", "ridge", "learning_rate"):
            value = _number(value, p)
            _require(value >= 0.0, p, "must be nonnegative")
            if key == "ridge":
                _require(value > 0.0, p, "must be positive")
        elif key in ("latent_dim", "train_batch", "epochs", "minibatch", "buffer_cap"):
            value = _integer(value, p)
            _require(value >= 0 if key == "train_batch" else value >= 1, p, "out of range")
        elif key == "hidden":
            _require(
                isinstance(value, list) and len(value) == 2,
                p,
                "expected [width1, width2]",
            )
            value = [_integer(v, f"{p}[{i}]") for i, v in enumerate(value)]
        elif key == "network_seed" and value is not None:
            value = _integer(value, p)
        out[key] = value
    return out


def _validate_reward(block, path: str) -> dict:
    if block is None:
        block = {}
    _require(isinstance(block, dict), path, "expected an object")
    out = {
        "lambda": 0.4,
        "mode": "reference_based",
        "tokenizer": "whitespace+punct",
        "normalization": {},
    }
    for key, value in block.items():
        _require(key in out, f"{path}.{key}", "unknown reward field")
        out[key] = value
    lam = _number(out["lambda"], f"{path}.lambda")
    _require(0.0 <= lam <= 1.0, f"{path}.lambda", "must lie in [0, 1]")
    out["lambda"] = lam
    _require(
        out["mode"] in ("reference_based", "target_free"),
        f"{path}.mode",
        f"unknown mode {out['mode']!r}",
    )
    _require(
        out["tokenizer"] in ("whitespace", "whitespace+punct"),
        f"{path}.tokenizer",
        f"unknown tokenizer {out['tokenizer']!r}",
    )
    norm = out["normalization"]
    _require(isinstance(norm, dict), f"{path}.normalization", "expected an object")
    clean = {}
    for metric, spec in norm.items():
        p = f"{path}.normalization.{metric}"
        _require(metric in ("bleu", "comet", "cometkiwi"), p, "unknown metric")
        _require(isinstance(spec, dict), p, "expected {scale, offset}")
        scale = _number(spec.get("scale", 1.0), f"{p}.scale")
        offset = _number(spec.get("offset", 0.0), f"{p}.offset")
        _require(scale >= 0.0, f"{p}.scale", "must be nonnegative (monotone map)")
        clean[metric] = {"scale": scale, "offset": offset}
    out["normalization"] = clean
    return out


def _validate_environment(block, path: str) -> dict:
    _require(isinstance(block, dict), path, "expected an object")
    kind = block.get("kind")
    _require(
        kind in ENV_KINDS,
        f"{path}.kind",
        f"unknown environment {kind!r}; choose from {list(ENV_KINDS)}",
    )
    out: dict = {"kind": kind}
    if kind == "bernoulli":
        allowed = {"kind", "means", "horizon"}
        for key in block:
            _require(key in allowed, f"{path}.{key}", "unknown field for bernoulli world")
        means = block.get("means")
        _require(isinstance(means, list) and means, f"{path}.means", "expected a non-empty list")
        clean = []
        for i, v in enumerate(means):
            v = _number(v, f"{path}.means[{i}]")
            _require(0.0 <= v <= 1.0, f"{path}.means[{i}]", "must lie in [0, 1]")
            clean.append(v)
        out["means"] = clean
        out["horizon"] = _integer(block.get("horizon"), f"{path}.horizon")
        _require(out["horizon"] >= 1, f"{path}.horizon", "must be >= 1")
    elif kind == "linear_gaussian":
        allowed = {"kind", "thetas", "noise", "horizon", "context_mean"}
        for key in block:
            _require(key in allowed, f"{path}.{key}", "unknown field for linear_gaussian world")
        thetas = block.get("thetas")
        _require(isinstance(thetas, list) and thetas, f"{path}.thetas", "expected a non-empty list")
        dim = None
        clean_thetas = []
        for a, vec in enumerate(thetas):
            p = f"{path}.thetas[{a}]"
            _require(isinstance(vec, list) and vec, p, "expected a non-empty vector")
            vals = [_number(v, f"{p}[{i}]") for i, v in enumerate(vec)]
            if dim is None:
                dim = len(vals)
            _require(len(vals) == dim, p, f"length {len(vals)} != {dim}")
            clean_thetas.append(vals)
        out["thetas"] = clean_thetas
        noise = _number(block.get("noise", 0.0), f"{path}.noise")
        _require(noise >= 0.0, f"{path}.noise", "must be nonnegative")
        out["noise"] = noise
        out["horizon"] = _integer(block.get("horizon"), f"{path}.horizon")
        _require(out["horizon"] >= 1, f"{path}.horizon", "must be >= 1")
        mean = block.get("context_mean")
        if mean is not None:
            _require(
                isinstance(mean, list) and len(mean) == dim,
                f"{path}.context_mean",
                f"expected a length-{dim} vector",
            )
            mean = [_number(v, f"{path}.context_mean[{i}]") for i, v in enumerate(mean)]
        out["context_mean"] = mean
    else:  # replay
        allowed = {"kind", "log", "explore_rows", "test_rows", "passes", "freeze_on_test"}
        for key in block:
            _require(key in allowed, f"{path}.{key}", "unknown field for replay environment")
        log = block.get("log")
        _require(isinstance(log, str) and log, f"{path}.log", "expected a log file path")
        out["log"] = log
        for key in ("explore_rows", "test_rows"):
            value = block.get(key)
            if value is not None:
                value = _integer(value, f"{path}.{key}")
                _require(value >= 0, f"{path}.{key}", "must be nonnegative")
            out[key] = value
        passes = block.get("passes", 1)
        out["passes"] = _integer(passes, f"{path}.passes")
        _require(out["passes"] >= 0, f"{path}.passes", "must be >= 0")
        freeze = block.get("freeze_on_test", False)
        _require(isinstance(freeze, bool), f"{path}.freeze_on_test", "expected true/false")
        out["freeze_on_test"] = freeze
    return out


def resolve_config(raw: dict) -> dict:
    """Validate a raw config dict and fill defaults; returns the resolved form."""
    _require(isinstance(raw, dict), "config", "expected a JSON object")
    known = {"version", "policy", "reward", "environment", "seeds", "workers", "out_dir"}
    for key in raw:
        _require(key in known, key, "unknown top-level field")
    version = raw.get("version", CONFIG_VERSION)
    _require(version == CONFIG_VERSION, "version", f"unsupported config version {version!r}")
    _require("policy" in raw, "policy", "required section missing")
    _require("environment" in raw, "environment", "required section missing")
    seeds = raw.get("seeds", [0])
    _require(isinstance(seeds, list) and seeds, "seeds", "expected a non-empty list")
    clean_seeds = []
    for i, s in enumerate(seeds):
        s = _integer(s, f"seeds[{i}]")
        _require(0 <= s < 2**64, f"seeds[{i}]", "must be a 64-bit unsigned integer")
        clean_seeds.append(s)
    _require(len(set(clean_seeds)) == len(clean_seeds), "seeds", "must be distinct")
    workers = raw.get("workers", min(4, len(clean_seeds)))
    workers = _integer(workers, "workers")
    _require(workers >= 1, "workers", "must be >= 1")
    out_dir = raw.get("out_dir")
    if out_dir is not None:
        _require(isinstance(out_dir, str), "out_dir", "expected a path string")

    return {
        "version": CONFIG_VERSION,
        "policy": _validate_policy(raw["policy"], "policy"),
        "reward": _validate_reward(raw.get("reward"), "reward"),
        "environment": _validate_environment(raw["environment"], "environment"),
        "seeds": clean_seeds,
        "workers": workers,
        "out_dir": out_dir,
    }


def load_config(path, overrides: Optional[dict] = None) -> dict:
    """Read a config file, apply flag overrides, validate, and resolve."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON ({exc.msg}, line {exc.lineno})") from exc
    if overrides:
        raw = apply_overrides(raw, overrides)
    return resolve_config(raw)


def apply_overrides(raw: dict, overrides: dict) -> dict:
    """Merge command-line overrides into a raw config (flags win)."""
    out = json.loads(json.dumps(raw))  # deep copy, JSON-typed
    if overrides.get("seeds") is not None:
        out["seeds"] = overrides["seeds"]
    if overrides.get("policy") is not None:
        out.setdefault("policy", {})
        out["policy"] = {"kind": overrides["policy"]}
    if overrides.get("out_dir") is not None:
        out["out_dir"] = overrides["out_dir"]
    if overrides.get("passes") is not None:
        out.setdefault("environment", {})
        out["environment"]["passes"] = overrides["passes"]
    if overrides.get("freeze_on_test"):
        out.setdefault("environment", {})
        out["environment"]["freeze_on_test"] = True
    if overrides.get("workers") is not None:
        out["workers"] = overrides["workers"]
    return out


def config_digest(resolved: dict) -> str:
    """Content hash naming the run; excludes output location and worker count."""
    semantic = {k: v for k, v in resolved.items() if k not in ("out_dir", "workers")}
    canonical = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
