"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`).

Replay criteria run on the shipped 200-row fixtures with exploration
settings sized for the 400-round budget: initial optimism alpha/sqrt(ridge)
is kept above the reward scale so every arm gets probed, while alpha itself
is small enough that confidence widths drop under the 0.05 arm margin
within the explore pass.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from mtbandit import linalg
from mtbandit.cli import main
from mtbandit.core import RngStream
from mtbandit.dataset import ReplayDataset
from mtbandit.environment import (
    BernoulliSpec,
    LinearGaussianSpec,
    ReplayEnvironment,
    SyntheticEnvironment,
)
from mtbandit.neural import MlpNetwork, NeuralLinUcbPolicy
from mtbandit.policies import LinUcbPolicy, ThompsonPolicy, UcbPolicy
from mtbandit.reward import RewardConfig, sentence_bleu

from oracles import batch_ridge_estimate, direct_inverse, oracle_sentence_bleu

REPO = Path(__file__).resolve().parents[1]
FIXTURE_FULL = REPO / "fixtures" / "replay_fixture_200.jsonl"
FIXTURE_FREE = REPO / "fixtures" / "replay_fixture_200_targetfree.jsonl"

SEEDS = list(range(1, 21))


def criterion(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def expected_regret_curve(records):
    inc = [float(r.expected_per_arm.max() - r.expected_per_arm[r.chosen]) for r in records]
    return np.cumsum(inc)


# ---------------------------------------------------------------- bernoulli


@pytest.fixture(scope="module")
def bernoulli_runs():
    spec = BernoulliSpec(means=[0.5, 0.45, 0.4, 0.35, 0.3], horizon=10_000)
    start = time.monotonic()
    out = {}
    for kind, make in (("ucb", lambda: UcbPolicy(5, alpha=0.5)), ("ts", lambda: ThompsonPolicy(5))):
        curves, tail_fracs = [], []
        for seed in SEEDS:
            records = SyntheticEnvironment(spec).run(make(), RngStream(seed))
            curves.append(expected_regret_curve(records))
            tail_fracs.append(np.mean([r.chosen == 0 for r in records[-1000:]]))
        out[kind] = {"curves": curves, "tail_fracs": tail_fracs}
    out["elapsed"] = time.monotonic() - start
    return out


def test_regret_sanity_bernoulli(bernoulli_runs):
    ok = True
    details = []
    for kind in ("ucb", "ts"):
        mean_regret = np.mean([c[-1] for c in bernoulli_runs[kind]["curves"]])
        best_frac = np.mean(bernoulli_runs[kind]["tail_fracs"])
        details.append(f"{kind}: regret {mean_regret:.1f}, best-arm share {best_frac:.3f}")
        ok &= mean_regret < 250.0 and best_frac >= 0.80
    elapsed = bernoulli_runs["elapsed"]
    details.append(f"runtime {elapsed:.1f}s")
    ok &= elapsed < 30.0
    criterion("regret sanity: 5-arm bernoulli, 20 seeds, T=10000", ok, "; ".join(details))


def test_sublinearity_every_seed(bernoulli_runs):
    ok = True
    for kind in ("ucb", "ts"):
        for curve in bernoulli_runs[kind]["curves"]:
            ok &= curve[9_999] / 10_000 < curve[999] / 1_000
    criterion("sublinearity: regret(10k)/10k < regret(1k)/1k on every seed", ok)


# ------------------------------------------------------------- linear world


def test_linucb_recovery_and_regret_vs_ucb():
    dim = 8
    thetas = []
    for sign, axis in ((1, 1), (-1, 1), (1, 2), (-1, 2)):
        t = np.zeros(dim)
        t[0] = 0.55
        t[axis] = sign * 0.35
        thetas.append(t)
    spec = LinearGaussianSpec(
        thetas=thetas,
        noise=0.05,
        horizon=2_000,
        context_mean=np.array([2.5] + [0.0] * (dim - 1)),
    )
    ok = True
    details = []
    worst_recovery = 0.0
    worst_ratio = 0.0
    for seed in (1, 2, 3):
        lin = LinUcbPolicy(4, dim, alpha=1.0, ridge=1.0)
        lin_records = SyntheticEnvironment(spec).run(lin, RngStream(seed))
        ucb_records = SyntheticEnvironment(spec).run(UcbPolicy(4, alpha=0.5), RngStream(seed))
        for arm in range(4):
            xs = [r.context for r in lin_records if r.chosen == arm]
            rs = [r.reward for r in lin_records if r.chosen == arm]
            oracle = batch_ridge_estimate(1.0, xs, rs, dim)
            ok &= bool(np.max(np.abs(lin.theta[arm] - oracle)) < 1e-8)
            worst_recovery = max(worst_recovery, float(np.linalg.norm(lin.theta[arm] - thetas[arm])))
        ratio = expected_regret_curve(lin_records)[-1] / expected_regret_curve(ucb_records)[-1]
        worst_ratio = max(worst_ratio, ratio)
    ok &= worst_recovery < 0.1 and worst_ratio < 0.5
    details.append(f"worst ||theta_hat - theta*|| {worst_recovery:.4f} (< 0.1)")
    details.append(f"worst regret ratio vs UCB {worst_ratio:.3f} (< 0.5)")
    criterion("linucb recovery: d=8, sigma=0.05, T=2000", ok, "; ".join(details))


# ----------------------------------------------------------- linear algebra


def test_sherman_morrison_oracle():
    worst = 0.0
    for dim in (2, 8, 16):
        rng = RngStream(300 + dim)
        a_inv = linalg.identity_inverse(dim, 1.0)
        xs = []
        for _ in range(1_000):
            x = rng.normal(size=dim)
            xs.append(x)
            a_inv = linalg.rank1_inverse_update(a_inv, x)
        diff = float(np.max(np.abs(a_inv - direct_inverse(1.0, xs, dim))))
        worst = max(worst, diff)
    criterion(
        "sherman-morrison: 1000 rank-1 updates at d in {2,8,16} vs direct inverse",
        worst < 1e-8,
        f"worst max-abs diff {worst:.2e}",
    )


# ------------------------------------------------------------ neural linucb


def test_neural_gradients_and_identity_reduction():
    # finite-difference gradient check on a 5-sample buffer
    policy = NeuralLinUcbPolicy(2, 4, latent_dim=6, hidden=(8, 8), train_batch=0, seed=23)
    fill = RngStream(24)
    for _ in range(5):
        policy.update(fill.integers(0, 2), float(fill.uniform()), fill.normal(size=4))
    xs = np.stack([x for x, _, _ in policy.buffer])
    thetas = np.stack([policy.head.theta[a] for _, a, _ in policy.buffer])
    rewards = np.array([r for _, _, r in policy.buffer])
    net = policy.network
    _, grads = net.loss_and_gradients(xs, thetas, rewards)
    h = 1e-5
    worst_rel = 0.0
    for param, grad in zip(net.parameters(), grads):
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + h
            up, _ = net.loss_and_gradients(xs, thetas, rewards)
            param[idx] = orig - h
            down, _ = net.loss_and_gradients(xs, thetas, rewards)
            param[idx] = orig
            numeric = (up - down) / (2 * h)
            rel = abs(numeric - grad[idx]) / max(abs(numeric), abs(grad[idx]), 1e-8)
            worst_rel = max(worst_rel, rel)
            it.iternext()

    # identity feature map, training disabled: decision trace equals LinUCB's
    dim = 3
    neural = NeuralLinUcbPolicy(2, dim, alpha=1.2, network=MlpNetwork.identity(dim), train_batch=0)
    plain = LinUcbPolicy(2, dim, alpha=1.2)
    world = RngStream(77)
    rng_a, rng_b = RngStream(13), RngStream(13)
    trace_equal = True
    for _ in range(300):
        x = world.normal(size=dim)
        a, b = neural.select(rng_a, x), plain.select(rng_b, x)
        trace_equal &= a == b
        r = float(world.uniform())
        neural.update(a, r, x)
        plain.update(b, r, x)
    for arm in range(2):
        trace_equal &= bool(np.array_equal(neural.head.a_inv[arm], plain.a_inv[arm]))
        trace_equal &= bool(np.array_equal(neural.head.theta[arm], plain.theta[arm]))

    ok = worst_rel < 1e-4 and trace_equal
    criterion(
        "neural linucb: gradient check + identity reduction",
        ok,
        f"worst rel grad err {worst_rel:.2e}; trace bit-identical: {trace_equal}",
    )


# -------------------------------------------------------------------- bleu


def bleu_case_table():
    rng = RngStream(42)
    vocab = "a b c d e f g h".split()
    cases = []
    for n in range(4, 14):  # 10 perfect matches
        seq = [vocab[rng.integers(0, 8)] for _ in range(n)]
        cases.append((seq, list(seq)))
    for n in range(2, 7):  # 5 zero-overlap
        cases.append((["x"] * n, [vocab[rng.integers(0, 8)] for _ in range(n + 2)]))
    for n in range(1, 11):  # 10 brevity-penalty cases (hyp shorter than ref)
        ref = [vocab[rng.integers(0, 8)] for _ in range(n + 6)]
        cases.append((ref[: max(1, n // 2 + 1)], ref))
    for n in range(4, 14):  # 10 smoothing triggers: shared unigrams, scrambled order
        ref = [vocab[i % 8] for i in range(n)]
        hyp = list(reversed(ref))
        cases.append((hyp, ref))
    # 5 structural edge cases
    cases.append(([], ["word"]))
    cases.append((["word"], ["word"]))
    cases.append((["a", "a", "a", "a"], ["a", "a"]))  # clipping
    cases.append((["a", "b"] * 5, ["a", "b", "a", "b"]))  # long hyp, BP=1
    cases.append((["a", "b", "c"], ["c", "b", "a"]))
    for _ in range(10):  # 10 random mixtures
        hyp = [vocab[rng.integers(0, 8)] for _ in range(rng.integers(1, 12))]
        ref = [vocab[rng.integers(0, 8)] for _ in range(rng.integers(1, 12))]
        cases.append((hyp, ref))
    return cases


def test_bleu_matches_counting_oracle():
    cases = bleu_case_table()
    assert len(cases) == 50
    worst = 0.0
    for hyp, ref in cases:
        worst = max(worst, abs(sentence_bleu(hyp, ref) - oracle_sentence_bleu(hyp, ref)))
    criterion(
        "bleu oracle: 50-case table within 1e-9",
        worst < 1e-9,
        f"worst abs diff {worst:.2e}",
    )


# ------------------------------------------------------------------ replay


def parity_policies(dim):
    # Small-budget exploration calibration, see module docstring.
    return {
        "ucb": lambda seed: UcbPolicy(3, alpha=0.4),
        "thompson": lambda seed: ThompsonPolicy(3),
        "linucb": lambda seed: LinUcbPolicy(3, dim, alpha=0.2, ridge=0.025),
        "neural_linucb": lambda seed: NeuralLinUcbPolicy(
            3, dim, alpha=0.2, ridge=0.025, train_batch=100, seed=seed
        ),
    }


def run_parity(dataset, reward_config, label):
    rewards = dataset.reward_matrix(reward_config)
    means = np.sort(rewards.mean(axis=0))[::-1]
    margin = means[0] - means[1]
    assert abs(margin - 0.05) < 1e-9, f"fixture margin drifted: {margin}"
    best_mean = means[0]
    ok = True
    details = [f"best arm mean {best_mean:.4f}, margin {margin:.4f}"]
    for name, make in parity_policies(dataset.dim).items():
        passed = 0
        for seed in SEEDS:
            env = ReplayEnvironment(dataset, reward_config, RngStream(seed), passes=1)
            records = env.run(make(seed))
            test_mean = np.mean([r.reward for r in records if r.split == "test"])
            passed += test_mean >= best_mean - 0.02
        details.append(f"{name} {passed}/20")
        ok &= passed >= 18
    criterion(label, ok, "; ".join(details))


def test_replay_parity_reference_based():
    dataset = ReplayDataset.from_jsonl(FIXTURE_FULL)
    run_parity(
        dataset,
        RewardConfig(lam=0.4),
        "replay parity: 200-row fixture, 200-round explore, >= 18/20 seeds",
    )


def test_replay_parity_target_free():
    dataset = ReplayDataset.from_jsonl(FIXTURE_FREE)
    run_parity(
        dataset,
        RewardConfig(mode="target_free"),
        "target-free parity: cometkiwi-only fixture, same bound",
    )


# -------------------------------------------------------------- determinism


def test_invocations_are_byte_deterministic(tmp_path):
    sim_cfg = {
        "policy": {"kind": "thompson"},
        "environment": {"kind": "bernoulli", "means": [0.8, 0.5, 0.2], "horizon": 500},
        "seeds": [11, 12],
    }
    rep_cfg = {
        "policy": {"kind": "linucb", "alpha": 0.2, "ridge": 0.025},
        "reward": {"lambda": 0.4},
        "environment": {"kind": "replay", "log": str(FIXTURE_FULL), "passes": 1},
        "seeds": [5],
    }
    ok = True
    for label, cfg, command in (("sim", sim_cfg, "simulate"), ("rep", rep_cfg, "replay")):
        path = tmp_path / f"{label}.json"
        path.write_text(json.dumps(cfg))
        snapshots = []
        for attempt in ("x", "y"):
            out = tmp_path / f"{label}-{attempt}"
            assert main([command, "--config", str(path), "--out", str(out)]) == 0
            snapshots.append({p.name: p.read_bytes() for p in sorted(out.glob("*.json"))})
        ok &= snapshots[0] == snapshots[1]
    criterion("determinism: repeated invocations produce byte-identical reports", ok)
