"""Bandit-based selection of machine-translation systems.

Public surface: the four policies, reward computation, synthetic and
replay environments, post-run analytics, and the run configuration layer
behind the `mtbandit` command-line tool.
"""

from .analysis import (
    RunReport,
    aggregate_seeds,
    arm_histogram,
    best_fixed_arm,
    best_fixed_arm_from_records,
    build_report,
    compute_regret,
    selected_corpus_bleu,
)
from .core import Policy, RngStream, RoundRecord, as_context, restore_policy
from .dataset import LogValidationError, ReplayDataset, ReplayRow, validate_log_file
from .environment import (
    BernoulliSpec,
    LinearGaussianSpec,
    ReplayEnvironment,
    ReplaySplit,
    SyntheticEnvironment,
)
from .neural import MlpNetwork, NeuralLinUcbPolicy
from .policies import LinUcbPolicy, ThompsonPolicy, UcbPolicy, make_policy
from .reward import (
    AffineNorm,
    MetricScores,
    RecordedScoresProvider,
    RewardConfig,
    combine_reward,
    corpus_bleu,
    sentence_bleu,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AffineNorm",
    "BernoulliSpec",
    "LinUcbPolicy",
    "LinearGaussianSpec",
    "LogValidationError",
    "MetricScores",
    "MlpNetwork",
    "NeuralLinUcbPolicy",
    "Policy",
    "RecordedScoresProvider",
    "ReplayDataset",
    "ReplayEnvironment",
    "ReplayRow",
    "ReplaySplit",
    "RewardConfig",
    "RngStream",
    "RoundRecord",
    "RunReport",
    "SyntheticEnvironment",
    "ThompsonPolicy",
    "UcbPolicy",
    "aggregate_seeds",
    "arm_histogram",
    "as_context",
    "best_fixed_arm",
    "best_fixed_arm_from_records",
    "build_report",
    "combine_reward",
    "compute_regret",
    "corpus_bleu",
    "make_policy",
    "restore_policy",
    "selected_corpus_bleu",
    "sentence_bleu",
    "tokenize",
    "validate_log_file",
]
