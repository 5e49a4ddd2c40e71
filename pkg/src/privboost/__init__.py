"""Differentially private smooth boosting with lazy Bregman projections.

The package provides bounded measures with KL projection onto the dense
set (:mod:`privboost.measures`), a zCDP accountant and sample-size
calculators (:mod:`privboost.privacy`), the stateless boosting loop with
the lazy-Bregman re-weighting rule (:mod:`privboost.boosting`), a private
noise-tolerant learner for large-margin halfspaces
(:mod:`privboost.halfspace`), the game-theoretic regret machinery behind
the round bound (:mod:`privboost.games`), synthetic data and label noise
(:mod:`privboost.data`), an sklearn-style estimator
(:mod:`privboost.estimator`), and a command-line front end
(:mod:`privboost.cli`).
"""

from .boosting import (
    BoostConfig,
    BoostOutput,
    LazyBregmanMeasure,
    boost,
    lazy_bregman_next_measure,
    margin_failure_fraction,
)
from .data import GeneratorConfig, NoiseConfig, apply_rcn, generate_margin_sample
from .estimator import BoostedHalfspaceClassifier
from .exceptions import PrivBoostError
from .games import iterated_play, sandwich_check, verify_regret
from .halfspace import (
    HalfspaceResult,
    LabeledSample,
    LearnerParams,
    learn_halfspace,
    weak_learn_center,
    weak_learn_private,
)
from .measures import (
    bregman_project_dense,
    density,
    induced_distribution,
    kl_divergence,
    statistical_distance,
)
from .privacy import ApproxDpParams, ZcdpLedger, calibrate_sigma, compose, zcdp_to_dp

__version__ = "0.1.0"

__all__ = [
    "ApproxDpParams",
    "BoostConfig",
    "BoostOutput",
    "BoostedHalfspaceClassifier",
    "GeneratorConfig",
    "HalfspaceResult",
    "LabeledSample",
    "LazyBregmanMeasure",
    "LearnerParams",
    "NoiseConfig",
    "PrivBoostError",
    "ZcdpLedger",
    "apply_rcn",
    "boost",
    "bregman_project_dense",
    "calibrate_sigma",
    "compose",
    "density",
    "generate_margin_sample",
    "induced_distribution",
    "iterated_play",
    "kl_divergence",
    "lazy_bregman_next_measure",
    "learn_halfspace",
    "margin_failure_fraction",
    "sandwich_check",
    "statistical_distance",
    "verify_regret",
    "weak_learn_center",
    "weak_learn_private",
    "zcdp_to_dp",
]
