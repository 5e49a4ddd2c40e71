"""Stateless boosting: a generic round loop over a measure producer and a
weak learner, plus the concrete lazy-Bregman measure producer.

The round loop carries no state except the list of hypotheses produced so
far.  Each round the producer recomputes the example re-weighting from that
list alone (which is what makes per-round privacy compose cleanly), the
weak learner is called on the induced distribution, and its hypothesis is
appended.  The final classifier is the sign of the mean hypothesis.

The lazy-Bregman producer assigns every example the per-hypothesis loss
``l_j(x_i) = 1 - |h_j(x_i) - y_i| / 2`` (hypothesis values clamped to
``[-1, 1]``, so losses lie in ``[0, 1]``), multiplicatively decays a
uniform-``kappa`` start by ``exp(-lambda * sum_j l_j)``, and projects the
result onto the kappa-dense measures once per round.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import BadConfigError, BadParamsError, WeakLearnerFailureError
from .measures import bregman_project_dense
from .rng import as_generator

__all__ = [
    "BoostConfig",
    "BoostTrace",
    "BoostOutput",
    "clamped_values",
    "example_losses",
    "cumulative_example_losses",
    "measure_from_cumulative_losses",
    "lazy_bregman_next_measure",
    "LazyBregmanMeasure",
    "boost",
    "aggregate_values",
    "margin_failure_fraction",
]

# Weights below this are floored before projection so that solving for the
# scaling constant never meets denormals; unreachable within tested round
# counts but cheap insurance against exp underflow.
_WEIGHT_FLOOR_LOG = math.log(1e-300)

_SMOOTH_TOL = 1e-12


@dataclass(frozen=True)
class BoostConfig:
    """Round count, density target and learning rate for one boosting run."""

    kappa: float
    lam: float
    rounds: int

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise BadConfigError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not 0.0 < self.lam < 1.0:
            raise BadConfigError(f"lambda must lie in (0, 1), got {self.lam}")
        if int(self.rounds) < 1:
            raise BadConfigError(f"rounds must be at least 1, got {self.rounds}")


@dataclass(frozen=True)
class BoostTrace:
    """Optional per-round diagnostics."""

    advantages: np.ndarray  # weak-learner advantage under the round's distribution
    densities: np.ndarray  # density of the measure handed to the learner
    max_probs: np.ndarray  # largest probability the learner saw


@dataclass(frozen=True)
class BoostOutput:
    """Hypothesis list, their mean vector, and optional diagnostics."""

    hypotheses: np.ndarray  # (rounds, d)
    aggregate: np.ndarray  # (d,), the unclamped mean of the hypothesis vectors
    trace: Optional[BoostTrace] = None

    @property
    def rounds(self) -> int:
        return self.hypotheses.shape[0]


def clamped_values(sample, z) -> np.ndarray:
    """Hypothesis values ``z . x_i`` clamped into [-1, 1].

    Privatized hypotheses can leave [-1, 1] when the added noise is large;
    every loss, advantage and margin computation uses the clamped value so
    the quantities the analysis relies on stay in range.
    """
    return np.clip(sample.x @ np.asarray(z, dtype=np.float64), -1.0, 1.0)


def example_losses(sample, z) -> np.ndarray:
    """Per-example loss ``1 - |h(x_i) - y_i| / 2`` of one hypothesis.

    Equals ``1/2 + y_i * h(x_i) / 2`` for labels in {-1, +1}; lies in
    [0, 1].  High loss means the hypothesis is confidently correct on the
    example (those examples are decayed by the re-weighting).
    """
    margins = sample.signed_x @ np.asarray(z, dtype=np.float64)
    return 0.5 + 0.5 * np.clip(margins, -1.0, 1.0)


def cumulative_example_losses(sample, hypotheses) -> np.ndarray:
    """Sum of per-example losses over a hypothesis list, in list order."""
    total = np.zeros(sample.n)
    for z in hypotheses:
        total += example_losses(sample, z)
    return total


def measure_from_cumulative_losses(
    cumulative: Optional[np.ndarray], kappa: float, lam: float, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Decay a uniform-kappa measure by accumulated losses and project.

    Returns the kappa-dense measure and its induced distribution.  With no
    accumulated loss the uniform measure is returned unchanged.  The decay
    is evaluated in log space and floored far below any reachable weight.
    """
    if cumulative is None or not np.any(cumulative):
        measure = np.full(n, kappa)
        return measure, np.full(n, 1.0 / n)
    log_w = math.log(kappa) - lam * cumulative
    raw = np.exp(np.maximum(log_w, _WEIGHT_FLOOR_LOG))
    # raw <= kappa entrywise, so its mass is at most kappa * n and the
    # capped-scaling projection always applies.
    measure = bregman_project_dense(raw, kappa)
    return measure, measure / measure.sum()


def lazy_bregman_next_measure(
    sample, hypotheses: Sequence, kappa: float, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    """One-shot lazy-Bregman re-weighting from a hypothesis list.

    Deterministic in ``(sample, hypotheses)``; the same pair always yields
    the identical measure and distribution, which the stateless-schema
    privacy argument requires.
    """
    if not 0.0 < kappa < 1.0:
        raise BadParamsError(f"kappa must lie in (0, 1), got {kappa}")
    if not 0.0 < lam < 1.0:
        raise BadParamsError(f"lambda must lie in (0, 1), got {lam}")
    cumulative = cumulative_example_losses(sample, hypotheses) if len(hypotheses) else None
    return measure_from_cumulative_losses(cumulative, kappa, lam, sample.n)


class LazyBregmanMeasure:
    """Measure producer with an optional cumulative-loss cache.

    Logically stateless: ``produce(sample, hypotheses)`` always equals the
    from-scratch recomputation (the cache only avoids re-evaluating old
    hypotheses when exactly one was appended, turning O(n T^2) total work
    into O(n T)).  Cache updates add losses in hypothesis-list order, the
    same order as the from-scratch path, so results are bit-identical.
    """

    def __init__(self, kappa: float, lam: float, use_cache: bool = True):
        if not 0.0 < kappa < 1.0:
            raise BadParamsError(f"kappa must lie in (0, 1), got {kappa}")
        if not 0.0 < lam < 1.0:
            raise BadParamsError(f"lambda must lie in (0, 1), got {lam}")
        self.kappa = kappa
        self.lam = lam
        self.use_cache = use_cache
        self._sample = None
        self._count = 0
        self._last = None
        self._cumulative: Optional[np.ndarray] = None

    def produce(self, sample, hypotheses: Sequence) -> tuple[np.ndarray, np.ndarray]:
        t = len(hypotheses)
        cached = self.use_cache and sample is self._sample
        if cached and t == self._count and (t == 0 or hypotheses[-1] is self._last):
            pass  # same round replayed, cumulative losses already current
        elif cached and t == self._count + 1 and (
            self._count == 0 or hypotheses[-2] is self._last
        ):
            if self._cumulative is None:
                self._cumulative = np.zeros(sample.n)
            self._cumulative += example_losses(sample, hypotheses[-1])
        else:
            self._cumulative = (
                cumulative_example_losses(sample, hypotheses) if t else None
            )
        self._sample = sample
        self._count = t
        self._last = hypotheses[-1] if t else None
        return measure_from_cumulative_losses(
            self._cumulative if t else None, self.kappa, self.lam, sample.n
        )

    __call__ = produce


def _as_producer(obj) -> Callable:
    return obj.produce if hasattr(obj, "produce") else obj


def _as_learner(obj) -> Callable:
    return obj.learn if hasattr(obj, "learn") else obj


def boost(
    sample,
    cfg: BoostConfig,
    produce_measure,
    weak_learner,
    rng,
    record_trace: bool = False,
) -> BoostOutput:
    """Run the stateless boosting loop for ``cfg.rounds`` rounds.

    ``produce_measure`` is called exactly once per round with the sample
    and the hypotheses produced so far, and must return a measure and its
    induced distribution; ``weak_learner(sample, distribution, rng)``
    returns a hypothesis vector.  Every distribution handed to the learner
    is checked for ``1/(kappa n)``-smoothness.  Weak-learner exceptions are
    re-raised as ``WeakLearnerFailureError`` carrying the round index.

    Rounds are inherently sequential (round t+1 re-weights by round t's
    hypothesis); with a fixed generator the run is reproducible bit for
    bit.
    """
    produce = _as_producer(produce_measure)
    learn = _as_learner(weak_learner)
    rng = as_generator(rng)

    n = sample.n
    smooth_cap = 1.0 / (cfg.kappa * n) + _SMOOTH_TOL
    hypotheses: list[np.ndarray] = []
    advantages = np.empty(cfg.rounds) if record_trace else None
    densities = np.empty(cfg.rounds) if record_trace else None
    max_probs = np.empty(cfg.rounds) if record_trace else None

    for t in range(cfg.rounds):
        measure, dist = produce(sample, hypotheses)
        top = float(dist.max())
        assert top <= smooth_cap, (
            f"round {t}: distribution max {top:.3e} exceeds 1/(kappa n)"
        )
        try:
            z = np.asarray(learn(sample, dist, rng), dtype=np.float64)
        except Exception as exc:  # noqa: BLE001 - re-raised with round index
            raise WeakLearnerFailureError(t, repr(exc)) from exc
        hypotheses.append(z)
        if record_trace:
            advantages[t] = 0.5 * float(dist @ (sample.y * clamped_values(sample, z)))
            densities[t] = float(measure.mean())
            max_probs[t] = top

    stack = np.vstack(hypotheses)
    trace = (
        BoostTrace(advantages, densities, max_probs) if record_trace else None
    )
    return BoostOutput(stack, stack.mean(axis=0), trace)


def aggregate_values(sample, hypotheses, chunk: int = 256) -> np.ndarray:
    """Mean clamped value ``(1/T) sum_t clamp(h_t(x_i))`` per example.

    Evaluated in hypothesis chunks to bound memory at large round counts.
    """
    stack = np.atleast_2d(np.asarray(hypotheses, dtype=np.float64))
    total = np.zeros(sample.n)
    for start in range(0, stack.shape[0], chunk):
        block = stack[start : start + chunk]
        total += np.clip(sample.x @ block.T, -1.0, 1.0).sum(axis=1)
    return total / stack.shape[0]


def margin_failure_fraction(output, sample, gamma: float) -> float:
    """Fraction of examples whose aggregate margin is at most ``gamma``.

    The aggregate is the clamped mean ``H(x) = (1/T) sum_t clamp(h_t(x))``;
    the returned value is ``mean(y_i H(x_i) <= gamma)``.
    """
    gamma = float(gamma)
    if gamma < 0.0:
        raise BadParamsError(f"gamma must be nonnegative, got {gamma}")
    hypotheses = output.hypotheses if isinstance(output, BoostOutput) else output
    margins = sample.y * aggregate_values(sample, hypotheses)
    return float(np.mean(margins <= gamma))
