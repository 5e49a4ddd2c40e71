"""Iterated play of the boosting game and regret verification.

Boosting can be read as repeated play of a zero-sum game whose rows are
sample points, whose columns are hypotheses, and whose entries are
``M(i, h) = 1 - |clamp(h(x_i)) - y_i| / 2``: the row player (the booster)
loses more on points the hypothesis predicts confidently and correctly.
This module makes that reading executable: the lazy dense update row
strategy, a prescient fixed comparator concentrating on the worst-margin
points, full iterated-play traces, and numeric checks of the regret bound

    ``avg_t M(p_t, Q_t) <= avg_t M(p, Q_t) + lambda + KL(mu, mu_1) / (lambda kappa n T)``

for any kappa-dense comparator measure ``mu`` (``p`` its normalization,
``mu_1`` the uniform measure of density kappa).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boosting import example_losses, measure_from_cumulative_losses
from .exceptions import (
    BadLossError,
    BadParamsError,
    ComparatorNotDenseError,
    LengthMismatchError,
    PrivBoostError,
)
from .measures import (
    as_distribution,
    as_measure,
    induced_distribution,
    kl_divergence,
    random_dense_measure,
)
from .rng import as_generator, stream

__all__ = [
    "game_losses",
    "expected_loss",
    "lazy_dense_update",
    "prescient_comparator",
    "best_fixed_dense_measure",
    "PlayTrace",
    "iterated_play",
    "verify_regret",
    "SandwichReport",
    "sandwich_check",
    "regret_trial",
    "regret_campaign",
]

_LOSS_TOL = 1e-12

# One row of the game against hypothesis h is exactly the per-example loss
# vector the booster's re-weighting uses; shared implementation.
game_losses = example_losses


def expected_loss(loss_vector, dist) -> float:
    """Expected loss of a mixed row strategy against a revealed loss row."""
    losses = np.asarray(loss_vector, dtype=np.float64)
    p = as_distribution(dist)
    if losses.shape != p.shape:
        raise LengthMismatchError(
            f"loss vector length {losses.shape} vs distribution {p.shape}"
        )
    return float(p @ losses)


def _check_losses(losses: np.ndarray) -> np.ndarray:
    arr = np.asarray(losses, dtype=np.float64)
    if arr.size and (arr.min() < -_LOSS_TOL or arr.max() > 1.0 + _LOSS_TOL):
        raise BadLossError("loss entries must lie in [0, 1]")
    return arr


def lazy_dense_update(
    loss_history, kappa: float, lam: float, n: Optional[int] = None
) -> np.ndarray:
    """Row-player measure after seeing a sequence of loss vectors.

    Decays the uniform-kappa start by ``exp(-lambda * sum_t l_t)`` and
    projects once; identical computation to the booster's re-weighting
    given precomputed losses.  An empty history yields the uniform measure
    (pass ``n`` explicitly in that case, it cannot be inferred).
    """
    if not 0.0 < kappa < 1.0:
        raise BadParamsError(f"kappa must lie in (0, 1), got {kappa}")
    if not 0.0 < lam < 1.0:
        raise BadParamsError(f"lambda must lie in (0, 1), got {lam}")
    rows = [_check_losses(row) for row in loss_history]
    if not rows:
        if n is None:
            raise BadParamsError("empty history: pass n to size the uniform measure")
        measure, _ = measure_from_cumulative_losses(None, kappa, lam, int(n))
        return measure
    n = rows[0].size
    cumulative = np.zeros(n)
    for row in rows:
        if row.size != n:
            raise LengthMismatchError("loss vectors must share a length")
        cumulative += row
    measure, _ = measure_from_cumulative_losses(cumulative, kappa, lam, n)
    return measure


def prescient_comparator(sample, values, kappa: float) -> tuple[np.ndarray, float]:
    """Uniform distribution on the ``ceil(kappa n)`` worst-margin points.

    Starts from every misclassified point (margin below zero) and fills in
    ascending margin order (ties by index) until the set reaches
    ``ceil(kappa n)``.  Returns that uniform distribution together with the
    largest margin among the filled-in correctly-classified points, zero if
    none were needed.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if kappa * n < 1.0:
        raise BadParamsError("kappa * n must be at least 1")
    margins = sample.y * values
    bad = margins < 0.0
    target = math.ceil(kappa * n)
    theta = 0.0
    count = int(bad.sum())
    if count < target:
        rest = np.flatnonzero(~bad)
        rest = rest[np.argsort(margins[rest], kind="stable")]
        chosen = rest[: target - count]
        bad[chosen] = True
        theta = float(margins[chosen[-1]])
    dist = bad / bad.sum()
    return dist, theta


def best_fixed_dense_measure(cumulative_losses, kappa: float) -> np.ndarray:
    """Weight one on the ``ceil(kappa n)`` smallest cumulative losses.

    The minimizer of normalized expected cumulative loss over the
    kappa-dense measures; ties broken toward lower indices.
    """
    losses = np.asarray(cumulative_losses, dtype=np.float64)
    n = losses.size
    if kappa * n < 1.0 or kappa > 1.0:
        raise BadParamsError("need 1 <= kappa * n and kappa <= 1")
    k = math.ceil(kappa * n)
    order = np.argsort(losses, kind="stable")
    measure = np.zeros(n)
    measure[order[:k]] = 1.0
    return measure


@dataclass(frozen=True)
class PlayTrace:
    """Per-round record of one iterated-play run."""

    measures: np.ndarray  # (T, n) row-player measures
    distributions: np.ndarray  # (T, n) their normalizations
    losses: np.ndarray  # (T, n) revealed loss vectors, entries in [0, 1]
    expected_losses: np.ndarray  # (T,) realized expected loss per round

    @property
    def rounds(self) -> int:
        return self.losses.shape[0]

    @property
    def n(self) -> int:
        return self.losses.shape[1]

    def validate(self) -> None:
        """Check internal consistency of the recorded rounds."""
        _check_losses(self.losses)
        recomputed = np.einsum("tn,tn->t", self.distributions, self.losses)
        if not np.allclose(recomputed, self.expected_losses, rtol=0.0, atol=1e-12):
            raise PrivBoostError("expected losses do not match distributions x losses")


def iterated_play(
    sample,
    column_player,
    kappa: float,
    lam: float,
    rounds: int,
    rng=None,
) -> PlayTrace:
    """Play the lazy dense update strategy against a column player.

    The column player may be a ``(rounds, n)`` array of loss rows revealed
    directly, a sequence of hypothesis vectors, or a callable
    ``(sample, distribution, rng) -> hypothesis`` (a weak learner).  Each
    round the row player re-weights from all previously revealed losses,
    the column plays, and the loss row ``M(i, h_t)`` is revealed.
    """
    rounds = int(rounds)
    if rounds < 1:
        raise BadParamsError(f"rounds must be at least 1, got {rounds}")

    loss_rows = None
    hypothesis_seq = None
    learner = None
    if isinstance(column_player, np.ndarray) and column_player.ndim == 2:
        loss_rows = _check_losses(column_player)
        if loss_rows.shape[0] != rounds:
            raise LengthMismatchError(
                f"loss matrix has {loss_rows.shape[0]} rows, expected {rounds}"
            )
        n = loss_rows.shape[1]
    elif callable(column_player) or hasattr(column_player, "learn"):
        learner = column_player.learn if hasattr(column_player, "learn") else column_player
        rng = as_generator(rng if rng is not None else 0)
        n = sample.n
    else:
        hypothesis_seq = list(column_player)
        if len(hypothesis_seq) != rounds:
            raise LengthMismatchError(
                f"{len(hypothesis_seq)} hypotheses supplied, expected {rounds}"
            )
        n = sample.n

    measures = np.empty((rounds, n))
    distributions = np.empty((rounds, n))
    losses = np.empty((rounds, n))
    expected = np.empty(rounds)
    cumulative = np.zeros(n)

    for t in range(rounds):
        measure, dist = measure_from_cumulative_losses(
            cumulative if t else None, kappa, lam, n
        )
        if loss_rows is not None:
            row = loss_rows[t]
        elif hypothesis_seq is not None:
            row = game_losses(sample, hypothesis_seq[t])
        else:
            row = game_losses(sample, learner(sample, dist, rng))
        measures[t] = measure
        distributions[t] = dist
        losses[t] = row
        expected[t] = dist @ row
        cumulative += row

    return PlayTrace(measures, distributions, losses, expected)


def verify_regret(
    trace: PlayTrace, comparator, kappa: float, lam: float
) -> tuple[bool, float]:
    """Check the lazy-dense-update regret bound against one comparator.

    Evaluates both sides with the uniform-kappa start; returns whether the
    bound holds within 1e-9 and the slack (right side minus left side).
    """
    mu = as_measure(comparator)
    n = trace.n
    if mu.size != n:
        raise LengthMismatchError(f"comparator length {mu.size}, trace has n={n}")
    if mu.mean() < kappa - _LOSS_TOL:
        raise ComparatorNotDenseError(
            f"comparator density {mu.mean():.6g} is below kappa={kappa}"
        )
    p = induced_distribution(mu)
    lhs = float(trace.expected_losses.mean())
    comparator_avg = float((trace.losses @ p).mean())
    kl = kl_divergence(mu, np.full(n, kappa))
    rhs = comparator_avg + lam + kl / (lam * kappa * n * trace.rounds)
    slack = rhs - lhs
    return slack >= -1e-9, slack


@dataclass(frozen=True)
class SandwichReport:
    """All quantities of the loss sandwich for one boosting run.

    ``lower_bound <= booster_loss`` comes from the weak-learning advantage,
    ``booster_loss <= regret_upper_bound`` from the regret bound with the
    prescient comparator, and ``prescient_loss <= prescient_bound`` from
    the margin structure of the bad set.  The first inequality is only
    guaranteed when every round's measured advantage reaches gamma;
    offending rounds are listed, not raised.
    """

    rounds: int
    gamma: float
    theta: float
    lower_bound: float
    booster_loss: float
    regret_upper_bound: float
    prescient_loss: float
    prescient_bound: float
    kl_bad_set: float
    tolerance: float
    advantages: np.ndarray = field(repr=False)
    advantage_violations: tuple[int, ...] = ()

    @property
    def weak_learning_ok(self) -> bool:
        return self.lower_bound <= self.booster_loss + self.tolerance

    @property
    def regret_ok(self) -> bool:
        return self.booster_loss <= self.regret_upper_bound + self.tolerance

    @property
    def prescient_ok(self) -> bool:
        return self.prescient_loss <= self.prescient_bound + self.tolerance

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "gamma": self.gamma,
            "theta": self.theta,
            "lower_bound": self.lower_bound,
            "booster_loss": self.booster_loss,
            "regret_upper_bound": self.regret_upper_bound,
            "prescient_loss": self.prescient_loss,
            "prescient_bound": self.prescient_bound,
            "kl_bad_set": self.kl_bad_set,
            "tolerance": self.tolerance,
            "advantage_min": float(self.advantages.min()),
            "advantage_mean": float(self.advantages.mean()),
            "advantage_violations": list(self.advantage_violations),
            "weak_learning_ok": self.weak_learning_ok,
            "regret_ok": self.regret_ok,
            "prescient_ok": self.prescient_ok,
        }


def sandwich_check(
    sample,
    gamma: float,
    kappa: float,
    lam: float,
    rounds: int,
    weak_learner,
    rng=None,
) -> SandwichReport:
    """Run iterated play and verify the three-way loss sandwich.

    The regret and prescient-comparator inequalities hold for any loss
    sequence, so their failure raises; the weak-learning lower bound is
    asserted only when every round's measured advantage reached ``gamma``
    (rounds falling short are reported in the result instead).
    """
    trace = iterated_play(sample, weak_learner, kappa, lam, rounds, rng)
    n = trace.n
    tolerance = 1e-6 * rounds

    advantages = trace.expected_losses - 0.5
    violations = tuple(int(i) for i in np.flatnonzero(advantages < gamma - 1e-12))
    booster_loss = float(trace.expected_losses.sum())
    lower = rounds / 2.0 + rounds * gamma

    cumulative = trace.losses.sum(axis=0)
    margins = 2.0 * cumulative / rounds - 1.0  # y_i * H(x_i) for the clamped mean
    p_star, theta = prescient_comparator(sample, sample.y * margins, kappa)
    bad_measure = (p_star > 0).astype(np.float64)
    kl_bad = kl_divergence(bad_measure, np.full(n, kappa))
    prescient_loss = float((trace.losses @ p_star).sum())
    upper = prescient_loss + lam * rounds + kl_bad / (kappa * n * lam)
    prescient_bound = rounds / 2.0 + rounds * theta / 2.0

    report = SandwichReport(
        rounds=rounds,
        gamma=float(gamma),
        theta=theta,
        lower_bound=lower,
        booster_loss=booster_loss,
        regret_upper_bound=upper,
        prescient_loss=prescient_loss,
        prescient_bound=prescient_bound,
        kl_bad_set=float(kl_bad),
        tolerance=tolerance,
        advantages=advantages,
        advantage_violations=violations,
    )
    if not report.regret_ok:
        raise PrivBoostError(
            f"regret bound violated: {booster_loss} > {upper} + {tolerance}"
        )
    if not report.prescient_ok:
        raise PrivBoostError(
            f"prescient bound violated: {prescient_loss} > {prescient_bound} + {tolerance}"
        )
    if violations == () and not report.weak_learning_ok:
        raise PrivBoostError(
            f"weak-learning lower bound violated: {lower} > {booster_loss} + {tolerance}"
        )
    return report


def regret_trial(
    losses: np.ndarray,
    kappa: float,
    lam: float,
    rng,
    n_random_comparators: int = 10,
) -> dict:
    """Verify the regret bound on one loss matrix, many comparators.

    Plays the lazy dense strategy through ``losses``, then checks the bound
    against the best fixed dense measure in hindsight plus
    ``n_random_comparators`` random dense measures.  Returns pass/fail and
    the smallest slack observed.
    """
    losses = _check_losses(np.asarray(losses, dtype=np.float64))
    rounds, n = losses.shape
    trace = iterated_play(None, losses, kappa, lam, rounds)
    comparators = [best_fixed_dense_measure(losses.sum(axis=0), kappa)]
    comparators += [
        random_dense_measure(n, kappa, rng) for _ in range(n_random_comparators)
    ]
    min_slack = math.inf
    ok = True
    for comparator in comparators:
        holds, slack = verify_regret(trace, comparator, kappa, lam)
        ok &= holds
        min_slack = min(min_slack, slack)
    return {"ok": bool(ok), "min_slack": float(min_slack), "rounds": rounds, "n": n}


def regret_campaign(
    trials: int,
    seed: int,
    n: int,
    rounds: int,
    lam: Optional[float] = None,
    kappa: Optional[float] = None,
    n_random_comparators: int = 10,
    randomize_sizes: bool = False,
) -> dict:
    """Run many independent regret trials on random loss matrices.

    Each trial draws its own stream from ``(seed, trial)``.  With
    ``randomize_sizes`` the per-trial dimensions are drawn up to the given
    caps, and unspecified ``lam`` (in [0.01, 0.3]) or ``kappa`` are drawn
    per trial.  Returns a summary report with per-trial failures, if any.
    """
    passes = 0
    failures = []
    min_slack = math.inf
    for trial in range(int(trials)):
        g = stream(seed, "regret-trial", trial)
        n_t = int(g.integers(2, n + 1)) if randomize_sizes else int(n)
        rounds_t = int(g.integers(1, rounds + 1)) if randomize_sizes else int(rounds)
        lam_t = float(g.uniform(0.01, 0.3)) if lam is None else float(lam)
        if kappa is None:
            kappa_t = float(g.uniform(1.0 / n_t, 1.0)) if n_t > 1 else 1.0
            kappa_t = min(kappa_t, 0.999)
        else:
            kappa_t = float(kappa)
        losses = g.random((rounds_t, n_t))
        result = regret_trial(losses, kappa_t, lam_t, g, n_random_comparators)
        min_slack = min(min_slack, result["min_slack"])
        if result["ok"]:
            passes += 1
        else:
            failures.append({"trial": trial, **result})
    return {
        "trials": int(trials),
        "passes": passes,
        "failures": failures,
        "min_slack": float(min_slack),
    }
