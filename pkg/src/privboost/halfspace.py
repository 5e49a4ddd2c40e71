"""Large-margin halfspace learning: the centering weak learner, its
Gaussian-mechanism privatization, and the boosted strong learner.

Examples live in the L2 unit ball with labels in {-1, +1}.  The weak
learner centers the re-weighted sample, ``z = sum_j D(j) y_j x_j``, and the
private variant adds spherical Gaussian noise to ``z``.  The strong learner
boosts the private weak learner under lazy-Bregman re-weighting and returns
the plain mean of the per-round vectors, so the output is itself a
halfspace.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .boosting import BoostConfig, BoostOutput, LazyBregmanMeasure, boost, clamped_values
from .exceptions import (
    BadParamsError,
    BadSigmaError,
    DimensionMismatchError,
    LengthMismatchError,
    NormViolationError,
    SampleTooSmallWarning,
)
from .measures import as_distribution
from .privacy import ApproxDpParams, ZcdpLedger, calibrate_sigma, weak_learner_rho
from .rng import as_generator

__all__ = [
    "LabeledSample",
    "weak_learn_center",
    "weak_learn_private",
    "advantage",
    "classify",
    "empirical_error",
    "LearnerSchedule",
    "schedule",
    "LearnerParams",
    "HalfspaceResult",
    "learn_halfspace",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class LabeledSample:
    """An immutable labeled sample: rows of ``x`` in the unit ball, ``y`` in {-1, +1}."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise BadParamsError("x must be a nonempty (n, d) array")
        if y.shape != (x.shape[0],):
            raise LengthMismatchError(
                f"labels have shape {y.shape}, expected ({x.shape[0]},)"
            )
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise BadParamsError("labels must be exactly -1 or +1")
        norms_sq = np.einsum("ij,ij->i", x, x)
        worst = float(norms_sq.max())
        if worst > (1.0 + _NORM_TOL) ** 2:
            raise NormViolationError(
                f"an example has norm {math.sqrt(worst):.12g} > 1"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @cached_property
    def signed_x(self) -> np.ndarray:
        """``y_i * x_i`` rows; cached since the boosting loop reuses it."""
        signed = self.y[:, None] * self.x
        signed.setflags(write=False)
        return signed

    @cached_property
    def signed_x_t(self) -> np.ndarray:
        """Contiguous transpose of ``signed_x`` for fast weighted sums."""
        transposed = np.ascontiguousarray(self.signed_x.T)
        transposed.setflags(write=False)
        return transposed


def weak_learn_center(sample: LabeledSample, dist) -> np.ndarray:
    """Centering weak learner: ``z = sum_j D(j) y_j x_j``.

    Always has ``||z|| <= 1`` since it is a convex combination of unit-ball
    points.
    """
    d = as_distribution(dist)
    if d.size != sample.n:
        raise LengthMismatchError(
            f"distribution length {d.size} does not match sample size {sample.n}"
        )
    return sample.signed_x_t @ d


def weak_learn_private(
    sample: LabeledSample, dist, sigma: float, rng
) -> np.ndarray:
    """Centering weak learner with spherical Gaussian noise of scale sigma.

    At ``sigma = 0`` this is exactly the noiseless learner (and consumes no
    randomness).
    """
    sigma = float(sigma)
    if sigma < 0.0:
        raise BadSigmaError(f"sigma must be nonnegative, got {sigma}")
    z = weak_learn_center(sample, dist)
    if sigma == 0.0:
        return z
    return z + sigma * as_generator(rng).standard_normal(sample.d)


def advantage(z, sample: LabeledSample, dist) -> float:
    """Weighted advantage ``(1/2) sum_j D(j) y_j clamp(h(x_j))``.

    Equals ``1/2 - (1/2) sum_j D(j) |clamp(h(x_j)) - y_j|``, how far the
    hypothesis beats random guessing under ``D``.
    """
    d = as_distribution(dist)
    if d.size != sample.n:
        raise LengthMismatchError(
            f"distribution length {d.size} does not match sample size {sample.n}"
        )
    return float(0.5 * (d @ (sample.y * clamped_values(sample, z))))


def classify(z, points) -> np.ndarray | int:
    """Predict ``sign(z . x)`` with the tie rule ``sign(0) = +1``."""
    z = np.asarray(z, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    if (single and pts.shape[0] != z.shape[0]) or (
        not single and pts.shape[1] != z.shape[0]
    ):
        raise DimensionMismatchError(
            f"points of dimension {pts.shape[-1]} vs hypothesis of dimension {z.shape[0]}"
        )
    scores = pts @ z
    labels = np.where(scores >= 0.0, 1, -1)
    return int(labels) if single else labels


def empirical_error(z, sample: LabeledSample) -> float:
    """Fraction of the sample misclassified by ``sign(z . x)``."""
    return float(np.mean(classify(z, sample.x) != sample.y))


class LearnerSchedule(NamedTuple):
    """Derived boosting parameters for the strong halfspace learner."""

    kappa: float
    lam: float
    rounds: int
    sigma: float


def schedule(
    alpha: float, beta: float, tau: float, noise_constant: float = 1.0
) -> LearnerSchedule:
    """Parameter schedule of the strong learner.

    ``kappa = alpha/4``, ``lambda = tau/8``, ``rounds =
    ceil(1024 ln(1/kappa) / tau^2)`` and a noise scale at which the weak
    learner retains advantage ``tau/8`` for all rounds simultaneously with
    probability ``1 - beta/3``:

        ``sigma = tau / (8 c sqrt(ln(3072 ln(1/kappa) / (beta tau^2))))``.

    The constant ``c`` is not pinned by the analysis; it defaults to 1 and
    is exposed as ``noise_constant``.
    """
    for name, value in (("alpha", alpha), ("beta", beta), ("tau", tau)):
        if not 0.0 < float(value) < 1.0:
            raise BadParamsError(f"{name} must lie in (0, 1), got {value}")
    noise_constant = float(noise_constant)
    if noise_constant <= 0.0:
        raise BadParamsError(f"noise_constant must be positive, got {noise_constant}")
    kappa = alpha / 4.0
    lam = tau / 8.0
    log_kappa = math.log(1.0 / kappa)
    rounds = math.ceil(1024.0 * log_kappa / (tau * tau))
    failure_odds = 3072.0 * log_kappa / (beta * tau * tau)
    sigma = tau / (8.0 * noise_constant * math.sqrt(math.log(failure_odds)))
    return LearnerSchedule(kappa, lam, rounds, sigma)


@dataclass(frozen=True)
class LearnerParams:
    """Configuration of the strong halfspace learner.

    ``sigma_override`` fixes the noise scale directly (0 disables noise and
    makes the run deterministic); ``privacy_target`` instead calibrates the
    scale to hit a requested (epsilon, delta); otherwise the schedule's
    formula is used.  ``rounds_override`` replaces the schedule's round
    count, mainly for experiments and smoke tests.
    """

    alpha: float
    beta: float
    tau: float
    sigma_override: Optional[float] = None
    privacy_target: Optional[ApproxDpParams] = None
    noise_constant: float = 1.0
    rounds_override: Optional[int] = None
    record_trace: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "tau"):
            value = getattr(self, name)
            if not 0.0 < float(value) < 1.0:
                raise BadParamsError(f"{name} must lie in (0, 1), got {value}")
        if self.sigma_override is not None and self.sigma_override < 0.0:
            raise BadSigmaError(f"sigma must be nonnegative, got {self.sigma_override}")
        if self.rounds_override is not None and int(self.rounds_override) < 1:
            raise BadParamsError("rounds_override must be at least 1")


class HalfspaceResult(NamedTuple):
    hypothesis: np.ndarray
    ledger: ZcdpLedger
    boost: BoostOutput


def learn_halfspace(sample: LabeledSample, params: LearnerParams, rng) -> HalfspaceResult:
    """Boost the private centering learner into a proper halfspace.

    Runs the lazy-Bregman booster with the schedule derived from
    ``params``, composing the per-round zCDP budget
    ``8 / (kappa n sigma)^2`` into a ledger (infinite when ``sigma = 0``).
    Returns the mean hypothesis vector (a proper halfspace), the ledger and
    the full boosting output.

    Warns (``SampleTooSmallWarning``) when ``n < 8 / (kappa tau)``, an
    advisory Chernoff-style threshold below which label noise plausibly
    overwhelms the weak learner; the run proceeds regardless.
    """
    rng = as_generator(rng)
    kappa, lam, rounds, sigma = schedule(
        params.alpha, params.beta, params.tau, params.noise_constant
    )
    if params.rounds_override is not None:
        rounds = int(params.rounds_override)
    if params.sigma_override is not None:
        sigma = float(params.sigma_override)
    elif params.privacy_target is not None:
        sigma = calibrate_sigma(params.privacy_target, rounds, kappa, sample.n)

    if sample.n < 8.0 / (kappa * params.tau):
        warnings.warn(
            f"sample size {sample.n} is below the advisory minimum "
            f"{8.0 / (kappa * params.tau):.0f} for alpha={params.alpha}, "
            f"tau={params.tau}",
            SampleTooSmallWarning,
            stacklevel=2,
        )

    producer = LazyBregmanMeasure(kappa, lam)

    def private_centering(s, dist, g):
        return weak_learn_private(s, dist, sigma, g)

    output = boost(
        sample,
        BoostConfig(kappa, lam, rounds),
        producer,
        private_centering,
        rng,
        record_trace=params.record_trace,
    )

    if sigma == 0.0:
        rho_round = float("inf")
    else:
        rho_round = weak_learner_rho(kappa, sample.n, 1.0 / (kappa * sample.n), sigma)
    ledger = ZcdpLedger.from_entries(
        (f"round-{t + 1}", rho_round) for t in range(rounds)
    )
    return HalfspaceResult(output.aggregate, ledger, output)
