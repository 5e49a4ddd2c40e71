"""zCDP accounting and the sample-complexity calculators.

The ledger tracks a running zero-concentrated differential privacy budget:
mechanisms compose additively in rho, and the total converts to approximate
``(epsilon, delta)`` differential privacy by
``epsilon = rho + 2 * sqrt(rho * ln(1/delta))``.  The Gaussian mechanism's
Renyi divergence and the per-round budget of the noisy centering weak
learner are provided in closed form, along with the inverse problem of
calibrating the noise scale to a target epsilon over a known number of
rounds.

The sample-size calculators evaluate asymptotic bounds with every hidden
constant set to one and only the explicitly known logarithmic factors kept;
they are advisory, and expose a single ``bound_scale`` multiplier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .exceptions import (
    BadDeltaError,
    BadParamsError,
    BadSigmaError,
    BadTargetError,
    NegativeRhoError,
)

__all__ = [
    "ApproxDpParams",
    "ZcdpLedger",
    "compose",
    "zcdp_to_dp",
    "epsilon_sufficient",
    "gaussian_renyi",
    "weak_learner_rho",
    "calibrate_sigma",
    "required_n_fatshattering",
    "fatshattering_terms",
    "required_n_privacy_only",
    "privacy_only_terms",
]


class ApproxDpParams(NamedTuple):
    """An approximate differential privacy guarantee (epsilon, delta)."""

    epsilon: float
    delta: float


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise BadDeltaError(f"delta must lie in (0, 1), got {delta}")
    return delta


@dataclass(frozen=True)
class ZcdpLedger:
    """Immutable record of composed zCDP budgets.

    ``rho_total`` always equals the sum of the entry budgets; ``compose``
    returns a new ledger, so values are safe to share between threads.
    """

    rho_total: float = 0.0
    entries: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        for label, rho in self.entries:
            if rho < 0.0:
                raise NegativeRhoError(f"entry {label!r} has negative rho {rho}")
        if math.isfinite(self.rho_total):
            if abs(self.rho_total - math.fsum(r for _, r in self.entries)) > 1e-12:
                raise NegativeRhoError("rho_total does not match the entry sum")

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[str, float]]) -> "ZcdpLedger":
        entries = tuple((str(label), float(rho)) for label, rho in entries)
        return cls(math.fsum(r for _, r in entries), entries)

    def to_dp(self, delta: float) -> ApproxDpParams:
        """Convert the accumulated budget to an (epsilon, delta) guarantee."""
        return zcdp_to_dp(self.rho_total, delta)


def compose(ledger: ZcdpLedger, rho_new: float, label: str) -> ZcdpLedger:
    """Append a mechanism's budget; zCDP composes additively in rho."""
    rho_new = float(rho_new)
    if rho_new < 0.0:
        raise NegativeRhoError(f"rho must be nonnegative, got {rho_new}")
    entries = ledger.entries + ((str(label), rho_new),)
    if math.isinf(rho_new) or math.isinf(ledger.rho_total):
        return ZcdpLedger(float("inf"), entries)
    return ZcdpLedger(math.fsum(r for _, r in entries), entries)


def zcdp_to_dp(rho: float, delta: float) -> ApproxDpParams:
    """Convert rho-zCDP to (epsilon, delta)-DP.

    ``epsilon = rho + 2 * sqrt(rho * ln(1/delta))``.
    """
    rho = float(rho)
    if rho < 0.0:
        raise NegativeRhoError(f"rho must be nonnegative, got {rho}")
    delta = _check_delta(delta)
    if math.isinf(rho):
        return ApproxDpParams(float("inf"), delta)
    eps = rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))
    return ApproxDpParams(eps, delta)


def epsilon_sufficient(rho: float, delta: float) -> float:
    """The cruder conversion ``3 * sqrt(rho * ln(1/delta))``.

    Any epsilon at least this large is implied by rho-zCDP (for small rho);
    the noise calibration below inverts this form.
    """
    rho = float(rho)
    if rho < 0.0:
        raise NegativeRhoError(f"rho must be nonnegative, got {rho}")
    delta = _check_delta(delta)
    return 3.0 * math.sqrt(rho * math.log(1.0 / delta))


def gaussian_renyi(distance_sq: float, sigma: float, alpha: float) -> float:
    """Order-alpha Renyi divergence between N(z, s^2 I) and N(z', s^2 I).

    Equals ``alpha * ||z - z'||^2 / (2 sigma^2)``; ``distance_sq`` is the
    squared L2 distance between the means.
    """
    distance_sq = float(distance_sq)
    sigma = float(sigma)
    alpha = float(alpha)
    if distance_sq < 0.0:
        raise BadParamsError("squared distance must be nonnegative")
    if sigma <= 0.0:
        raise BadSigmaError(f"sigma must be positive, got {sigma}")
    if alpha < 1.0:
        raise BadParamsError(f"alpha must be at least 1, got {alpha}")
    return alpha * distance_sq / (2.0 * sigma * sigma)


def weak_learner_rho(kappa: float, n: int, s: float, sigma: float) -> float:
    """Per-call zCDP budget of the noisy centering weak learner.

    ``rho = 2 * (1/(kappa n) + s)^2 / sigma^2`` where ``s`` bounds the
    statistical distance between the distributions handed to the learner on
    neighboring samples.  At the re-weighting stability bound
    ``s = 1/(kappa n)`` this is
    ``8 / (kappa n sigma)^2``.
    """
    kappa = float(kappa)
    n = int(n)
    s = float(s)
    sigma = float(sigma)
    if not 0.0 < kappa <= 1.0:
        raise BadParamsError(f"kappa must lie in (0, 1], got {kappa}")
    if n < 1:
        raise BadParamsError(f"n must be at least 1, got {n}")
    if not 0.0 <= s <= 1.0:
        raise BadParamsError(f"s must lie in [0, 1], got {s}")
    if sigma <= 0.0:
        raise BadSigmaError(f"sigma must be positive, got {sigma}")
    sensitivity = 1.0 / (kappa * n) + s
    return 2.0 * sensitivity * sensitivity / (sigma * sigma)


def calibrate_sigma(
    target: ApproxDpParams, T: int, kappa: float, n: int, exact: bool = False
) -> float:
    """Smallest noise scale meeting a privacy target over ``T`` rounds.

    Each round spends ``rho = 8 / (kappa n sigma)^2`` (the weak learner at
    the stability bound), totalling ``rho_T = 8 T / (kappa n sigma)^2``.  By
    default the sufficient condition ``epsilon >= 3 sqrt(rho_T ln(1/delta))``
    is inverted, giving

        ``sigma = 3 * sqrt(8 T ln(1/delta)) / (kappa n epsilon)``.

    With ``exact=True`` the conversion ``rho + 2 sqrt(rho ln(1/delta)) =
    epsilon`` is solved by the quadratic formula instead, which permits a
    slightly smaller sigma.
    """
    eps, delta = float(target[0]), float(target[1])
    if eps <= 0.0:
        raise BadTargetError(f"target epsilon must be positive, got {eps}")
    delta = _check_delta(delta)
    T = int(T)
    if T < 1:
        raise BadParamsError(f"T must be at least 1, got {T}")
    kappa = float(kappa)
    n = int(n)
    if not 0.0 < kappa <= 1.0:
        raise BadParamsError(f"kappa must lie in (0, 1], got {kappa}")
    if n < 1:
        raise BadParamsError(f"n must be at least 1, got {n}")

    log_term = math.log(1.0 / delta)
    if exact:
        # Solve rho + 2 sqrt(rho L) = eps for the largest admissible rho.
        sqrt_rho = math.sqrt(log_term + eps) - math.sqrt(log_term)
        rho_max = sqrt_rho * sqrt_rho
        return math.sqrt(8.0 * T / rho_max) / (kappa * n)
    return 3.0 * math.sqrt(8.0 * T * log_term) / (kappa * n * eps)


def _check_pac_params(alpha: float, beta: float, tau: float) -> tuple[float, float, float]:
    alpha, beta, tau = float(alpha), float(beta), float(tau)
    for name, value in (("alpha", alpha), ("beta", beta), ("tau", tau)):
        if not 0.0 < value < 1.0:
            raise BadParamsError(f"{name} must lie in (0, 1), got {value}")
    return alpha, beta, tau


def fatshattering_terms(
    alpha: float, beta: float, tau: float, epsilon: float, delta: float
) -> dict[str, float]:
    """The three additive terms of the margin-based sample bound.

    Substitutes ``kappa = alpha / 4``.  Raises ``BadParamsError`` when a
    logarithm in the bound is not defined for the given parameters.
    """
    alpha, beta, tau = _check_pac_params(alpha, beta, tau)
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        raise BadParamsError(f"epsilon must be positive, got {epsilon}")
    delta = _check_delta(delta)
    kappa = alpha / 4.0

    log_alpha = math.log(1.0 / alpha)
    inner = log_alpha / (beta * tau * tau)
    if inner <= 1.0:
        raise BadParamsError("log(log(1/alpha) / (beta tau^2)) is not positive here")
    privacy = math.sqrt(log_alpha * math.log(1.0 / delta) * math.log(inner)) / (
        epsilon * alpha * tau * tau
    )
    accuracy = math.log(1.0 / (tau * alpha)) * log_alpha / (alpha * alpha * tau * tau)
    tail = math.log(1.0 / beta) / (kappa * tau)
    return {"privacy": privacy, "accuracy": accuracy, "tail": tail}


def required_n_fatshattering(
    alpha: float,
    beta: float,
    tau: float,
    epsilon: float,
    delta: float,
    bound_scale: float = 1.0,
) -> int:
    """Advisory sample size from the margin (fat-shattering) analysis."""
    terms = fatshattering_terms(alpha, beta, tau, epsilon, delta)
    return math.ceil(float(bound_scale) * sum(terms.values()))


def privacy_only_terms(
    alpha: float, beta: float, tau: float, epsilon: float, delta: float
) -> dict[str, float]:
    """Additive terms of the privacy-only (noise-tolerant) sample bound.

    The internal privacy level is ``eps_T = min(epsilon, alpha/36)`` with
    ``delta_T = min(delta, eps_T * beta / 4)``; the generalization term is
    the statistical-query transfer requirement ``ln(4 eps_T/delta_T)/eps_T^2``
    and the corrupted-sample term carries its explicit Chernoff constants.
    """
    alpha, beta, tau = _check_pac_params(alpha, beta, tau)
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        raise BadParamsError(f"epsilon must be positive, got {epsilon}")
    delta = _check_delta(delta)

    eps_t = min(epsilon, alpha / 36.0)
    delta_t = min(delta, eps_t * beta / 4.0)

    log_alpha = math.log(1.0 / alpha)
    inner = log_alpha / (beta * tau * tau)
    if inner <= 1.0:
        raise BadParamsError("log(log(1/alpha) / (beta tau^2)) is not positive here")
    privacy = math.sqrt(log_alpha * math.log(1.0 / delta_t) * math.log(inner)) / (
        eps_t * alpha * tau * tau
    )
    corrupted = 96.0 * math.log(4.0 / beta) / (alpha * tau)
    generalization = math.log(4.0 * eps_t / delta_t) / (eps_t * eps_t)
    return {
        "privacy": privacy,
        "corrupted": corrupted,
        "generalization": generalization,
    }


def required_n_privacy_only(
    alpha: float,
    beta: float,
    tau: float,
    epsilon: float,
    delta: float,
    bound_scale: float = 1.0,
) -> int:
    """Advisory sample size using only the privacy-based generalization."""
    terms = privacy_only_terms(alpha, beta, tau, epsilon, delta)
    return math.ceil(float(bound_scale) * sum(terms.values()))
