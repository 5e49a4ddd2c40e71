"""Bounded measures over a finite index set, divergences between them, and
Bregman (KL) projection onto the kappa-dense set via capped scaling.

A *bounded measure* is a 1-D array of weights, each in ``[0, 1]``.  Its
*density* is the mean weight, its *absolute size* the total weight, and its
*induced distribution* the normalized weight vector.  The kappa-dense set
``Gamma_kappa`` contains the measures of density at least ``kappa``; the KL
projection onto it is computed in closed form by scaling every weight by the
smallest constant ``c >= 1`` and capping at one, chosen so the result has
density exactly ``kappa``.

All functions accept array-likes, never mutate their inputs, and return
fresh ``numpy`` arrays.  Natural logarithms are used throughout.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import xlogy

from .exceptions import (
    AllZeroError,
    BadParamsError,
    LengthMismatchError,
    TooDenseError,
    TooLargeError,
    ZeroMeasureError,
)

__all__ = [
    "DENSITY_TOL",
    "as_measure",
    "as_distribution",
    "check_kappa",
    "density",
    "absolute_size",
    "induced_distribution",
    "kl_divergence",
    "statistical_distance",
    "bregman_project_dense",
    "brute_force_kl_projection",
    "random_dense_measure",
]

# Absolute tolerance for density equalities; double precision leaves ample
# headroom at n <= 1e7.
DENSITY_TOL = 1e-9

_ENTRY_TOL = 1e-12


def as_measure(weights) -> np.ndarray:
    """Validate and return a bounded measure as a float64 array."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size < 1:
        raise BadParamsError("a measure must be a nonempty 1-D vector")
    if not np.all(np.isfinite(w)):
        raise BadParamsError("measure entries must be finite")
    if w.min() < -_ENTRY_TOL or w.max() > 1.0 + _ENTRY_TOL:
        raise BadParamsError("measure entries must lie in [0, 1]")
    return w


def as_distribution(probs) -> np.ndarray:
    """Validate and return a distribution (nonnegative, sums to one)."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise BadParamsError("a distribution must be a nonempty 1-D vector")
    if not np.all(np.isfinite(p)):
        raise BadParamsError("distribution entries must be finite")
    if p.min() < -_ENTRY_TOL:
        raise BadParamsError("distribution entries must be nonnegative")
    if abs(p.sum() - 1.0) > DENSITY_TOL:
        raise BadParamsError("distribution entries must sum to one")
    return p


def check_kappa(kappa: float) -> float:
    """Validate a density target in (0, 1]."""
    kappa = float(kappa)
    if not 0.0 < kappa <= 1.0:
        raise BadParamsError(f"kappa must lie in (0, 1], got {kappa}")
    return kappa


def density(weights) -> float:
    """Mean weight of a measure; lies in [0, 1]."""
    return float(as_measure(weights).mean())


def absolute_size(weights) -> float:
    """Total weight of a measure."""
    return float(as_measure(weights).sum())


def induced_distribution(weights) -> np.ndarray:
    """Normalize a measure to a distribution.

    Raises ``ZeroMeasureError`` when the measure has zero total mass.
    """
    w = as_measure(weights)
    total = w.sum()
    if total <= 0.0:
        raise ZeroMeasureError("cannot normalize a measure with zero mass")
    return w / total


def kl_divergence(m1, m2) -> float:
    """Generalized KL divergence between bounded measures.

    Computes ``sum_i m1_i * log(m1_i / m2_i) + m2_i - m1_i`` with the
    conventions ``0 * log(0 / q) = 0`` and ``p * log(p / 0) = +inf`` for
    ``p > 0``.  Nonnegative for any pair of measures (each term is the
    Bregman divergence of x log x, which is pointwise nonnegative).
    """
    a = as_measure(m1)
    b = as_measure(m2)
    if a.size != b.size:
        raise LengthMismatchError(f"length mismatch: {a.size} vs {b.size}")
    if np.any((a > 0) & (b == 0)):
        return float("inf")
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0) / np.where(b > 0, b, 1.0)), 0.0)
    total = float(cross.sum() + b.sum() - a.sum())
    # Termwise nonnegative in exact arithmetic; clamp float rounding.
    return max(total, 0.0)


def statistical_distance(p, q) -> float:
    """Total variation distance between two finite distributions.

    Equals half the L1 distance, which on finite support coincides with the
    maximum probability gap over all events.
    """
    pa = as_distribution(p)
    qa = as_distribution(q)
    if pa.size != qa.size:
        raise LengthMismatchError(f"length mismatch: {pa.size} vs {qa.size}")
    return float(0.5 * np.abs(pa - qa).sum())


# The saturation ascent below terminates once the capped set stabilizes; on
# realistic inputs that is a handful of steps.  Past this cap we fall back
# to the sorted sweep, which handles any input in one pass.
_MAX_ASCENT_STEPS = 60


def _solve_scale_sorted(w: np.ndarray, target: float) -> float:
    """Piecewise-linear sweep over sorted weights for the scaling constant."""
    n = w.size
    ws = np.sort(w)[::-1]
    tail = np.zeros(n + 1)
    tail[:n] = np.cumsum(ws[::-1])[::-1]
    ks = np.arange(1, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        cs = (target - ks) / tail[1:n]
        feasible = (
            (tail[1:n] > 0.0)
            & (cs * ws[:-1] >= 1.0 - _ENTRY_TOL)
            & (cs * ws[1:] <= 1.0 + _ENTRY_TOL)
            & (cs >= 1.0 - _ENTRY_TOL)
        )
    hits = np.flatnonzero(feasible)
    if hits.size == 0:
        raise AllZeroError(
            "no capped scaling reaches the target density; too little nonzero mass"
        )
    return float(cs[hits[0]])


def _solve_scale_ascent(w: np.ndarray, target: float, total: float) -> float:
    """Grow the saturated set until the scaling constant is consistent.

    Starting from ``c = target / total`` (a lower bound on the solution),
    repeatedly cap the entries that ``c`` saturates and re-solve the linear
    equation on the rest.  ``c`` only increases and the capped set only
    grows, so the loop ends at the exact solution with no tolerance
    parameter; returns ``nan`` if the step cap is hit first.
    """
    c = target / total
    saturated_count = 0
    for _ in range(_MAX_ASCENT_STEPS):
        saturated = c * w >= 1.0
        count = int(saturated.sum())
        if count == saturated_count and saturated_count > 0:
            return c
        unsaturated_mass = float(np.where(saturated, 0.0, w).sum())
        remaining = target - count
        if unsaturated_mass <= 0.0:
            if abs(remaining) <= DENSITY_TOL:
                return c  # everything nonzero is capped at one
            raise AllZeroError(
                "no capped scaling reaches the target density; too little nonzero mass"
            )
        next_c = remaining / unsaturated_mass
        if count == saturated_count or next_c <= c:
            return c if saturated_count > 0 else next_c
        c = next_c
        saturated_count = count
    return float("nan")


def bregman_project_dense(weights, kappa: float) -> np.ndarray:
    """KL-project a measure onto the set of kappa-dense measures.

    The projection is the capped scaling ``min(1, c * w_i)`` for the
    smallest ``c >= 1`` giving density exactly ``kappa``.  ``c`` solves a
    piecewise-linear equation in the number of capped entries; it is found
    exactly (no iteration tolerance) by growing the capped set, with a
    sorted sweep as fallback.

    Requires ``|w| <= kappa * n``; inputs with more mass are rejected
    (``TooDenseError``) because the capped-scaling characterization does not
    cover them.  A measure that is already exactly kappa-dense is returned
    unchanged (``c = 1``).  ``AllZeroError`` is raised when no ``c`` exists,
    e.g. for the zero measure.
    """
    w = as_measure(weights)
    kappa = check_kappa(kappa)
    n = w.size
    target = kappa * n
    total = float(w.sum())

    if total > target + DENSITY_TOL:
        raise TooDenseError(
            f"measure mass {total:.12g} exceeds kappa*n = {target:.12g}; projection undefined"
        )
    if total <= 0.0:
        raise AllZeroError("the zero measure cannot be scaled to positive density")
    if abs(total - target) <= DENSITY_TOL:
        return w.copy()

    # Fast path: no cap binds, plain rescaling reaches the target.
    c = target / total
    if c * w.max() <= 1.0:
        return c * w

    c = _solve_scale_ascent(w, target, total)
    if math.isnan(c):
        c = _solve_scale_sorted(w, target)

    out = np.minimum(1.0, c * w)
    if abs(out.mean() - kappa) > DENSITY_TOL:
        raise AssertionError(
            f"projection density {out.mean():.15g} missed target {kappa:.15g}"
        )
    return out


@lru_cache(maxsize=4)
def _candidate_grid(n: int, points: int):
    """Full grid over [0,1]^n plus per-row quantities reused across queries."""
    axis = np.linspace(0.0, 1.0, points)
    total = points**n
    idx = np.arange(total)
    cand = np.empty((total, n))
    for j in range(n):
        cand[:, j] = axis[(idx // points ** (n - 1 - j)) % points]
    self_term = xlogy(cand, cand).sum(axis=1)  # sum_j c_j log c_j, 0 log 0 = 0
    row_sum = cand.sum(axis=1)
    return cand, self_term, row_sum


def brute_force_kl_projection(weights, kappa: float, grid_step: float) -> np.ndarray:
    """Exhaustive-grid KL projection, a test oracle for small ``n``.

    Searches every point of the ``grid_step`` lattice on ``[0,1]^n`` with
    density at least ``kappa`` and returns the one minimizing
    ``kl_divergence(candidate, weights)``.  The returned point has KL value
    within ``O(n * grid_step)`` of the true minimum.  Only supports
    ``n <= 4`` (``TooLargeError`` otherwise).
    """
    w = as_measure(weights)
    kappa = check_kappa(kappa)
    if w.size > 4:
        raise TooLargeError("brute-force projection supports n <= 4 only")
    grid_step = float(grid_step)
    if not 0.0 < grid_step <= 0.1:
        raise BadParamsError("grid_step must lie in (0, 0.1]")

    n = w.size
    cand, self_term, row_sum = _candidate_grid(n, int(round(1.0 / grid_step)) + 1)

    # KL(c, w) = sum c log c - sum c log w + sum w - sum c, vectorized over rows.
    if np.all(w > 0):
        cross = cand @ np.log(w)
    else:
        logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), 0.0)
        cross = cand @ logw
        cross = np.where((cand[:, w == 0] > 0).any(axis=1), -np.inf, cross)
    kl = self_term - cross + (w.sum() - row_sum)

    dense = row_sum >= kappa * n - _ENTRY_TOL
    if not dense.any():
        raise AllZeroError("no grid candidate reaches the target density")
    kl = np.where(dense, kl, np.inf)
    best = int(np.argmin(kl))
    return cand[best].copy()


def random_dense_measure(n: int, kappa: float, rng: np.random.Generator) -> np.ndarray:
    """Draw a random measure of density at least ``kappa``.

    Picks a density target uniformly in ``[kappa, 1]``, scales a random
    positive weight vector toward it (capping at one) and projects, so the
    result has density exactly the drawn target.  Note the induced
    distribution of any kappa-dense measure is ``1/(kappa n)``-smooth.
    """
    kappa = check_kappa(kappa)
    target = rng.uniform(kappa, 1.0)
    raw = rng.uniform(0.02, 1.0, int(n))
    capped = np.minimum(1.0, raw * (target * n) / raw.sum())
    return bregman_project_dense(capped, target)
