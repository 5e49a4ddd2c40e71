"""Acceptance suite.

Each test runs one acceptance criterion at its stated scale and tolerance
and prints a single ``[acceptance]`` pass/fail line (visible under
``pytest -s`` or ``-rA``).  Run with::

    pytest tests/test_acceptance.py -v -s

The end-to-end criterion (#7) dominates the runtime at roughly twenty
minutes; everything else finishes within a few minutes combined.
"""
import math

import numpy as np
import pytest

from privboost import boosting as B
from privboost import games as G
from privboost import halfspace as H
from privboost import measures as M
from privboost import privacy as P
from privboost.data import GeneratorConfig, NoiseConfig, apply_rcn, generate_margin_sample
from privboost.halfspace import LabeledSample
from privboost.rng import stream

from conftest import random_projectable_measure, random_smooth_distribution


def _report(number: int, name: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] #{number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion #{number} {name}: {detail}"


# ---------------------------------------------------------------------------
# 1. capped-scaling projection matches brute-force KL minimization
# ---------------------------------------------------------------------------

def test_criterion_1_projection_oracle_equivalence():
    grid = 0.02
    g = stream(101, "acceptance-projection")
    worst_gap = -math.inf
    failures = 0
    for _ in range(500):
        n = int(g.integers(2, 5))
        kappa = float(g.uniform(0.3, 0.95))
        m = random_projectable_measure(g, n, kappa)
        fast = M.bregman_project_dense(m, kappa)
        brute = M.brute_force_kl_projection(m, kappa, grid)
        gap = M.kl_divergence(fast, m) - M.kl_divergence(brute, m)
        worst_gap = max(worst_gap, gap)
        if gap > 5 * grid * n:
            failures += 1
    _report(
        1,
        "projection oracle equivalence",
        failures == 0,
        f"500 trials, worst KL gap {worst_gap:.3e} (closed form should not exceed grid search)",
    )


# ---------------------------------------------------------------------------
# 2. re-weighting stability: neighboring samples induce close distributions
# ---------------------------------------------------------------------------

def test_criterion_2_reweighting_stability():
    g = stream(102, "acceptance-stability")
    worst_ratio = 0.0
    failures = 0
    for trial in range(500):
        n = int(g.choice([10, 100, 1000]))
        kappa = float(g.uniform(0.05, 0.5))
        sample, _ = generate_margin_sample(
            GeneratorConfig(d=5, n=n, tau=0.3, seed=7000 + trial)
        )
        x = sample.x.copy()
        y = sample.y.copy()
        i = int(g.integers(n))
        v = g.standard_normal(5)
        x[i] = v / (2 * np.linalg.norm(v))
        y[i] = 1.0 if g.random() < 0.5 else -1.0
        neighbor = LabeledSample(x, y)
        hypotheses = [g.standard_normal(5) for _ in range(int(g.integers(0, 6)))]
        _, d1 = B.lazy_bregman_next_measure(sample, hypotheses, kappa, 0.1)
        _, d2 = B.lazy_bregman_next_measure(neighbor, hypotheses, kappa, 0.1)
        bound = 1.0 / (kappa * n)
        distance = M.statistical_distance(d1, d2)
        worst_ratio = max(worst_ratio, distance / bound)
        if distance > bound + 1e-9:
            failures += 1
    _report(
        2,
        "re-weighting stability",
        failures == 0,
        f"500 neighboring pairs, worst distance at {worst_ratio:.3f} of the 1/(kappa n) bound",
    )


# ---------------------------------------------------------------------------
# 3. regret bound on random iterated-play traces
# ---------------------------------------------------------------------------

def test_criterion_3_regret_bound():
    report = G.regret_campaign(
        trials=1000,
        seed=103,
        n=32,
        rounds=100,
        lam=None,  # drawn in [0.01, 0.3] per trial
        kappa=None,
        n_random_comparators=10,
        randomize_sizes=True,
    )
    _report(
        3,
        "regret bound",
        report["passes"] == 1000 and not report["failures"],
        f"{report['passes']}/1000 traces, 11 comparators each, min slack {report['min_slack']:.3e}",
    )


# ---------------------------------------------------------------------------
# 4 and 5. round bound and the loss sandwich on the same noiseless runs
# ---------------------------------------------------------------------------

_RB = dict(tau=0.5, d=20, n=2000, kappa=0.05, runs=20)
_RB["gamma"] = _RB["tau"] / 4
_RB["lam"] = _RB["gamma"] / 4
_RB["rounds"] = math.ceil(16 * math.log(1 / _RB["kappa"]) / _RB["gamma"] ** 2)


@pytest.fixture(scope="module")
def round_bound_runs():
    runs = []
    for seed in range(_RB["runs"]):
        sample, _ = generate_margin_sample(
            GeneratorConfig(d=_RB["d"], n=_RB["n"], tau=_RB["tau"], seed=8000 + seed)
        )
        out = B.boost(
            sample,
            B.BoostConfig(_RB["kappa"], _RB["lam"], _RB["rounds"]),
            B.LazyBregmanMeasure(_RB["kappa"], _RB["lam"]),
            lambda s, d, g: H.weak_learn_center(s, d),
            seed,
        )
        report = G.sandwich_check(
            sample,
            _RB["gamma"],
            _RB["kappa"],
            _RB["lam"],
            _RB["rounds"],
            lambda s, d, g: H.weak_learn_center(s, d),
        )
        runs.append((sample, out, report))
    return runs


def test_criterion_4_round_bound_margin(round_bound_runs):
    fractions = [
        B.margin_failure_fraction(out, sample, _RB["gamma"])
        for sample, out, _ in round_bound_runs
    ]
    passes = sum(f <= _RB["kappa"] for f in fractions)
    _report(
        4,
        "round-bound margin",
        passes == _RB["runs"],
        f"{passes}/{_RB['runs']} runs with failure fraction <= kappa "
        f"(worst {max(fractions):.4f} vs {_RB['kappa']}), T={_RB['rounds']}",
    )


def test_criterion_5_sandwich(round_bound_runs):
    ok = True
    min_theta = math.inf
    for _, _, report in round_bound_runs:
        ok &= report.weak_learning_ok and report.regret_ok and report.prescient_ok
        ok &= report.theta >= _RB["gamma"]
        ok &= not report.advantage_violations
        min_theta = min(min_theta, report.theta)
    _report(
        5,
        "loss sandwich",
        ok,
        f"{_RB['runs']}/{_RB['runs']} runs satisfy both inequalities; "
        f"min theta {min_theta:.4f} >= gamma {_RB['gamma']}",
    )


# ---------------------------------------------------------------------------
# 6. private weak learner keeps its advantage under the stated noise
# ---------------------------------------------------------------------------

def test_criterion_6_private_weak_learner():
    tau = 0.5
    sigma = tau / 16
    kappa, n, d = 0.1, 500, 20
    g = stream(106, "acceptance-weak")
    samples = [
        generate_margin_sample(GeneratorConfig(d=d, n=n, tau=tau, seed=9000 + s))[0]
        for s in range(10)
    ]
    hits = 0
    draws = 1000
    for i in range(draws):
        sample = samples[i % len(samples)]
        dist = random_smooth_distribution(g, n, kappa)
        z = H.weak_learn_private(sample, dist, sigma, g)
        if H.advantage(z, sample, dist) >= tau / 8:
            hits += 1
    _report(
        6,
        "private weak learner advantage",
        hits >= 0.95 * draws,
        f"{hits}/{draws} draws with advantage >= tau/8 at sigma = tau/16",
    )


# ---------------------------------------------------------------------------
# 7. end-to-end noise-tolerant private learning at full schedule
# ---------------------------------------------------------------------------

def test_criterion_7_end_to_end_noise_tolerant():
    d, tau, alpha, beta = 50, 0.3, 0.2, 0.1
    eta = alpha * tau / 32
    n = 20_000
    runs = 20
    params = H.LearnerParams(alpha=alpha, beta=beta, tau=tau)
    errors, norms = [], []
    for seed in range(runs):
        train, target = generate_margin_sample(
            GeneratorConfig(d=d, n=n, tau=tau, seed=10_000 + seed)
        )
        noised, _ = apply_rcn(train, NoiseConfig(eta=eta, seed=10_000 + seed))
        held_out, _ = generate_margin_sample(
            GeneratorConfig(
                d=d, n=n, tau=tau, seed=20_000 + seed, target_direction=target
            )
        )
        result = H.learn_halfspace(noised, params, seed)
        errors.append(H.empirical_error(result.hypothesis, held_out))
        norms.append(float(np.linalg.norm(result.hypothesis)))
    error_passes = sum(e <= alpha for e in errors)
    norm_passes = sum(v <= 2.0 for v in norms)
    _report(
        7,
        "end-to-end noise-tolerant learning",
        error_passes >= 18 and norm_passes >= 18,
        f"test error <= {alpha} in {error_passes}/{runs} runs (max {max(errors):.4f}); "
        f"norm <= 2 in {norm_passes}/{runs} runs (max {max(norms):.3f})",
    )


# ---------------------------------------------------------------------------
# 8. accountant arithmetic
# ---------------------------------------------------------------------------

def test_criterion_8_accountant_arithmetic():
    checks = []

    folded = P.ZcdpLedger()
    for t in range(100):
        folded = P.compose(folded, 0.003, str(t))
    checks.append(abs(folded.rho_total - 0.3) <= 1e-9)

    checks.append(P.zcdp_to_dp(0.0, 1e-6).epsilon == 0.0)
    checks.append(
        abs(P.zcdp_to_dp(0.01, 1e-6).epsilon - (0.01 + 2 * math.sqrt(0.01 * math.log(1e6))))
        <= 1e-9
    )
    checks.append(abs(P.zcdp_to_dp(1.0, math.exp(-1.0)).epsilon - 3.0) <= 1e-9)
    checks.append(P.gaussian_renyi(1.0, 1.0, 2.0) == 1.0)
    checks.append(P.gaussian_renyi(4.0, 2.0, 3.0) == 1.5)
    checks.append(abs(P.weak_learner_rho(0.1, 10_000, 0.001, 1.0) - 8e-6) <= 1e-9)
    checks.append(abs(P.weak_learner_rho(0.05, 10_000, 0.002, 0.05) - 0.0128) <= 1e-9)

    # calibration round trip: spend the calibrated budget T times and the
    # sufficient conversion lands at or below the target epsilon
    for eps, delta, T, kappa, n in [
        (1.0, 1e-6, 500, 0.05, 20_000),
        (0.3, 1e-8, 12_271, 0.05, 50_000),
        (3.0, math.exp(-1.0), 1, 1.0, 1),
    ]:
        sigma = P.calibrate_sigma(P.ApproxDpParams(eps, delta), T, kappa, n)
        rho_total = T * P.weak_learner_rho(kappa, n, 1 / (kappa * n), sigma)
        checks.append(P.epsilon_sufficient(rho_total, delta) <= eps + 1e-9)
        exact = P.calibrate_sigma(P.ApproxDpParams(eps, delta), T, kappa, n, exact=True)
        rho_exact = T * P.weak_learner_rho(kappa, n, 1 / (kappa * n), exact)
        checks.append(P.zcdp_to_dp(rho_exact, delta).epsilon <= eps + 1e-9)

    _report(
        8,
        "accountant arithmetic",
        all(checks),
        f"{sum(checks)}/{len(checks)} identities hold at 1e-9",
    )


# ---------------------------------------------------------------------------
# 9. label-noise independence and reproducibility
# ---------------------------------------------------------------------------

def test_criterion_9_rcn_independence_reproducibility():
    sample, _ = generate_margin_sample(GeneratorConfig(d=3, n=200, tau=0.4, seed=5))
    negated = LabeledSample(sample.x, -sample.y)
    trials = 10_000
    ok = True
    for seed in range(trials):
        noise = NoiseConfig(eta=0.1, seed=seed)
        _, flips_a = apply_rcn(sample, noise)
        _, flips_b = apply_rcn(sample, noise)
        _, flips_neg = apply_rcn(negated, noise)
        if not (np.array_equal(flips_a, flips_b) and np.array_equal(flips_a, flips_neg)):
            ok = False
            break
    _report(
        9,
        "label-noise independence and reproducibility",
        ok,
        f"{trials} trials: masks reproduce per seed and ignore labels",
    )
